//! Independent reference implementations used as test oracles. None of these
//! call into the library's numerical code.
#![allow(dead_code)]

use std::collections::HashMap;

use windowlens::corpusgen::{SyntheticGrammar, Template, WordClass};
use windowlens::lexicon::{PosLexicon, PosTag};
use windowlens::EmbeddingModel;

/// Ranks by explicit counting: 1 + #smaller + (#equal − 1)/2.
pub fn enumerated_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let smaller = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Two-pass Pearson.
pub fn two_pass_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Textbook single-pass computational formula.
pub fn textbook_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn spearman_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    two_pass_pearson(&enumerated_ranks(xs), &enumerated_ranks(ys))
}

/// Exact binomial coefficients up to `n_max` by Pascal's rule.
pub struct Binomials {
    table: Vec<Vec<u128>>,
}

impl Binomials {
    pub fn new(n_max: usize) -> Self {
        let mut table = vec![vec![1u128]];
        for n in 1..=n_max {
            let prev = &table[n - 1];
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1] + prev[k];
            }
            table.push(row);
        }
        Binomials { table }
    }

    pub fn get(&self, n: u64, k: u64) -> u128 {
        if k > n {
            0
        } else {
            self.table[n as usize][k as usize]
        }
    }

    /// P(X ≥ k) for X ~ Hypergeometric(N, K, n) by summing exact counts of
    /// all draws.
    pub fn hypergeom_upper_tail(&self, n_pop: u64, k_pop: u64, n: u64, k: u64) -> f64 {
        let total = self.get(n_pop, n);
        let hits: u128 = (k..=n.min(k_pop))
            .map(|i| self.get(k_pop, i) * self.get(n_pop - k_pop, n - i))
            .sum();
        hits as f64 / total as f64
    }
}

/// Two-tailed p-value of Pearson r by Simpson integration of the Student t
/// density with ν = n − 2, after t = tan θ. The normalizing constant is
/// integrated the same way, so no gamma function is involved.
pub fn t_test_pvalue_by_integration(r: f64, n: usize) -> f64 {
    let nu = (n - 2) as f64;
    let t = r.abs() * (nu / (1.0 - r * r)).sqrt();
    let g = |theta: f64| {
        let c = theta.cos();
        if c <= 0.0 {
            return if nu == 1.0 { 1.0 } else { 0.0 };
        }
        let tt = theta.tan();
        (1.0 + tt * tt / nu).powf(-(nu + 1.0) / 2.0) / (c * c)
    };
    let simpson = |a: f64, b: f64, steps: usize| {
        let h = (b - a) / steps as f64;
        let mut s = g(a) + g(b);
        for i in 1..steps {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(x);
        }
        s * h / 3.0
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let tail = simpson(t.atan(), half_pi, 200_000);
    let half = simpson(0.0, half_pi, 200_000);
    tail / half
}

/// Full O(V·d) scan with descending-cosine / ascending-index order.
pub fn brute_force_neighbors(model: &EmbeddingModel, pivot: usize, k: usize) -> Vec<usize> {
    let q = model.vector(pivot);
    let mut all: Vec<(f64, usize)> = (0..model.len())
        .filter(|&i| i != pivot)
        .map(|i| {
            let v = model.vector(i);
            let mut s = 0.0f64;
            for j in 0..q.len() {
                s += q[j] as f64 * v[j] as f64;
            }
            (s.clamp(-1.0, 1.0), i)
        })
        .collect();
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Three-class grammar whose templates mix adjacent tags.
pub fn three_class_grammar(sentences: usize, seed: u64) -> SyntheticGrammar {
    let tpl = |w: f64, tags: &[PosTag]| Template {
        tags: tags.to_vec(),
        weight: w,
    };
    use PosTag::*;
    SyntheticGrammar {
        classes: vec![
            WordClass { tag: Noun, vocabulary_size: 60 },
            WordClass { tag: Verb, vocabulary_size: 30 },
            WordClass { tag: Adj, vocabulary_size: 30 },
        ],
        templates: vec![
            tpl(3.0, &[Adj, Noun, Verb, Adj, Noun]),
            tpl(3.0, &[Noun, Verb, Noun]),
            tpl(2.0, &[Adj, Adj, Noun, Verb]),
            tpl(2.0, &[Noun, Verb, Adj, Noun]),
        ],
        sentence_count: sentences,
        zipf_exponent: 1.0,
        seed,
    }
}

pub fn gold_lexicon(entries: &[(&str, PosTag)]) -> PosLexicon {
    PosLexicon::from_gold(
        entries
            .iter()
            .map(|(w, t)| (w.to_string(), *t))
            .collect::<HashMap<_, _>>(),
    )
}

/// Model whose rows are given explicitly.
pub fn model_from(rows: &[(&str, Vec<f32>)]) -> EmbeddingModel {
    let dim = rows[0].1.len();
    EmbeddingModel::from_rows(
        rows.iter().map(|(w, _)| w.to_string()).collect(),
        dim,
        rows.iter().flat_map(|(_, v)| v.iter().copied()).collect(),
    )
    .unwrap()
}

/// Model in which pair `i` is (`p{i}`, `q{i}`) at cosine `cosines[i]`; every
/// pair lives in its own pair of coordinates.
pub fn model_with_pair_cosines(cosines: &[f64]) -> EmbeddingModel {
    let dim = 2 * cosines.len();
    let mut words = Vec::new();
    let mut raw = Vec::new();
    for (i, &c) in cosines.iter().enumerate() {
        let theta = c.clamp(-1.0, 1.0).acos();
        let mut p = vec![0f32; dim];
        p[2 * i] = 1.0;
        let mut q = vec![0f32; dim];
        q[2 * i] = theta.cos() as f32;
        q[2 * i + 1] = theta.sin() as f32;
        words.push(format!("p{i}"));
        raw.extend(p);
        words.push(format!("q{i}"));
        raw.extend(q);
    }
    EmbeddingModel::from_rows(words, dim, raw).unwrap()
}
