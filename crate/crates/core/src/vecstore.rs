//! Embedding storage and exact cosine queries.
//!
//! Rows are kept unit-normalized so cosine similarity is a plain dot product;
//! the original norms are retained for serialization.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use log::warn;
use rayon::prelude::*;

use crate::trainer::Algorithm;
use crate::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-6;

/// Where a model came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub algorithm: Algorithm,
    pub window: usize,
    pub corpus: Option<String>,
}

/// Immutable vocabulary plus a unit-normalized `V × dim` matrix.
#[derive(Clone, Debug)]
pub struct EmbeddingModel {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f32>,
    raw_norms: Vec<f32>,
    provenance: Option<Provenance>,
}

/// Non-fatal problems encountered while loading a text model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    pub duplicate_words: usize,
    pub zero_vectors: usize,
}

impl EmbeddingModel {
    /// Builds a model from raw (unnormalized) row-major vectors.
    ///
    /// Fails on duplicate words, zero or non-finite rows and shape mismatches.
    pub fn from_rows(words: Vec<String>, dim: usize, raw: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Format("vector dimension must be ≥ 1".into()));
        }
        if words.is_empty() {
            return Err(Error::Format("empty model".into()));
        }
        if raw.len() != words.len() * dim {
            return Err(Error::Format(format!(
                "matrix has {} values, expected {} words × {} dims",
                raw.len(),
                words.len(),
                dim
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate word {w:?}")));
            }
        }
        let mut vectors = raw;
        let mut raw_norms = Vec::with_capacity(words.len());
        for (row, word) in vectors.chunks_mut(dim).zip(&words) {
            let norm = normalize(row)
                .ok_or_else(|| Error::Format(format!("zero or non-finite vector for {word:?}")))?;
            raw_norms.push(norm);
        }
        Ok(EmbeddingModel {
            words,
            index,
            dim,
            vectors,
            raw_norms,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Unit-normalized row.
    pub fn vector(&self, idx: usize) -> &[f32] {
        &self.vectors[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn raw_norm(&self, idx: usize) -> f32 {
        self.raw_norms[idx]
    }

    fn lookup(&self, word: &str) -> Result<usize> {
        self.index_of(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))
    }

    /// Cosine similarity between two vocabulary indices.
    pub fn cosine_by_index(&self, a: usize, b: usize) -> f64 {
        dot(self.vector(a), self.vector(b)).clamp(-1.0, 1.0)
    }

    /// Cosine similarity between two words.
    pub fn cosine(&self, w1: &str, w2: &str) -> Result<f64> {
        let a = self.lookup(w1)?;
        let b = self.lookup(w2)?;
        Ok(self.cosine_by_index(a, b))
    }

    /// Exact top-`k` neighbors of `pivot` over the whole vocabulary.
    pub fn nearest_neighbors(&self, pivot: &str, k: usize) -> Result<NeighborList> {
        self.nearest_neighbors_filtered(pivot, k, |_| true)
    }

    /// Exact top-`k` retrieval followed by dropping neighbors rejected by
    /// `keep`. The filter never pulls in candidates beyond the first `k`.
    pub fn nearest_neighbors_filtered<F>(&self, pivot: &str, k: usize, keep: F) -> Result<NeighborList>
    where
        F: Fn(&str) -> bool,
    {
        let p = self.lookup(pivot)?;
        let mut neighbors = self.top_k(p, k);
        neighbors.retain(|n| keep(&n.word));
        Ok(NeighborList {
            pivot: pivot.to_owned(),
            neighbors,
            k_requested: k,
        })
    }

    /// Neighbor lists for many pivots, computed in parallel; output order
    /// follows `pivots`.
    pub fn batch_nearest_neighbors<S, F>(&self, pivots: &[S], k: usize, keep: F) -> Vec<Result<NeighborList>>
    where
        S: AsRef<str> + Sync,
        F: Fn(&str) -> bool + Sync,
    {
        pivots
            .par_iter()
            .map(|p| self.nearest_neighbors_filtered(p.as_ref(), k, &keep))
            .collect()
    }

    fn top_k(&self, pivot: usize, k: usize) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let query = self.vector(pivot);
        let mut scored: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| i != pivot)
            .map(|i| (dot(query, self.vector(i)).clamp(-1.0, 1.0), i))
            .collect();
        let k = k.min(scored.len());
        if k == 0 {
            return Vec::new();
        }
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, neighbor_order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(neighbor_order);
        scored
            .into_iter()
            .map(|(cosine, index)| Neighbor {
                word: self.words[index].clone(),
                index,
                cosine,
            })
            .collect()
    }

    /// Writes the model in word2vec text format, scaling rows back to their
    /// original norms.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        let mut line = String::new();
        for (i, word) in self.words.iter().enumerate() {
            line.clear();
            line.push_str(word);
            let norm = self.raw_norms[i];
            for &v in self.vector(i) {
                use fmt::Write as _;
                write!(line, " {}", v * norm).expect("writing to a String cannot fail");
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Descending cosine, then ascending vocabulary index.
fn neighbor_order(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

// Normalizes in place and returns the original norm, or None for zero or
// non-finite rows.
fn normalize(row: &mut [f32]) -> Option<f32> {
    let norm = row.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return None;
    }
    for v in row.iter_mut() {
        *v = (*v as f64 / norm) as f32;
    }
    let check = row.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt();
    debug_assert!((check - 1.0).abs() <= NORM_TOLERANCE);
    Some(norm as f32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub word: String,
    pub index: usize,
    pub cosine: f64,
}

/// Neighbors of one pivot, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborList {
    pub pivot: String,
    pub neighbors: Vec<Neighbor>,
    pub k_requested: usize,
}

/// Reads a word2vec text model.
///
/// The first line is a header only if it consists of exactly two integers.
/// Duplicate words keep their first occurrence and zero vectors are skipped;
/// both are counted in the returned warnings. `max_words` stops reading after
/// that many vector lines.
pub fn load_text_model<R: BufRead>(
    source: R,
    max_words: Option<usize>,
) -> Result<(EmbeddingModel, LoadWarnings)> {
    let mut warnings = LoadWarnings::default();
    let mut words = Vec::new();
    let mut seen = HashMap::new();
    let mut raw = Vec::new();
    let mut dim: Option<usize> = None;
    let mut declared_words: Option<usize> = None;
    let mut rows_read = 0usize;
    let mut truncated = false;

    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();

        if line_no == 1 && rest.len() == 1 {
            if let (Ok(n), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                if d == 0 {
                    return Err(Error::Parse {
                        line: 1,
                        message: "header declares dimension 0".into(),
                    });
                }
                declared_words = Some(n);
                dim = Some(d);
                continue;
            }
        }

        if max_words.is_some_and(|m| rows_read >= m) {
            truncated = true;
            break;
        }

        let d = *dim.get_or_insert(rest.len());
        if d == 0 || rest.len() != d {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} vector components, found {}", d, rest.len()),
            });
        }
        rows_read += 1;

        let mut row = Vec::with_capacity(d);
        for tok in &rest {
            let v: f32 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid number {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite value {tok:?}"),
                });
            }
            row.push(v);
        }

        if seen.contains_key(word) {
            warnings.duplicate_words += 1;
            warn!("line {line_no}: duplicate word {word:?} ignored");
            continue;
        }
        if row.iter().all(|&v| v == 0.0) {
            warnings.zero_vectors += 1;
            warn!("line {line_no}: zero vector for {word:?} skipped");
            continue;
        }
        seen.insert(word.to_owned(), words.len());
        words.push(word.to_owned());
        raw.extend_from_slice(&row);
    }

    if let Some(expected) = declared_words {
        if !truncated && rows_read != expected {
            return Err(Error::Format(format!(
                "header declares {expected} words but {rows_read} vector lines are present"
            )));
        }
    }
    if words.is_empty() {
        return Err(Error::Format("empty model".into()));
    }
    let dim = dim.unwrap_or(0);
    Ok((EmbeddingModel::from_rows(words, dim, raw)?, warnings))
}

/// Writes neighbor lists as `pivot<TAB>rank<TAB>neighbor<TAB>cosine` rows
/// with 1-based ranks.
pub fn write_neighbor_tsv<W: Write>(mut out: W, lists: &[NeighborList]) -> Result<()> {
    writeln!(out, "pivot\trank\tneighbor\tcosine")?;
    for list in lists {
        for (rank, n) in list.neighbors.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}\t{:.6}", list.pivot, rank + 1, n.word, n.cosine)?;
        }
    }
    Ok(())
}
