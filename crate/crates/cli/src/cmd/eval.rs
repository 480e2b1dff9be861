use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{Context, Result};
use rayon::prelude::*;
use windowlens::benchmarks::{delta_win, evaluate, Benchmark};
use windowlens::EmbeddingModel;

use crate::report::{provenance, write_file};
use crate::{EvalArgs, UsageError};

/// A model with the label and window it is reported under.
pub struct Labeled<'a> {
    pub label: String,
    pub window: usize,
    pub model: &'a EmbeddingModel,
}

/// Evaluation table, rows in benchmark-major input order, followed by a
/// Δwin block for every label that has both a window-2 and a window-15 model.
pub fn eval_report(models: &[Labeled], benchmarks: &[Benchmark]) -> Result<String> {
    let mut seen = BTreeMap::new();
    for m in models {
        if seen.insert((m.label.clone(), m.window), ()).is_some() {
            return Err(UsageError(format!("two models for {} window {}", m.label, m.window)).into());
        }
    }
    let mut out = String::from("benchmark\talgorithm\twindow\trho\tn_used\tn_oov\n");
    let mut rho: BTreeMap<(&str, &str, usize), f64> = BTreeMap::new();
    for b in benchmarks {
        let results: Vec<_> = models.par_iter().map(|m| evaluate(m.model, b)).collect();
        for (m, r) in models.iter().zip(results) {
            let r = r.with_context(|| format!("evaluating {} window {} on {}", m.label, m.window, b.name))?;
            writeln!(out, "{}\t{}\t{}\t{:.6}\t{}\t{}", b.name, m.label, m.window, r.rho, r.n_used, r.n_oov_pairs)?;
            rho.insert((&b.name, &m.label, m.window), r.rho);
        }
    }
    let labels: Vec<&str> = models
        .iter()
        .map(|m| m.label.as_str())
        .filter(|l| seen.contains_key(&(l.to_string(), 2)) && seen.contains_key(&(l.to_string(), 15)))
        .fold(Vec::new(), |mut v, l| {
            if !v.contains(&l) {
                v.push(l);
            }
            v
        });
    if !labels.is_empty() {
        out.push_str("# delta_win: 100 * (rho_15 - rho_2) / rho_2\n");
        out.push_str("benchmark\talgorithm\tdelta_win_2_15_pct\n");
        for b in benchmarks {
            for &l in &labels {
                let d = delta_win(rho[&(b.name.as_str(), l, 2)], rho[&(b.name.as_str(), l, 15)])
                    .map_or("NA".to_string(), |d| format!("{d:.2}"));
                writeln!(out, "{}\t{l}\t{d}", b.name)?;
            }
        }
    }
    Ok(out)
}

pub fn run(a: EvalArgs) -> Result<()> {
    let loaded = a.models.par_iter().map(|m| m.load()).collect::<Result<Vec<_>>>()?;
    let benchmarks = a.benchmarks.iter().map(|b| b.load()).collect::<Result<Vec<_>>>()?;
    let labeled: Vec<Labeled> = a
        .models
        .iter()
        .zip(&loaded)
        .map(|(arg, model)| Labeled { label: arg.label(), window: arg.window, model })
        .collect();
    let body = eval_report(&labeled, &benchmarks)?;
    write_file(&a.out, (provenance("eval", None) + &body).as_bytes())
}
