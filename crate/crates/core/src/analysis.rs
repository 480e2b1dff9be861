//! Syntactic interchangeability analyses.
//!
//! * Enrichment: are same-POS pairs over-represented among a benchmark's
//!   related pairs, against the background of related plus unrelated pairs?
//! * Neighbor POS: for pivot words of a known POS, what fraction of their
//!   nearest neighbors share it, and how does that fraction move with the
//!   training window?

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::benchmarks::{Benchmark, RelatednessBands};
use crate::lexicon::{PivotLists, PosLexicon, PosTag};
use crate::stats::{hypergeom_sf, pearson, pearson_pvalue_two_tailed, ContingencyCounts};
use crate::trainer::Algorithm;
use crate::vecstore::EmbeddingModel;
use crate::{Error, Result};

pub const DEFAULT_K_SEARCH: usize = 100;
pub const DEFAULT_K_KEEP: usize = 10;

/// `Some(true)` when both words carry the same most-frequent tag, `None` if
/// either is missing from the lexicon.
pub fn same_pos(lex: &PosLexicon, w1: &str, w2: &str) -> Option<bool> {
    Some(lex.tag(w1)? == lex.tag(w2)?)
}

/// Enrichment row: same-POS counts within the related and unrelated bands
/// and the hypergeometric enrichment p-value.
#[derive(Clone, Debug, PartialEq)]
pub struct EnrichmentResult {
    pub benchmark_name: String,
    pub n_related: u64,
    pub n_related_same_pos: u64,
    pub n_unrelated: u64,
    pub n_unrelated_same_pos: u64,
    pub p_value: f64,
    /// Band pairs left out because a word is missing from the lexicon.
    pub n_skipped: u64,
}

impl EnrichmentResult {
    /// Computes the p-value for already tallied counts.
    pub fn from_counts(
        benchmark_name: impl Into<String>,
        n_related: u64,
        n_related_same_pos: u64,
        n_unrelated: u64,
        n_unrelated_same_pos: u64,
    ) -> Result<Self> {
        let name = benchmark_name.into();
        if n_related == 0 {
            return Err(Error::EmptyBand(format!("{name}: no related pairs")));
        }
        if n_unrelated == 0 {
            return Err(Error::EmptyBand(format!("{name}: no unrelated pairs")));
        }
        if n_related_same_pos > n_related || n_unrelated_same_pos > n_unrelated {
            return Err(Error::InvalidArgument(format!(
                "{name}: same-POS count exceeds band size"
            )));
        }
        let counts = ContingencyCounts::new(
            n_related + n_unrelated,
            n_related_same_pos + n_unrelated_same_pos,
            n_related,
            n_related_same_pos,
        )?;
        Ok(EnrichmentResult {
            benchmark_name: name,
            n_related,
            n_related_same_pos,
            n_unrelated,
            n_unrelated_same_pos,
            p_value: hypergeom_sf(&counts)?,
            n_skipped: 0,
        })
    }
}

/// Same-POS enrichment of related pairs; middle-band pairs never enter the
/// test and pairs with lexicon-unknown words are excluded from it.
pub fn enrichment(benchmark: &Benchmark, bands: &RelatednessBands, lex: &PosLexicon) -> Result<EnrichmentResult> {
    let mut skipped = 0u64;
    let mut tally = |indices: &[usize]| -> (u64, u64) {
        let (mut total, mut same) = (0, 0);
        for &i in indices {
            let p = &benchmark.pairs[i];
            match same_pos(lex, &p.word1, &p.word2) {
                Some(s) => {
                    total += 1;
                    same += s as u64;
                }
                None => skipped += 1,
            }
        }
        (total, same)
    };
    let (n_rel, rel_same) = tally(&bands.related);
    let (n_unrel, unrel_same) = tally(&bands.unrelated);
    let mut result = EnrichmentResult::from_counts(benchmark.name.clone(), n_rel, rel_same, n_unrel, unrel_same)?;
    result.n_skipped = skipped;
    Ok(result)
}

pub fn write_enrichment_tsv<W: Write>(mut out: W, rows: &[EnrichmentResult]) -> Result<()> {
    writeln!(
        out,
        "benchmark\tn_related\trelated_same_pos\tn_unrelated\tunrelated_same_pos\tp_value\tn_skipped"
    )?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.6e}\t{}",
            r.benchmark_name,
            r.n_related,
            r.n_related_same_pos,
            r.n_unrelated,
            r.n_unrelated_same_pos,
            r.p_value,
            r.n_skipped
        )?;
    }
    Ok(())
}

/// Tally of neighbor tags for all pivots of one POS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborPosHistogram {
    pub pivot_pos: PosTag,
    pub counts: BTreeMap<PosTag, u64>,
    pub n_pivots_used: usize,
    /// Pivots absent from the model's vocabulary.
    pub n_pivots_missing: usize,
    pub k_keep: usize,
}

impl NeighborPosHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, pos: PosTag) -> u64 {
        self.counts.get(&pos).copied().unwrap_or(0)
    }
}

/// Fraction of tallied neighbors sharing the pivot POS.
pub fn same_pos_ratio(h: &NeighborPosHistogram) -> Result<f64> {
    let total = h.total();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(h.count(h.pivot_pos) as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborParams {
    /// Neighbors retrieved per pivot.
    pub k_search: usize,
    /// Lexicon-known neighbors kept from those.
    pub k_keep: usize,
}

impl Default for NeighborParams {
    fn default() -> Self {
        NeighborParams {
            k_search: DEFAULT_K_SEARCH,
            k_keep: DEFAULT_K_KEEP,
        }
    }
}

/// Histogram of neighbor tags for each pivot POS (NOUN, ADJ, VERB order).
///
/// For each pivot in the model: the `k_search` exact neighbors are filtered
/// to lexicon words and the first `k_keep` survivors are tallied.
pub fn neighbor_pos_histogram(
    model: &EmbeddingModel,
    pivots: &PivotLists,
    lex: &PosLexicon,
    params: NeighborParams,
) -> Result<Vec<NeighborPosHistogram>> {
    PosTag::PIVOT
        .iter()
        .map(|&pos| histogram_for(model, pos, pivots.get(pos), lex, params))
        .collect()
}

fn histogram_for(
    model: &EmbeddingModel,
    pos: PosTag,
    words: &[String],
    lex: &PosLexicon,
    params: NeighborParams,
) -> Result<NeighborPosHistogram> {
    let present: Vec<&str> = words.iter().map(String::as_str).filter(|w| model.contains(w)).collect();
    if present.is_empty() {
        return Err(Error::NoUsablePivots(pos.to_string()));
    }
    let lists = model.batch_nearest_neighbors(&present, params.k_search, |w| lex.knows(w));
    let mut counts: BTreeMap<PosTag, u64> = PosTag::ALL.iter().map(|&p| (p, 0)).collect();
    for list in lists {
        for n in list?.neighbors.iter().take(params.k_keep) {
            let tag = lex.tag(&n.word).expect("neighbors were filtered to lexicon words");
            *counts.get_mut(&tag).expect("all tags present") += 1;
        }
    }
    Ok(NeighborPosHistogram {
        pivot_pos: pos,
        counts,
        n_pivots_used: present.len(),
        n_pivots_missing: words.len() - present.len(),
        k_keep: params.k_keep,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub window: usize,
    pub ratio: f64,
    pub histogram: NeighborPosHistogram,
}

/// Same-POS ratio against window for one pivot POS.
#[derive(Clone, Debug, PartialEq)]
pub struct PosSweep {
    pub pivot_pos: PosTag,
    pub points: Vec<SweepPoint>,
    pub pearson_r: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub algorithm: Option<Algorithm>,
    pub per_pos: Vec<PosSweep>,
}

impl SweepResult {
    pub fn pos(&self, pos: PosTag) -> Option<&PosSweep> {
        self.per_pos.iter().find(|s| s.pivot_pos == pos)
    }
}

/// Correlates the same-POS neighbor ratio with window size.
///
/// Needs at least three windows; all models must agree on dimension and, if
/// recorded, on algorithm.
pub fn window_sweep(
    models: &BTreeMap<usize, EmbeddingModel>,
    pivots: &PivotLists,
    lex: &PosLexicon,
    params: NeighborParams,
) -> Result<SweepResult> {
    if models.len() < 3 {
        return Err(Error::TooFewWindows(models.len()));
    }
    let first = models.values().next().expect("non-empty");
    let algorithm = first.provenance().map(|p| p.algorithm);
    for (w, m) in models {
        if m.dim() != first.dim() {
            return Err(Error::InvalidArgument(format!(
                "window {w} model has dimension {}, expected {}",
                m.dim(),
                first.dim()
            )));
        }
        if m.provenance().map(|p| p.algorithm) != algorithm {
            return Err(Error::InvalidArgument(format!("window {w} model uses a different algorithm")));
        }
    }

    let entries: Vec<(usize, &EmbeddingModel)> = models.iter().map(|(&w, m)| (w, m)).collect();
    let per_window: Vec<Result<Vec<NeighborPosHistogram>>> = entries
        .par_iter()
        .map(|(_, m)| neighbor_pos_histogram(m, pivots, lex, params))
        .collect();

    let mut per_pos: Vec<PosSweep> = Vec::with_capacity(PosTag::PIVOT.len());
    let mut histograms = Vec::with_capacity(entries.len());
    for r in per_window {
        histograms.push(r?);
    }
    for (slot, &pos) in PosTag::PIVOT.iter().enumerate() {
        let mut points = Vec::with_capacity(entries.len());
        for ((window, _), hs) in entries.iter().zip(&histograms) {
            let histogram = hs[slot].clone();
            points.push(SweepPoint {
                window: *window,
                ratio: same_pos_ratio(&histogram)?,
                histogram,
            });
        }
        let xs: Vec<f64> = points.iter().map(|p| p.window as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.ratio).collect();
        let pearson_r = match pearson(&xs, &ys) {
            Ok(r) => r,
            Err(Error::UndefinedCorrelation(_)) => return Err(Error::DegenerateSweep(pos.to_string())),
            Err(e) => return Err(e),
        };
        per_pos.push(PosSweep {
            pivot_pos: pos,
            p_value: pearson_pvalue_two_tailed(pearson_r, points.len())?,
            points,
            pearson_r,
        });
    }
    Ok(SweepResult { algorithm, per_pos })
}

fn algorithm_label(a: Option<Algorithm>) -> &'static str {
    a.map(Algorithm::as_str).unwrap_or("unknown")
}

/// Full neighbor histograms:
/// `algorithm pivot_pos window neighbor_pos count same_pos_ratio`.
pub fn write_sweep_histogram_tsv<W: Write>(mut out: W, sweeps: &[SweepResult]) -> Result<()> {
    writeln!(out, "algorithm\tpivot_pos\twindow\tneighbor_pos\tcount\tsame_pos_ratio")?;
    for s in sweeps {
        for ps in &s.per_pos {
            for pt in &ps.points {
                for (tag, count) in &pt.histogram.counts {
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}\t{:.6}",
                        algorithm_label(s.algorithm),
                        ps.pivot_pos,
                        pt.window,
                        tag,
                        count,
                        pt.ratio
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// One row per (algorithm, pivot POS): ratios at the smallest and largest
/// window, Pearson r and its two-tailed p-value.
pub fn write_sweep_summary_tsv<W: Write>(mut out: W, sweeps: &[SweepResult]) -> Result<()> {
    writeln!(
        out,
        "algorithm\tpivot_pos\tfirst_window\tfirst_ratio\tlast_window\tlast_ratio\tpearson_r\tp_value"
    )?;
    for s in sweeps {
        for ps in &s.per_pos {
            let (first, last) = (&ps.points[0], &ps.points[ps.points.len() - 1]);
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{}\t{:.6}\t{:.6}\t{:.6e}",
                algorithm_label(s.algorithm),
                ps.pivot_pos,
                first.window,
                first.ratio,
                last.window,
                last.ratio,
                ps.pearson_r,
                ps.p_value
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::benchmarks::{band_partition, ScoredPair};

    fn lexicon(entries: &[(&str, PosTag)]) -> PosLexicon {
        PosLexicon::from_gold(entries.iter().map(|(w, t)| (w.to_string(), *t)).collect::<HashMap<_, _>>())
    }

    #[test]
    fn same_pos_cases() {
        let lex = lexicon(&[("dog", PosTag::Noun), ("cat", PosTag::Noun), ("run", PosTag::Verb)]);
        assert_eq!(same_pos(&lex, "dog", "cat"), Some(true));
        assert_eq!(same_pos(&lex, "dog", "run"), Some(false));
        assert_eq!(same_pos(&lex, "dog", "zzgibberish"), None);
    }

    #[test]
    fn enrichment_from_published_counts() {
        let r = EnrichmentResult::from_counts("WordSim353", 122, 107, 53, 40).unwrap();
        assert!((r.p_value - 0.038).abs() < 0.001);
        let r = EnrichmentResult::from_counts("MEN", 791, 564, 781, 439).unwrap();
        assert!(r.p_value < 1e-8);
        assert!(EnrichmentResult::from_counts("x", 0, 0, 3, 1).is_err());
        assert!(EnrichmentResult::from_counts("x", 3, 1, 0, 0).is_err());
    }

    #[test]
    fn enrichment_skips_unknown_and_ignored() {
        let lex = lexicon(&[("a", PosTag::Noun), ("b", PosTag::Noun), ("v", PosTag::Verb)]);
        let pairs = [
            ("a", "b", 10.0),
            ("a", "v", 9.0),
            ("a", "q", 9.5),
            ("b", "v", 5.0),
            ("a", "v", 0.0),
            ("b", "b", 1.0),
        ]
        .iter()
        .map(|&(x, y, s)| ScoredPair { word1: x.into(), word2: y.into(), score: s })
        .collect();
        let b = Benchmark::new("toy", pairs).unwrap();
        let bands = band_partition(&b).unwrap();
        let r = enrichment(&b, &bands, &lex).unwrap();
        assert_eq!(
            (r.n_related, r.n_related_same_pos, r.n_unrelated, r.n_unrelated_same_pos, r.n_skipped),
            (2, 1, 2, 1, 1)
        );
    }

    fn hist(pos: PosTag, counts: &[(PosTag, u64)]) -> NeighborPosHistogram {
        NeighborPosHistogram {
            pivot_pos: pos,
            counts: counts.iter().copied().collect(),
            n_pivots_used: 10,
            n_pivots_missing: 0,
            k_keep: 10,
        }
    }

    #[test]
    fn ratio_examples() {
        let h = hist(
            PosTag::Noun,
            &[(PosTag::Noun, 79), (PosTag::Verb, 11), (PosTag::Adj, 6), (PosTag::Adv, 2), (PosTag::Other, 2)],
        );
        assert!((same_pos_ratio(&h).unwrap() - 0.79).abs() < 1e-12);
        assert_eq!(same_pos_ratio(&hist(PosTag::Adj, &[(PosTag::Adj, 5)])).unwrap(), 1.0);
        let h = hist(PosTag::Noun, &[(PosTag::Noun, 1), (PosTag::Verb, 1)]);
        assert_eq!(same_pos_ratio(&h).unwrap(), 0.5);
        assert!(matches!(same_pos_ratio(&hist(PosTag::Noun, &[])), Err(Error::EmptyHistogram)));
    }

    #[test]
    fn too_few_windows() {
        let lex = lexicon(&[("a", PosTag::Noun)]);
        let pivots = PivotLists::default();
        let models = BTreeMap::new();
        let err = window_sweep(&models, &pivots, &lex, NeighborParams::default()).unwrap_err();
        assert!(err.to_string().contains("sweep needs ≥ 3 windows"));
    }
}
