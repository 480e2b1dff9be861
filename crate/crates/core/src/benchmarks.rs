//! Word-similarity benchmarks: ingestion, Spearman evaluation and
//! related/unrelated bands.

use std::io::{BufRead, Write};

use crate::stats::spearman;
use crate::vecstore::EmbeddingModel;
use crate::{Error, Result};

const UNRELATED_FRACTION: f64 = 0.3;
const RELATED_FRACTION: f64 = 0.7;
// Scores this close (relative to the range) to a threshold count as on it.
const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPair {
    pub word1: String,
    pub word2: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub name: String,
    pub pairs: Vec<ScoredPair>,
    pub score_min: f64,
    pub score_max: f64,
}

impl Benchmark {
    pub fn new(name: impl Into<String>, pairs: Vec<ScoredPair>) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::Format(format!("benchmark {name} has no pairs")));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let pairs: Vec<ScoredPair> = pairs
            .into_iter()
            .map(|p| {
                lo = lo.min(p.score);
                hi = hi.max(p.score);
                ScoredPair {
                    word1: p.word1.to_lowercase(),
                    word2: p.word2.to_lowercase(),
                    score: p.score,
                }
            })
            .collect();
        Ok(Benchmark {
            name,
            pairs,
            score_min: lo,
            score_max: hi,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.score).collect()
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for p in &self.pairs {
            writeln!(out, "{}\t{}\t{}", p.word1, p.word2, p.score)?;
        }
        Ok(())
    }
}

fn parse_score(raw: &str, line: usize) -> Result<f64> {
    let score: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("unparseable score {:?}", raw.trim()),
    })?;
    if !score.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite score {raw:?}"),
        });
    }
    Ok(score)
}

/// Reads the canonical `word1<TAB>word2<TAB>score` format. Lines starting
/// with `#` and blank lines are skipped.
pub fn load_benchmark<R: BufRead>(source: R, name: &str) -> Result<Benchmark> {
    let mut pairs = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        pairs.push(ScoredPair {
            word1: fields[0].trim().to_owned(),
            word2: fields[1].trim().to_owned(),
            score: parse_score(fields[2], line_no)?,
        });
    }
    Benchmark::new(name, pairs)
}

/// Source layouts accepted by [`import_benchmark`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImportLayout {
    /// `word1,word2,score`
    Csv,
    /// Tab-separated, words in columns 1 and 2, score in the given 1-based
    /// column; other columns are ignored.
    Tsv { score_column: usize },
}

/// Converts a benchmark in one of the known layouts into canonical form.
/// `skip_header` drops the first non-blank line.
pub fn import_benchmark<R: BufRead>(
    source: R,
    name: &str,
    layout: ImportLayout,
    skip_header: bool,
) -> Result<Benchmark> {
    let (sep, score_idx) = match layout {
        ImportLayout::Csv => (',', 2),
        ImportLayout::Tsv { score_column } => {
            if score_column < 3 {
                return Err(Error::InvalidArgument(
                    "score column must be 3 or later (columns 1 and 2 hold the words)".into(),
                ));
            }
            ('\t', score_column - 1)
        }
    };
    let mut header_pending = skip_header;
    let mut pairs = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = line.split(sep).collect();
        if fields.len() <= score_idx || (layout == ImportLayout::Csv && fields.len() != 3) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected field count {}", fields.len()),
            });
        }
        pairs.push(ScoredPair {
            word1: fields[0].trim().to_owned(),
            word2: fields[1].trim().to_owned(),
            score: parse_score(fields[score_idx], line_no)?,
        });
    }
    Benchmark::new(name, pairs)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub rho: f64,
    pub n_used: usize,
    pub n_oov_pairs: usize,
}

/// Spearman correlation between human scores and model cosines, skipping
/// pairs with an out-of-vocabulary word.
pub fn evaluate(model: &EmbeddingModel, benchmark: &Benchmark) -> Result<EvalResult> {
    let mut human = Vec::with_capacity(benchmark.len());
    let mut predicted = Vec::with_capacity(benchmark.len());
    for p in &benchmark.pairs {
        if let (Some(a), Some(b)) = (model.index_of(&p.word1), model.index_of(&p.word2)) {
            human.push(p.score);
            predicted.push(model.cosine_by_index(a, b));
        }
    }
    let n_used = human.len();
    if n_used < 2 {
        return Err(Error::InsufficientCoverage {
            benchmark: benchmark.name.clone(),
            used: n_used,
        });
    }
    Ok(EvalResult {
        rho: spearman(&human, &predicted)?,
        n_used,
        n_oov_pairs: benchmark.len() - n_used,
    })
}

/// Pair indices split by score: top 30% of the observed range is related,
/// bottom 30% unrelated, the middle is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct RelatednessBands {
    pub related: Vec<usize>,
    pub unrelated: Vec<usize>,
    pub ignored: Vec<usize>,
    pub low: f64,
    pub high: f64,
}

/// Thresholds are inclusive toward the outer bands.
pub fn band_partition(benchmark: &Benchmark) -> Result<RelatednessBands> {
    let (lo, hi) = (benchmark.score_min, benchmark.score_max);
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(Error::DegenerateScoreRange);
    }
    let low = lo + UNRELATED_FRACTION * range;
    let high = lo + RELATED_FRACTION * range;
    let eps = BOUNDARY_TOLERANCE * range;
    let mut bands = RelatednessBands {
        related: Vec::new(),
        unrelated: Vec::new(),
        ignored: Vec::new(),
        low,
        high,
    };
    for (i, p) in benchmark.pairs.iter().enumerate() {
        if p.score >= high - eps {
            bands.related.push(i);
        } else if p.score <= low + eps {
            bands.unrelated.push(i);
        } else {
            bands.ignored.push(i);
        }
    }
    Ok(bands)
}

/// Signed relative change of ρ from window 2 to window 15, in percent.
pub fn delta_win(rho_w2: f64, rho_w15: f64) -> Result<f64> {
    if rho_w2 == 0.0 {
        return Err(Error::UndefinedRelativeChange);
    }
    Ok(100.0 * (rho_w15 - rho_w2) / rho_w2)
}
