use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("divergence: non-finite loss in epoch {epoch} at position {position}")]
    Divergence { epoch: usize, position: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Format(String),

    #[error("word not in vocabulary: {0}")]
    OutOfVocabulary(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient coverage: {used} usable pairs in {benchmark}")]
    InsufficientCoverage { benchmark: String, used: usize },

    #[error("degenerate score range")]
    DegenerateScoreRange,

    #[error("undefined relative change (rho at window 2 is zero)")]
    UndefinedRelativeChange,

    #[error("no entries")]
    NoEntries,

    #[error("empty pivot list for {0}")]
    EmptyPivotList(String),

    #[error("empty band: {0}")]
    EmptyBand(String),

    #[error("no usable pivots for {0}")]
    NoUsablePivots(String),

    #[error("empty histogram")]
    EmptyHistogram,

    #[error("degenerate sweep for {0}: ratio is constant across windows")]
    DegenerateSweep(String),

    #[error("sweep needs ≥ 3 windows, got {0}")]
    TooFewWindows(usize),
}
