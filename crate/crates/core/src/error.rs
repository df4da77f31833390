use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("byte offset {offset}: {message}")]
    Binary { offset: u64, message: String },

    #[error("truncated stream at byte offset {offset}: {message}")]
    Truncated { offset: u64, message: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate statistic: undefined on {failures} of {resamples} resamples")]
    DegenerateStatistic { failures: usize, resamples: usize },

    #[error("too few scored pairs: {scored} (need at least {required})")]
    TooFewPairs { scored: usize, required: usize },

    #[error("line count mismatch: {sentences} sentence lines vs {gold} gold lines")]
    LineCountMismatch { sentences: usize, gold: usize },

    #[error("manifest error: {0}")]
    Manifest(String),
}
