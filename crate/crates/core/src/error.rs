use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("library must hold at least one file (got {0})")]
    EmptyLibrary(u32),
    #[error("cache size {cache} exceeds library size {files}")]
    CacheTooLarge { cache: u32, files: u32 },
    #[error("a file needs at least one fragment")]
    NoFragments,
    #[error(
        "cache of {cache} files does not split into whole fragments ({fragments} fragments per file, {files} files)"
    )]
    FractionalFragments { cache: u32, fragments: u32, files: u32 },
    #[error("zipf exponent must be finite and positive (got {0})")]
    InvalidZipf(f64),
    #[error("closed form needs uniform popularity and n_F = N; use Monte Carlo")]
    AnalyticUnavailable,
    #[error("enumeration of {states} states exceeds budget of {budget}")]
    BudgetExceeded { states: u128, budget: u64 },
    #[error("placement does not match scenario: {0}")]
    PlacementMismatch(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
