use thiserror::Error;

/// Validation failures for an electoral setting.
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("district sizes inconsistent with electorate: {0}")]
    SizeMismatch(String),
    #[error("vote shares disagree with vote totals: {0}")]
    ShareMismatch(String),
    #[error("non-positive or missing quantity: {0}")]
    NonPositive(String),
}

/// Failures while simulating or post-processing a run.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("tally violates a marginal constraint: {0}")]
    RowSumViolation(String),
    #[error("constrained sampler has no index with remaining quota: {0}")]
    Exhausted(String),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("no affinity column satisfied the constraint in {0} attempts")]
    PhiRejectionExceeded(usize),
    #[error("community {0} not present in trace")]
    UnknownCommunity(usize),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// Failures while setting up or running a calibration.
#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid calibration configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Failures in summary-statistic computation.
#[derive(Debug, Error)]
pub enum StatsError {
    #[error("tally violates a marginal constraint: {0}")]
    RowSumViolation(String),
    #[error("summary vectors have different dimensions: {0}")]
    DimensionMismatch(String),
}

/// Failures while reading or writing artifact files.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("duplicate (district, party) pair at {path}:{line}")]
    DuplicatePair { path: String, line: usize },
    #[error("no data rows in {0}")]
    EmptyFile(String),
    #[error("unsupported schema version {found} (supported: {supported})")]
    SchemaVersionMismatch { found: u32, supported: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
