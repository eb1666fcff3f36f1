use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision too low: (m + 1) * eps = {0} must be below 1")]
    PrecisionTooLow(f64),
    #[error("cannot round non-finite value {0}")]
    NonFinite(f64),
    #[error("rounding of {0} overflows the carrier range")]
    Overflow(f64),
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dense eigensolver failed to converge")]
    EigenFailure,
    #[error("relaxation does not contract in energy: ||I - MA||_A = {0}")]
    NonContracting(f64),
    #[error("coarse solver deviation ||B_c - I_c||_Ac = {0} is not below 1")]
    CoarseDeviation(f64),
    #[error("precision unachievable: {0} significand bits required")]
    PrecisionUnachievable(u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("experiment [{config}] failed: {source}")]
    Experiment {
        config: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension(format!(
            "{what}: expected length {expected}, got {got}"
        )));
    }
    Ok(())
}
