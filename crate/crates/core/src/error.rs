use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported modulation order {0} (must be a power of two, at least 2)")]
    UnsupportedModulation(usize),

    #[error("PAPR is undefined for an all-zero frame")]
    UndefinedPapr,

    #[error("symbol {index} has magnitude {magnitude}, expected A or 2A with A = {amplitude}")]
    CorruptedState {
        index: usize,
        magnitude: f64,
        amplitude: f64,
    },

    #[error("exhaustive precoding is limited to MN <= {max}, got MN = {mn}")]
    InstanceTooLarge { mn: usize, max: usize },

    #[error("linear solve failed: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Parameter(format!(
            "{what} has length {got}, expected {expected}"
        )));
    }
    Ok(())
}
