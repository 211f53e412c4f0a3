use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParam { name: &'static str, detail: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("distribution not normalized (sum = {0})")]
    NonNormalized(f64),
    #[error("outcome arity mismatch ({0} vs {1})")]
    ArityMismatch(usize, usize),
    #[error("degenerate correlator: |E| = {0:e} below 1e-12")]
    DegenerateCorrelator(f64),
    #[error("correlator |E| = {value} not above {k}*eps = {bound}")]
    CorrelatorTooSmall { value: f64, k: f64, bound: f64 },
    #[error("total variation distance {tvd} exceeds eps = {eps}")]
    DistanceExceeded { tvd: f64, eps: f64 },
    #[error("distribution violates the parity condition (parity failure {0:e})")]
    NotPtc(f64),
    #[error("first-bit marginal admits no token model: {0}")]
    NoTokenModel(String),
    #[error("invalid linear program: {0}")]
    InvalidLp(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParam { name, detail: format!("{x} not in [0, 1]") })
    }
}
