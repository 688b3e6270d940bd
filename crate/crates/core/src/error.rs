use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fractional order must lie in (0, 4], got {0}")]
    InvalidAlpha(f64),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("argument {0} outside the supported domain")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("series error estimate {estimate:e} exceeds {limit:e}")]
    Accuracy { estimate: f64, limit: f64 },
    #[error("sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("no convergence after {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("instability: {0}")]
    Instability(String),
    #[error("energy estimators disagree: rayleigh {rayleigh}, decay {decay}")]
    EstimatorMismatch { rayleigh: f64, decay: f64 },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("grid has {n} points, dense oracle limit is {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("no classically forbidden region")]
    NoForbiddenRegion,
    #[error("states are orthogonal; cannot align sign")]
    ZeroOverlap,
    #[error("states are not orthogonal (overlap {0:e})")]
    NonOrthogonal(f64),
    #[error("mode {mode} violates the Nyquist limit of a {n}-point grid")]
    Nyquist { mode: usize, n: usize },
    #[error("norm drift {0:e} during real-time propagation")]
    NormDrift(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("state {index}: {source}")]
    State {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidAlpha(_) => "invalid_alpha",
            Error::NonFinite(_) => "non_finite",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Domain(_) => "domain",
            Error::Overflow(_) => "overflow",
            Error::Accuracy { .. } => "accuracy",
            Error::AtSample { .. } => "at_sample",
            Error::InvalidScheme(_) => "invalid_scheme",
            Error::Degenerate(_) => "degenerate",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Instability(_) => "instability",
            Error::EstimatorMismatch { .. } => "estimator_mismatch",
            Error::NotNormalized(_) => "not_normalized",
            Error::SizeGuard { .. } => "size_guard",
            Error::NoForbiddenRegion => "no_forbidden_region",
            Error::ZeroOverlap => "zero_overlap",
            Error::NonOrthogonal(_) => "non_orthogonal",
            Error::Nyquist { .. } => "nyquist",
            Error::NormDrift(_) => "norm_drift",
            Error::Config(_) => "config",
            Error::State { .. } => "state",
            Error::Io(_) => "io",
        }
    }

    /// Whether the error comes from the inputs rather than the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidGrid(_)
            | Error::InvalidAlpha(_)
            | Error::LengthMismatch { .. }
            | Error::InvalidScheme(_)
            | Error::SizeGuard { .. }
            | Error::Nyquist { .. }
            | Error::Config(_)
            | Error::Io(_) => true,
            Error::State { source, .. } | Error::AtSample { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert!(Error::Config("x".into()).is_config());
        assert!(!Error::ZeroOverlap.is_config());
        let nested = Error::State {
            index: 2,
            source: Box::new(Error::InvalidAlpha(0.0)),
        };
        assert!(nested.is_config());
        assert_eq!(nested.kind(), "state");
        assert!(nested.to_string().starts_with("state 2: "));
    }
}
