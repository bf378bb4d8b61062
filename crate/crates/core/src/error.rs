use thiserror::Error;

/// Errors raised by the series engine and the checks built on top of it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("exponent denominator {0} out of range (expected 1..=4)")]
    BadScale(u32),

    #[error("series scales differ: D={left} vs D={right}")]
    ScaleMismatch { left: u32, right: u32 },

    #[error("exponent {exp} is not representable with denominator D={scale}")]
    NotRepresentable { exp: String, scale: u32 },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("negate_base needs integer exponents, found q^({num}/{den})")]
    NonIntegerExponent { num: i64, den: i64 },

    #[error("comparison order {requested} exceeds the known order {available}")]
    OrderTooHigh { requested: i64, available: i64 },

    #[error("not formally evaluable: {0}")]
    NotEvaluable(String),

    #[error("step {label} is excluded: {reason}")]
    Excluded { label: String, reason: String },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors meaning "this instance lies outside the formal model",
    /// as opposed to programming or usage errors.
    pub fn is_evaluability(&self) -> bool {
        matches!(
            self,
            Error::NotEvaluable(_) | Error::DivisionByZero(_) | Error::Excluded { .. }
        )
    }
}
