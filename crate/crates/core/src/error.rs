use thiserror::Error;

/// Errors raised by the engine.
///
/// Verdicts that could not be certified are not errors; they are reported as
/// `Indeterminate` inside a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument outside the domain of an operation (zero divisor, nonzero
    /// constant term, singular linear part).
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched dimensions or truncation degrees, out-of-range indices.
    #[error("usage error: {0}")]
    Usage(String),
    /// Malformed textual or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Two germs of a family fail to commute up to the truncation degree.
    #[error("germs {first} and {second} do not commute: {detail}")]
    NotCommuting {
        first: usize,
        second: usize,
        detail: String,
    },
    /// A component is not divisible by its own coordinate.
    #[error("division failure: germ {germ}, component {component}, monomial {exponents:?}")]
    DivisionFailure {
        germ: usize,
        component: usize,
        exponents: Vec<u32>,
    },
    /// A complex family is not compatible with the antiholomorphic involution.
    #[error("rho-equivariance violated: germ {germ}, component {component}, monomial {exponents:?}")]
    RhoViolation {
        germ: usize,
        component: usize,
        exponents: Vec<u32>,
    },
    /// An invariant that exact arithmetic should guarantee was contradicted.
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
