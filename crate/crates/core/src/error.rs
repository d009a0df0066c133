use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("polynomials live in incompatible variable spaces")]
    SpaceMismatch,
    #[error("total degree {0} exceeds the bound of 64")]
    DegreeBound(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("negative exponent")]
    NegativeExponent,
    #[error("exponent must be a non-negative integer")]
    NonIntegerExponent,
    #[error("division by zero")]
    ZeroDenominator,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    #[error("a corner variable space (x, y, q) is required")]
    NotCornerSpace,
    #[error("germs may not depend on parameters")]
    HasParameters,
    #[error("germ has a nonzero term of degree {0}; it must lie in the square of the maximal ideal")]
    LowOrderTerm(u32),
    #[error("the zero germ has no quasihomogeneous weights")]
    ZeroGerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("corner dimension r = {0} is not supported (expected 0, 1 or 2)")]
    UnsupportedCorner(usize),
    #[error("report did not match any catalog entry")]
    Unmatched,
    #[error("quadratic part is identically zero")]
    ZeroQuadratic,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausticError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("resolution must be at least 2")]
    InvalidResolution,
    #[error("caustic geometry is only computed for 2 or 3 parameters (got {0})")]
    UnsupportedDimension(usize),
    #[error("family is not affine in the parameters")]
    NotAffine,
    #[error("critical equations of stratum {0} are rank deficient in the parameters")]
    Degenerate(String),
    #[error("quasi-caustic needs two distinct strata")]
    SameStrata,
    #[error("stratum index out of range")]
    BadStratum,
    #[error(transparent)]
    Germ(#[from] GermError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("unknown tangency case `{0}`")]
    UnknownCase(String),
    #[error("modulus value {0} is outside the case's domain")]
    OutOfDomain(String),
    #[error("identity check failed: {0}")]
    IdentityFailed(String),
    #[error("subsystem is not finitely branched")]
    NotFinitelyBranched,
    #[error("unknown `{0}` is not part of the case")]
    UnknownUnknown(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Umbrella error for callers that mix modules (the CLI, mostly).
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Caustic(#[from] CausticError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
