use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("symbol must be scalar (N = 1), got N = {0}")]
    NotScalar(usize),
    #[error("phase-space point has zero covector")]
    ZeroCovector,
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("NoDecomposition: {0}")]
    NoDecomposition(String),
    #[error("ComplexSymbol: q = {re} + {im}i is not real at the point")]
    ComplexSymbol { re: f64, im: f64 },
    #[error("ZeroSpatialPart: spatial part of the covector vanishes")]
    ZeroSpatialPart,
    #[error("NonNullStart: |q(x0,k0)| = {value:e} exceeds tolerance {tol:e}")]
    NonNullStart { value: f64, tol: f64 },
    #[error("StepFailure: adaptive step underflow at tau = {tau}")]
    StepFailure { tau: f64 },
    #[error("ConstraintDrift: |q| = {value:e} at tau = {tau} exceeds drift limit")]
    ConstraintDrift { tau: f64, value: f64 },
    #[error("invalid integration parameters: {0}")]
    InvalidStep(String),
    #[error("TooFewSamples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("non-uniform tau spacing at sample {0}")]
    NonUniformSpacing(usize),
    #[error("KernelEscape: fiber residual {residual:e} at tau = {tau} exceeds {limit:e}")]
    KernelEscape { tau: f64, residual: f64, limit: f64 },
    #[error("NullSpatialPart: covector has no spatial direction")]
    NullSpatialPart,
    #[error("covector is not null: k^2 = {0:e}")]
    NotNull(f64),
    #[error("ZeroFrequency: k0 vanishes")]
    ZeroFrequency,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("WindowOutOfBounds: {0}")]
    WindowOutOfBounds(String),
    #[error("DegenerateField: slice {0} carries no energy")]
    DegenerateField(usize),
    #[error("EmptyOrbit")]
    EmptyOrbit,
    #[error("ParseError at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// Failures raised by the numerical machinery itself rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonNullStart { .. }
                | Error::StepFailure { .. }
                | Error::ConstraintDrift { .. }
                | Error::KernelEscape { .. }
                | Error::DegenerateField(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
