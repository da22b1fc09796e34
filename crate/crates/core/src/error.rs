use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("parse error at token {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("singular coframe at {0:?}")]
    SingularCoframe(Vec<f64>),
    #[error("non-metricity components are not symmetric")]
    AsymmetricNonMetricity,
    #[error("trace condition F^a_a = 0 violated (max component {0:e})")]
    TraceViolation(f64),
    #[error("dimension {0} is too low for this operation")]
    DimensionTooLow(usize),
    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),
    #[error("proportionality between Q and T vanishes")]
    ZeroLambda,
    #[error("conformal pole: 1 + alpha psi^2 = 0")]
    ConformalPole,
    #[error("model is not of Proca type: {0}")]
    NotProcaType(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("operation requires dimension 4, got {0}")]
    DimensionNotFour(usize),
    #[error("constraint violated: {equation} (residual {residual:e})")]
    ConstraintViolation { equation: String, residual: f64 },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("curve left the chart domain at parameter {param}: {reason}")]
    LeftDomain { param: f64, reason: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl GeomError {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        GeomError::Domain { op, detail: detail.into() }
    }
}
