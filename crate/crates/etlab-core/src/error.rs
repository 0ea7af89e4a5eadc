use thiserror::Error;

/// Errors surfaced by the core engine.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("jet shape mismatch in {context}: ({lhs_vars} vars, order {lhs_order}) vs ({rhs_vars} vars, order {rhs_order})")]
    ShapeMismatch {
        lhs_vars: usize,
        lhs_order: usize,
        rhs_vars: usize,
        rhs_order: usize,
        context: &'static str,
    },

    /// The configured jet depth cannot supply the requested derivative.
    #[error("jet order exhausted in {context}: requires order >= {required}, configured order is {available}")]
    OrderExhausted {
        required: usize,
        available: usize,
        context: String,
    },

    #[error("domain violation in `{node}`: {detail}")]
    DomainViolation { node: String, detail: String },

    #[error("metric not invertible at point {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("metric not positive-definite at point {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("unsupported dimension {dim} for {context}")]
    UnsupportedDimension { dim: usize, context: &'static str },

    #[error("potential too close to zero at {point:?}: |f| = {value:.3e} <= {guard:.1e}")]
    NearZeroPotential {
        value: f64,
        guard: f64,
        point: Vec<f64>,
    },

    #[error("critical point of the potential at {point:?}: |grad f| = {value:.3e}")]
    CriticalPoint { value: f64, point: Vec<f64> },

    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("point {point:?} is outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system in {context}")]
    SingularSystem { context: &'static str },

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
