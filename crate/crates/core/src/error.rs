use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument left the domain of the operation (e.g. a curvature vector
    /// outside the positive cone, or a non-positive radius).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Tangent vectors of the embedding are numerically collinear.
    #[error("degenerate tangent frame at node {node}")]
    DegenerateFrame { node: usize },

    /// Some node left the positive cone, so F^{-p} is meaningless.
    #[error("convexity lost at t = {t}: kappa = {kappa:e} at node {node}")]
    ConvexityLost { t: f64, node: usize, kappa: f64 },

    #[error("stability failure at t = {t}: {reason}")]
    Stability { t: f64, reason: String },

    #[error("insufficient data: need {needed} usable records, found {found}")]
    InsufficientData { needed: usize, found: usize },

    /// An identity check has nothing to test on this state.
    #[error("vacuous check: {0}")]
    Vacuous(String),

    #[error("snapshot line {line}: {msg}")]
    Snapshot { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
