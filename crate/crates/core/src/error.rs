use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("point ({}, {}) is not in the domain", .0.re, .0.im)]
    PointNotInDomain(Point),
    #[error("duplicate puncture at ({}, {})", .0.re, .0.im)]
    DuplicatePuncture(Point),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point set is empty")]
    EmptySet,
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },
    #[error("parameter {0} lies on the branch cut [1, inf)")]
    BranchCut(num_complex::Complex64),
    #[error("value ({}, {}) is a puncture", .0.re, .0.im)]
    PunctureValue(Point),
    #[error("puncture pair is degenerate (a = b)")]
    DegeneratePair,
    #[error("domain is not simply connected")]
    NotSimplyConnected,
    #[error("domain is not hyperbolic")]
    NotHyperbolic,
    #[error("Newton iteration diverged: residual {residual:e} after {iterations} iterations")]
    NewtonDivergence { residual: f64, iterations: usize },
    #[error("grid too coarse: {0}")]
    ResolutionError(String),
    #[error("point ({}, {}) is outside the solved field", .0.re, .0.im)]
    OutOfField(Point),
    #[error("extraction radius {0} is not covered by the field")]
    RadiusOutOfField(f64),
    #[error("density is not positive at ({}, {})", .0.re, .0.im)]
    NegativeDensity(Point),
    #[error("fewer than two complement samples")]
    InsufficientComplementSamples,
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MetricError> = std::result::Result<T, E>;
