//! Hyperbolic metrics of plane domains, Hurwitz densities and the
//! comparison metrics built from them.

pub mod barmetrics;
pub mod error;
pub mod geometry;
pub mod hurwitz;
pub mod liouville;
pub mod modular;
pub mod verify;

pub use error::{MetricError, Result};
pub use geometry::{pt, DomainSpec, Point};
