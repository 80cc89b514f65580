//! Plot-ready evaluation of one density on a rectangular grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SuiteConfig;
use crate::barmetrics;
use crate::error::{MetricError, Result};
use crate::geometry::{DomainSpec, Point};
use crate::hurwitz;
use crate::liouville::{self, DensitySource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMetric {
    /// Distance to the boundary.
    Delta,
    Lambda,
    Eta,
    EtaBar,
    Kappa,
}

/// `nx × ny` nodes spanning `[x0, x1] × [y0, y1]`; nodes outside the domain
/// or closer than `exclusion` to its boundary are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    #[serde(default)]
    pub exclusion: f64,
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1, self.exclusion]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.nx == 0 || self.ny == 0 || self.exclusion < 0.0 {
            return Err(MetricError::InvalidArgument(
                "grid needs finite bounds, positive node counts and a non-negative exclusion".into(),
            ));
        }
        Ok(())
    }

    fn coordinate(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// Nodes row by row, `y` outermost.
    pub fn nodes(&self) -> Vec<Point> {
        (0..self.ny)
            .flat_map(|j| {
                (0..self.nx).map(move |i| {
                    Point::new(
                        Self::coordinate(self.x0, self.x1, self.nx, i),
                        Self::coordinate(self.y0, self.y1, self.ny, j),
                    )
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    /// Relative error bar; zero for closed forms.
    pub error: f64,
}

/// Evaluates `metric` at the admissible nodes of `grid`.
pub fn sweep(
    domain: &DomainSpec,
    grid: &GridSpec,
    metric: SweepMetric,
    config: &SuiteConfig,
) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    domain.validate()?;
    let points: Vec<Point> = grid
        .nodes()
        .into_iter()
        .filter(|z| {
            domain.contains(*z)
                && domain
                    .boundary_distance(*z)
                    .is_ok_and(|d| d >= grid.exclusion)
        })
        .collect();
    let field = match metric {
        SweepMetric::Lambda
            if points
                .iter()
                .any(|z| liouville::closed_form_density(domain, *z).is_none()) =>
        {
            Some(liouville::solve_density(domain, &config.solver)?)
        }
        _ => None,
    };
    let row = |z: Point, value: f64, error: f64| SweepRow {
        x: z.re,
        y: z.im,
        value,
        error: if error.is_finite() { error } else { 0.0 },
    };
    points
        .par_iter()
        .map(|&z| match metric {
            SweepMetric::Delta => Ok(row(z, domain.boundary_distance(z)?, 0.0)),
            SweepMetric::Lambda => match &field {
                Some(f) => Ok(row(z, f.density_at(z)?, f.estimated_discretization_error)),
                None => Ok(row(
                    z,
                    liouville::closed_form_density(domain, z).ok_or(MetricError::PointNotInDomain(z))?,
                    0.0,
                )),
            },
            SweepMetric::Eta => {
                let e = hurwitz::general(domain, z, &config.hurwitz)?;
                Ok(row(z, e.value, e.relative_error()))
            }
            SweepMetric::EtaBar => {
                let r = barmetrics::eta_bar(domain, z, &config.budget)?;
                Ok(row(z, r.value, r.relative_error))
            }
            SweepMetric::Kappa => {
                let r = barmetrics::kappa(domain, z, &config.budget)?;
                Ok(row(z, r.value, r.relative_error))
            }
        })
        .collect()
}
