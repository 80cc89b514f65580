//! Convergence probes: boundaries of `Ω ∖ {w_n}`, continuity of η and
//! lower semicontinuity of η̄ along sequences `w_n → w`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SuiteConfig;
use crate::barmetrics::{self, LscReport};
use crate::error::Result;
use crate::geometry::{self, ConvergenceReport, DomainSpec, Point};
use crate::hurwitz::{self, ContinuityReport};

fn default_tolerance() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeCase {
    pub name: String,
    pub domain: DomainSpec,
    pub w: Point,
    pub sequence: Vec<Point>,
    /// Bound on the final Hausdorff distance of the boundaries.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeCaseReport {
    pub name: String,
    /// `Ω ∖ {w_n}` against `Ω ∖ {w}`.
    pub boundary: Option<ConvergenceReport>,
    /// The Hausdorff distance equals `|w_n − w|` exactly wherever `w_n` is
    /// closer to `w` than both are to `∂Ω`, and never exceeds it.
    pub hausdorff_identity: bool,
    pub continuity: Option<ContinuityReport>,
    /// Absent for domains on which η̄ is undefined.
    pub lsc: Option<LscReport>,
    pub errors: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeReport {
    pub schema: String,
    pub cases: Vec<ConvergeCaseReport>,
    pub passed: bool,
}

fn geometric(w: Point, step: Point, n: i32) -> Vec<Point> {
    (0..n).map(|k| w + step * 0.5f64.powi(k)).collect()
}

/// Punctured plane (closed form), disk (closed form, boundary identity),
/// twice punctured plane and exterior of the disk (extraction), and a
/// constant sequence.
pub fn default_cases() -> Vec<ConvergeCase> {
    let p = |re, im| Point::new(re, im);
    let case = |name: &str, domain, w, sequence| ConvergeCase {
        name: name.to_string(),
        domain,
        w,
        sequence,
        tolerance: default_tolerance(),
    };
    vec![
        case(
            "punctured-plane",
            DomainSpec::punctured_plane(vec![p(0.0, 0.0)]),
            p(1.0, 0.0),
            (0..9).map(|k| p(1.0 + 0.5f64.powi(k), 0.0)).collect(),
        ),
        case(
            "unit-disk",
            DomainSpec::unit_disk(),
            p(0.0, 0.0),
            (0..8)
                .map(|k| Point::from_polar(0.2 * 0.5f64.powi(k), k as f64))
                .collect(),
        ),
        case(
            "twice-punctured-plane",
            DomainSpec::twice_punctured_standard(),
            p(-1.0, 0.0),
            geometric(p(-1.0, 0.0), p(0.0, 0.25), 7),
        ),
        case(
            "exterior-disk",
            DomainSpec::ExteriorDisk {
                center: p(0.0, 0.0),
                radius: 1.0,
            },
            p(2.0, 0.0),
            geometric(p(2.0, 0.0), p(0.5, 0.0), 8),
        ),
        case(
            "constant",
            DomainSpec::twice_punctured_standard(),
            p(0.5, 0.0),
            vec![p(0.5, 0.0); 3],
        ),
    ]
}

fn run_case(case: &ConvergeCase, config: &SuiteConfig) -> ConvergeCaseReport {
    let mut errors = Vec::new();
    let domain = &case.domain;
    let boundary = (|| -> Result<(ConvergenceReport, bool)> {
        let target = geometry::punctured(domain, case.w)?;
        let seq = case
            .sequence
            .iter()
            .map(|&p| geometry::punctured(domain, p))
            .collect::<Result<Vec<_>>>()?;
        let report = geometry::boundary_convergence_check(&seq, &target, case.tolerance);
        let delta_w = domain.boundary_distance(case.w)?;
        let mut identity = true;
        for (p, h) in case.sequence.iter().zip(&report.hausdorff) {
            let step = (p - case.w).norm();
            let close = step <= delta_w.min(domain.boundary_distance(*p)?);
            identity &= if close { *h == step } else { *h <= step };
        }
        Ok((report, identity))
    })();
    let (boundary, hausdorff_identity) = match boundary {
        Ok((r, id)) => (Some(r), id),
        Err(e) => {
            errors.push(format!("boundary: {e}"));
            (None, false)
        }
    };
    let continuity = hurwitz::continuity_probe(domain, case.w, &case.sequence, &config.hurwitz)
        .map_err(|e| errors.push(format!("continuity: {e}")))
        .ok();
    let lsc = if domain.is_hyperbolic() {
        barmetrics::lsc_probe(domain, case.w, &case.sequence, &config.budget)
            .map_err(|e| errors.push(format!("lsc: {e}")))
            .ok()
    } else {
        None
    };
    let passed = errors.is_empty()
        && boundary.as_ref().is_some_and(|b| b.converges)
        && hausdorff_identity
        && continuity.as_ref().is_some_and(|c| c.passed)
        && lsc.as_ref().map_or(true, |l| l.holds);
    ConvergeCaseReport {
        name: case.name.clone(),
        boundary,
        hausdorff_identity,
        continuity,
        lsc,
        errors,
        passed,
    }
}

/// Runs every case; cases are independent and run in parallel.
pub fn converge_suite(cases: &[ConvergeCase], config: &SuiteConfig) -> ConvergeReport {
    let cases: Vec<ConvergeCaseReport> = cases.par_iter().map(|c| run_case(c, config)).collect();
    ConvergeReport {
        schema: super::REPORT_SCHEMA.replace("verify", "converge"),
        passed: cases.iter().all(|c| c.passed),
        cases,
    }
}
