//! Planar domains: membership, boundary distance, boundary sampling,
//! Hausdorff distance and convergence of domains in boundary.

mod domain;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

pub use domain::{pt, BoundaryComponent, DomainSpec, Point};
pub(crate) use domain::edges;

use crate::error::{MetricError, Result};

/// Half-width of the window used to sample an unbounded boundary line.
pub const LINE_SAMPLE_HALF_WIDTH: f64 = 10.0;

/// Finite sample of a domain boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub points: Vec<Point>,
    /// Boundary component id of each point, indexing
    /// [`DomainSpec::boundary_components`].
    pub component: Vec<usize>,
}

pub fn contains(domain: &DomainSpec, w: Point) -> bool {
    domain.contains(w)
}

pub fn boundary_distance(domain: &DomainSpec, w: Point) -> Result<f64> {
    domain.boundary_distance(w)
}

pub fn nearest_boundary_point(domain: &DomainSpec, w: Point) -> Result<Point> {
    domain.nearest_boundary_point(w)
}

fn sample_component(c: &BoundaryComponent, m: usize) -> Vec<Point> {
    match c {
        BoundaryComponent::Puncture(p) => vec![*p],
        BoundaryComponent::Circle { center, radius } => (0..m)
            .map(|k| center + Point::from_polar(*radius, TAU * k as f64 / m as f64))
            .collect(),
        BoundaryComponent::Line {
            normal_angle,
            offset,
        } => {
            let n = Point::from_polar(1.0, *normal_angle);
            let foot = n * offset;
            let t = n * Point::new(0.0, 1.0);
            if m == 1 {
                return vec![foot];
            }
            (0..m)
                .map(|k| {
                    let s = -LINE_SAMPLE_HALF_WIDTH
                        + 2.0 * LINE_SAMPLE_HALF_WIDTH * k as f64 / (m - 1) as f64;
                    foot + t * s
                })
                .collect()
        }
        BoundaryComponent::Polygon { vertices } => {
            let lens: Vec<f64> = edges(vertices).map(|(a, b)| (b - a).norm()).collect();
            let perimeter: f64 = lens.iter().sum();
            let mut out = Vec::with_capacity(m);
            let mut edge = 0;
            let mut start = 0.0;
            for k in 0..m {
                let s = perimeter * k as f64 / m as f64;
                while edge + 1 < lens.len() && s >= start + lens[edge] {
                    start += lens[edge];
                    edge += 1;
                }
                let a = vertices[edge];
                let b = vertices[(edge + 1) % vertices.len()];
                let t = ((s - start) / lens[edge]).clamp(0.0, 1.0);
                out.push(a + (b - a) * t);
            }
            out
        }
    }
}

/// Quasi-uniform arclength sample with `n` points in total. Punctures take
/// one point each; the rest is split evenly between continuum components.
pub fn boundary_sample(domain: &DomainSpec, n: usize) -> Result<BoundarySample> {
    let comps = domain.boundary_components();
    if n < comps.len() {
        return Err(MetricError::InvalidArgument(format!(
            "{n} samples cannot cover {} boundary components",
            comps.len()
        )));
    }
    let n_punct = comps.iter().filter(|c| c.is_puncture()).count();
    let n_cont = comps.len() - n_punct;
    let rest = n - n_punct;
    let mut points = Vec::with_capacity(n);
    let mut component = Vec::with_capacity(n);
    let mut cont_seen = 0;
    for (id, c) in comps.iter().enumerate() {
        let m = if c.is_puncture() {
            1
        } else {
            let m = rest / n_cont + usize::from(cont_seen < rest % n_cont);
            cont_seen += 1;
            m
        };
        for p in sample_component(c, m) {
            points.push(p);
            component.push(id);
        }
    }
    Ok(BoundarySample { points, component })
}

/// Hausdorff distance between finite point sets,
/// `max(sup_x d(x, Y), sup_y d(y, X))`.
pub fn hausdorff(x: &[Point], y: &[Point]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let directed = |a: &[Point], b: &[Point]| {
        a.iter()
            .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(x, y).max(directed(y, x)))
}

/// `domain \ {w}`. Punctured planes and already punctured domains get the
/// new point appended to their puncture list.
pub fn punctured(domain: &DomainSpec, w: Point) -> Result<DomainSpec> {
    if domain.punctures().contains(&w) {
        return Err(MetricError::DuplicatePuncture(w));
    }
    if !domain.contains(w) {
        return Err(MetricError::PointNotInDomain(w));
    }
    Ok(match domain {
        DomainSpec::PuncturedPlane { punctures } => {
            let mut p = punctures.clone();
            p.push(w);
            DomainSpec::PuncturedPlane { punctures: p }
        }
        DomainSpec::WithPunctures { base, punctures } => {
            let mut p = punctures.clone();
            p.push(w);
            DomainSpec::WithPunctures {
                base: base.clone(),
                punctures: p,
            }
        }
        other => DomainSpec::WithPunctures {
            base: Box::new(other.clone()),
            punctures: vec![w],
        },
    })
}

/// Number of samples per continuum component used for boundary comparisons.
pub const CONVERGENCE_SAMPLES: usize = 256;

/// Boundary sample with [`CONVERGENCE_SAMPLES`] points on every continuum
/// component and one point per puncture.
pub fn comparison_sample(domain: &DomainSpec) -> Vec<Point> {
    let comps = domain.boundary_components();
    let mut out = Vec::new();
    for c in &comps {
        let m = if c.is_puncture() { 1 } else { CONVERGENCE_SAMPLES };
        out.extend(sample_component(c, m));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `H(boundary of target, boundary of domain_n)` for each n.
    pub hausdorff: Vec<f64>,
    pub non_increasing: bool,
    pub below_tolerance: bool,
    pub witness: Option<Point>,
    /// First index from which the witness lies in every domain of the sequence.
    pub witness_from: Option<usize>,
    pub converges: bool,
    pub failures: Vec<String>,
}

/// Checks the two clauses of convergence in boundary on a finite sequence:
/// Hausdorff distance of the sampled boundaries falling below `tolerance`,
/// and a common interior witness point for the tail of the sequence.
pub fn boundary_convergence_check(
    sequence: &[DomainSpec],
    target: &DomainSpec,
    tolerance: f64,
) -> ConvergenceReport {
    let mut failures = Vec::new();
    if sequence.is_empty() {
        failures.push("empty sequence".to_string());
        return ConvergenceReport {
            hausdorff: vec![],
            non_increasing: false,
            below_tolerance: false,
            witness: None,
            witness_from: None,
            converges: false,
            failures,
        };
    }
    let target_sample = comparison_sample(target);
    let hd: Vec<f64> = sequence
        .iter()
        .map(|d| hausdorff(&target_sample, &comparison_sample(d)).unwrap_or(f64::INFINITY))
        .collect();
    let non_increasing = hd.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
    let below_tolerance = hd.last().is_some_and(|h| *h <= tolerance);
    if !non_increasing {
        failures.push("Hausdorff distances are not non-increasing".to_string());
    }
    if !below_tolerance {
        failures.push(format!(
            "final Hausdorff distance {:e} exceeds tolerance {tolerance:e}",
            hd.last().copied().unwrap_or(f64::NAN)
        ));
    }
    // the tail must be a proper tail: the witness has to work from the middle on
    let tail_start = sequence.len() / 2;
    let mut witness = None;
    let mut witness_from = None;
    for cand in target.interior_candidates() {
        let first_bad = sequence.iter().rposition(|d| !d.contains(cand));
        let from = first_bad.map_or(0, |k| k + 1);
        if from <= tail_start {
            witness = Some(cand);
            witness_from = Some(from);
            break;
        }
    }
    if witness.is_none() {
        failures.push("no common interior witness point found".to_string());
    }
    ConvergenceReport {
        hausdorff: hd,
        non_increasing,
        below_tolerance,
        converges: non_increasing && below_tolerance && witness.is_some(),
        witness,
        witness_from,
        failures,
    }
}
