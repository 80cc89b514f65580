//! Hurwitz densities `η_Ω = 2/r_Ω`.
//!
//! Closed forms cover simply connected domains (where `η = λ`) and once
//! punctured planes (`η = 1/(8|w − p|)`). Everything else goes through the
//! cusp asymptotics of the hyperbolic density of `Ω ∖ {w}`:
//!
//! ```text
//! |z − w| · log(2 / (η_Ω(w) |z − w|)) · λ_{Ω∖{w}}(z) → 1   as z → w,
//! ```
//!
//! so `E(r) = mean_θ 1/(r λ(w + r e^{iθ})) + log r` tends to `log(2/η)`
//! with an `O(r)` error. The circle means are extrapolated to `r = 0` with a
//! least-squares line.

mod table;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::geometry::{self, DomainSpec, Point};
use crate::liouville::{self, DensityField, DensitySource, SolverConfig};
use crate::modular;

pub use table::{table_tau, Eta01Table, TableNode, INTERPOLATION_ERROR};

/// Number of angles in each circle mean.
pub const EXTRACTION_ANGLES: usize = 32;

/// Default extraction radii as fractions of the distance from `w` to the
/// boundary of the unpunctured domain.
pub const RADIUS_FACTORS: [f64; 3] = [0.02, 0.01, 0.005];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    ClosedForm,
    Extraction,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurwitzEstimate {
    pub value: f64,
    /// Extraction radii, strictly decreasing; empty for closed forms.
    pub radii: Vec<f64>,
    /// Largest deviation of the circle means from the fitted line. This is
    /// a relative error bar on `value`.
    pub extrapolation_error: f64,
    /// Relative change of `value` under halving the resolution, divided by
    /// three; zero for closed forms and `NaN` when not estimated.
    pub discretization_error: f64,
    pub source: EstimateSource,
}

impl HurwitzEstimate {
    fn closed_form(value: f64) -> Self {
        HurwitzEstimate {
            value,
            radii: Vec::new(),
            extrapolation_error: 0.0,
            discretization_error: 0.0,
            source: EstimateSource::ClosedForm,
        }
    }

    /// Combined relative error bar, treating a missing discretization
    /// estimate as zero.
    pub fn relative_error(&self) -> f64 {
        let d = if self.discretization_error.is_finite() {
            self.discretization_error
        } else {
            0.0
        };
        self.extrapolation_error + d
    }

    /// The same density after the change of variable `z ↦ αz + β`, which
    /// divides densities by `|α|`.
    fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self
    }
}

/// Solver settings for extraction solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HurwitzConfig {
    /// Settings of the log-polar solve on `Ω ∖ {w}`.
    pub solver: SolverConfig,
    /// Extraction radii as fractions of the boundary distance of `w`.
    pub radius_factors: Vec<f64>,
    /// Repeat each extraction at half resolution to estimate its error.
    pub estimate_error: bool,
}

impl Default for HurwitzConfig {
    fn default() -> Self {
        HurwitzConfig {
            solver: SolverConfig {
                theta_nodes: 128,
                inner_radius_factor: 1e-3,
                outer_radius_factor: 1e2,
                estimate_error: false,
                ..SolverConfig::default()
            },
            radius_factors: RADIUS_FACTORS.to_vec(),
            estimate_error: true,
        }
    }
}

/// `η_Ω(w) = λ_Ω(w)` on simply connected domains. Disks and half-planes
/// use the closed form; polygons solve for λ.
pub fn simply_connected(
    domain: &DomainSpec,
    w: Point,
    config: &SolverConfig,
) -> Result<HurwitzEstimate> {
    if !domain.is_simply_connected() {
        return Err(MetricError::NotSimplyConnected);
    }
    if !domain.contains(w) {
        return Err(MetricError::PointNotInDomain(w));
    }
    if let Some(v) = closed_form_lambda(domain, w) {
        return Ok(HurwitzEstimate::closed_form(v));
    }
    let field = liouville::solve_density(domain, config)?;
    from_simply_connected_field(&field, w)
}

/// `η = λ` read off an already solved field of a simply connected domain.
pub fn from_simply_connected_field(field: &DensityField, w: Point) -> Result<HurwitzEstimate> {
    if !field.domain.is_simply_connected() {
        return Err(MetricError::NotSimplyConnected);
    }
    let value = field.density_at(w)?;
    Ok(HurwitzEstimate {
        value,
        radii: Vec::new(),
        extrapolation_error: 0.0,
        discretization_error: field.estimated_discretization_error,
        source: EstimateSource::ClosedForm,
    })
}

fn closed_form_lambda(domain: &DomainSpec, w: Point) -> Option<f64> {
    match domain {
        DomainSpec::Disk { center, radius } => {
            let r2 = (w - center).norm_sqr() / (radius * radius);
            Some(2.0 / (radius * (1.0 - r2)))
        }
        DomainSpec::HalfPlane { .. } => Some(1.0 / domain.boundary_distance(w).ok()?),
        _ => None,
    }
}

/// `η_{ℂ∖{p}}(w) = 1/(8|w − p|)`.
pub fn punctured_plane(p: Point, w: Point) -> Result<HurwitzEstimate> {
    if w == p {
        return Err(MetricError::PunctureValue(w));
    }
    Ok(HurwitzEstimate::closed_form(1.0 / (8.0 * (w - p).norm())))
}

/// Extracts `η_Ω(w)` from the hyperbolic density of `Ω ∖ {w}` using circle
/// means at the given radii.
pub fn extract(
    lambda: &impl DensitySource,
    w: Point,
    radii: &[f64],
) -> Result<HurwitzEstimate> {
    if radii.len() < 2 {
        return Err(MetricError::InvalidArgument(
            "extraction needs at least two radii".into(),
        ));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|p| p[1] >= p[0]) {
        return Err(MetricError::InvalidArgument(
            "extraction radii must be positive and strictly decreasing".into(),
        ));
    }
    let means = radii
        .iter()
        .map(|&r| circle_mean(lambda, w, r))
        .collect::<Result<Vec<_>>>()?;
    let (intercept, slope) = fit_line(radii, &means);
    let extrapolation_error = radii
        .iter()
        .zip(&means)
        .map(|(r, e)| (e - intercept - slope * r).abs())
        .fold(0.0, f64::max);
    Ok(HurwitzEstimate {
        value: 2.0 * (-intercept).exp(),
        radii: radii.to_vec(),
        extrapolation_error,
        discretization_error: f64::NAN,
        source: EstimateSource::Extraction,
    })
}

/// `E(r) = mean_θ 1/(r λ(w + r e^{iθ})) + log r`.
fn circle_mean(lambda: &impl DensitySource, w: Point, r: f64) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..EXTRACTION_ANGLES {
        let z = w + Point::from_polar(r, TAU * k as f64 / EXTRACTION_ANGLES as f64);
        let l = match lambda.density_at(z) {
            Ok(l) => l,
            Err(MetricError::OutOfField(_)) => return Err(MetricError::RadiusOutOfField(r)),
            Err(e) => return Err(e),
        };
        if !(l > 0.0) || !l.is_finite() {
            return Err(MetricError::NegativeDensity(z));
        }
        sum += 1.0 / (r * l);
    }
    Ok(sum / EXTRACTION_ANGLES as f64 + r.ln())
}

/// Least-squares line `y ≈ a + b x`, returned as `(a, b)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Default radii for extraction at `w` in `domain`.
pub fn default_radii(domain: &DomainSpec, w: Point, factors: &[f64]) -> Result<Vec<f64>> {
    let delta = domain.boundary_distance(w)?;
    Ok(factors.iter().map(|f| f * delta).collect())
}

/// Times the angular resolution may grow by [`RESOLUTION_STEP`] when the
/// configured one cannot resolve the other punctures.
pub const MAX_RESOLUTION_STEPS: usize = 3;

/// Growth factor of the angular resolution per step.
pub const RESOLUTION_STEP: f64 = 1.5;

/// `config` with the angular node counts scaled by `factor`, kept even.
fn scaled_resolution(config: &SolverConfig, factor: f64) -> SolverConfig {
    let even = |n: usize| (((n as f64 * factor) / 2.0).round() as usize * 2).max(16);
    SolverConfig {
        theta_nodes: even(config.theta_nodes),
        patch_theta_nodes: even(config.patch_theta_nodes),
        estimate_error: false,
        ..config.clone()
    }
}

/// Solves for λ on `Ω ∖ {w}` in a log-polar chart centered at `w` and
/// extracts `η_Ω(w)`. The angular resolution is raised as far as needed to
/// resolve the other punctures. The error estimate compares with the
/// coarsest companion resolution (half, two thirds, or double) that still
/// resolves them.
pub fn extract_by_solving(
    domain: &DomainSpec,
    w: Point,
    config: &HurwitzConfig,
) -> Result<HurwitzEstimate> {
    let punctured = geometry::punctured(domain, w)?;
    let radii = default_radii(domain, w, &config.radius_factors)?;
    let solve = |cfg: &SolverConfig| -> Result<HurwitzEstimate> {
        let field = liouville::solve_log_polar(&punctured, w, cfg)?;
        extract(&field, w, &radii)
    };
    let mut solver = scaled_resolution(&config.solver, 1.0);
    let mut steps = 0;
    let mut est = loop {
        match solve(&solver) {
            Err(MetricError::ResolutionError(_)) if steps < MAX_RESOLUTION_STEPS => {
                solver = scaled_resolution(&solver, RESOLUTION_STEP);
                steps += 1;
            }
            other => break other?,
        }
    };
    if config.estimate_error {
        // second-order discretization: a companion at spacing ratio r is off
        // by r² times as much
        for ratio in [2.0, RESOLUTION_STEP] {
            match solve(&scaled_resolution(&solver, 1.0 / ratio)) {
                Ok(coarse) => {
                    est.discretization_error = (coarse.value / est.value - 1.0).abs() / (ratio * ratio - 1.0);
                    return Ok(est);
                }
                Err(MetricError::ResolutionError(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        let mut fine = solve(&scaled_resolution(&solver, 2.0))?;
        fine.discretization_error = (est.value / fine.value - 1.0).abs() / 3.0;
        est = fine;
    }
    Ok(est)
}

/// Largest ratio of `|q − w|` to the distance from `q` to the nearest other
/// puncture. The log-polar chart at `w` resolves a puncture `q` with spacing
/// proportional to `|q − w|`, so the angular resolution an extraction needs
/// grows with this ratio.
fn chart_spread(punctures: &[Point], w: Point) -> f64 {
    punctures
        .iter()
        .map(|q| {
            let clear = punctures
                .iter()
                .filter(|r| *r != q)
                .map(|r| (r - q).norm())
                .fold(f64::INFINITY, f64::min);
            (q - w).norm() / clear
        })
        .fold(0.0, f64::max)
}

/// `η_{ℂ∖P}(w)` for three or more punctures. Among the plane itself and its
/// inversions `z ↦ 1/(z − p)` about each puncture `p` (which map `ℂ∖P` onto
/// the plane punctured at `0` and the `1/(q − p)`), extraction runs in the
/// one that spreads the punctures least around `w`; conformal naturality
/// gives `η(w) = η'(T(w)) |T'(w)|`.
fn many_punctures(punctures: &[Point], w: Point, config: &HurwitzConfig) -> Result<HurwitzEstimate> {
    let one = Point::new(1.0, 0.0);
    let inverted = |p: Point| -> (Vec<Point>, Point, f64) {
        let mut image: Vec<Point> = punctures.iter().filter(|q| **q != p).map(|q| one / (q - p)).collect();
        image.push(Point::new(0.0, 0.0));
        (image, one / (w - p), 1.0 / (w - p).norm_sqr())
    };
    let (image, v, factor) = std::iter::once((punctures.to_vec(), w, 1.0))
        .chain(punctures.iter().map(|p| inverted(*p)))
        .min_by(|a, b| chart_spread(&a.0, a.1).total_cmp(&chart_spread(&b.0, b.1)))
        .expect("at least one chart");
    let est = extract_by_solving(&DomainSpec::punctured_plane(image), v, config)?;
    Ok(est.scaled(factor))
}

/// `η_{ℂ∖{a,b}}(w)` by reduction to `ℂ∖{0,1}` and extraction.
pub fn two_punctures(a: Point, b: Point, w: Point, config: &HurwitzConfig) -> Result<HurwitzEstimate> {
    if a == b {
        return Err(MetricError::DegeneratePair);
    }
    if w == a || w == b {
        return Err(MetricError::PunctureValue(w));
    }
    let scale = b - a;
    let (v, factor) = anharmonic_normal_form((w - a) / scale);
    let est = extract_by_solving(&DomainSpec::twice_punctured_standard(), v, config)?;
    Ok(est.scaled(factor / scale.norm()))
}

/// The image `g(v)` nearest to `1/2` under the six automorphisms of
/// `ℂ∖{0,1}` permuting `{0, 1, ∞}`, with `|g'(v)|`, so that
/// `η(v) = η(g(v)) |g'(v)|`. Near `1/2` both punctures are at comparable
/// distances, which suits the log-polar solve.
fn anharmonic_normal_form(v: Point) -> (Point, f64) {
    let one = Point::new(1.0, 0.0);
    let (n0, n1) = (v.norm_sqr(), (v - one).norm_sqr());
    let images = [
        (v, 1.0),
        (one - v, 1.0),
        (v.inv(), 1.0 / n0),
        ((one - v).inv(), 1.0 / n1),
        (v / (v - one), 1.0 / n1),
        (one - v.inv(), 1.0 / n0),
    ];
    images
        .into_iter()
        .fold(images[0], |best, c| {
            if (c.0 - 0.5).norm() < (best.0 - 0.5).norm() {
                c
            } else {
                best
            }
        })
}

/// `η_Ω(w)` for any hyperbolic domain or once punctured plane, preferring
/// closed forms.
pub fn general(domain: &DomainSpec, w: Point, config: &HurwitzConfig) -> Result<HurwitzEstimate> {
    domain.validate()?;
    if !domain.contains(w) {
        return Err(MetricError::PointNotInDomain(w));
    }
    if let DomainSpec::PuncturedPlane { punctures } = domain {
        match punctures.as_slice() {
            [p] => return punctured_plane(*p, w),
            [a, b] => return two_punctures(*a, *b, w, config),
            _ => return many_punctures(punctures, w, config),
        }
    }
    if !domain.is_hyperbolic() {
        return Err(MetricError::NotHyperbolic);
    }
    if domain.is_simply_connected() {
        return simply_connected(domain, w, &config.solver);
    }
    extract_by_solving(domain, w, config)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub point: Point,
    pub value: f64,
    pub error: f64,
    /// `|η(w_n) − η(w)| / η(w)`.
    pub deviation: f64,
    /// Hausdorff distance between `∂Ω ∪ {w_n}` and `∂Ω ∪ {w}`, which
    /// equals `|w_n − w|` for `w` in the domain.
    pub hausdorff: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub limit_point: Point,
    pub limit_value: f64,
    pub limit_error: f64,
    pub rows: Vec<ContinuityRow>,
    /// Relative deviation allowed at the tail.
    pub tolerance: f64,
    /// Deviation of the last row is below `tolerance`.
    pub tail_converges: bool,
    /// Deviations never increase by more than the combined error bars.
    pub deviations_shrink: bool,
    /// Every Hausdorff distance matches `|w_n − w|`.
    pub hausdorff_identity: bool,
    pub passed: bool,
}

/// Tail tolerance of the continuity probe, relative to `η(w)`.
pub const CONTINUITY_TOLERANCE: f64 = 1e-2;

/// Evaluates `η_Ω` along `w_n → w` and checks that the values settle.
pub fn continuity_probe(
    domain: &DomainSpec,
    w: Point,
    sequence: &[Point],
    config: &HurwitzConfig,
) -> Result<ContinuityReport> {
    if let Some(bad) = std::iter::once(&w).chain(sequence).find(|p| !domain.contains(**p)) {
        return Err(MetricError::PointNotInDomain(*bad));
    }
    let limit = general(domain, w, config)?;
    let boundary = geometry::comparison_sample(domain);
    let with_point = |p: Point| {
        let mut s = boundary.clone();
        s.push(p);
        s
    };
    let base = with_point(w);
    let rows = sequence
        .iter()
        .map(|&p| {
            let est = if p == w { limit.clone() } else { general(domain, p, config)? };
            let hausdorff = geometry::hausdorff(&with_point(p), &base)?;
            Ok(ContinuityRow {
                point: p,
                value: est.value,
                error: est.relative_error(),
                deviation: (est.value / limit.value - 1.0).abs(),
                hausdorff,
                step: (p - w).norm(),
            })
        })
        .collect::<Result<Vec<ContinuityRow>>>()?;
    let limit_error = limit.relative_error();
    let deviations_shrink = rows
        .windows(2)
        .all(|p| p[1].deviation <= p[0].deviation + p[0].error + p[1].error + 2.0 * limit_error);
    let tail_converges = rows
        .last()
        .map_or(true, |r| r.deviation < CONTINUITY_TOLERANCE);
    let delta_w = domain.boundary_distance(w)?;
    let hausdorff_identity = rows.iter().all(|r| {
        // exact whenever w_n is closer to w than either is to the boundary
        let close = domain
            .boundary_distance(r.point)
            .map_or(false, |d| r.step <= d.min(delta_w));
        if close {
            r.hausdorff == r.step
        } else {
            r.hausdorff <= r.step
        }
    });
    Ok(ContinuityReport {
        limit_point: w,
        limit_value: limit.value,
        limit_error,
        passed: tail_converges && deviations_shrink && hausdorff_identity,
        rows,
        tolerance: CONTINUITY_TOLERANCE,
        tail_converges,
        deviations_shrink,
        hausdorff_identity,
    })
}

/// The closed-form `λ_{ℂ∖{0,1}}` as a density source. Extracting at 1
/// yields `η_{ℂ∖{0}}(1)` without solving any PDE.
pub fn c01_source() -> impl DensitySource {
    |z: Point| modular::density_c01(z).map(|d| d.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn closed_forms() {
        let d = DomainSpec::unit_disk();
        let cfg = SolverConfig::default();
        assert_eq!(simply_connected(&d, pt(0.0, 0.0), &cfg).unwrap().value, 2.0);
        let small = DomainSpec::disk(pt(1.0, 1.0), 0.25);
        let v = simply_connected(&small, pt(1.0, 1.0), &cfg).unwrap().value;
        assert!((v - 8.0).abs() < 1e-14);
        let upper = DomainSpec::HalfPlane {
            normal_angle: std::f64::consts::FRAC_PI_2,
            offset: 0.0,
        };
        let v = simply_connected(&upper, pt(0.3, 1.0), &cfg).unwrap().value;
        assert!((v - 1.0).abs() < 1e-14);
        assert!(matches!(
            simply_connected(&DomainSpec::twice_punctured_standard(), pt(2.0, 0.0), &cfg),
            Err(MetricError::NotSimplyConnected)
        ));
        assert!(matches!(
            simply_connected(&d, pt(2.0, 0.0), &cfg),
            Err(MetricError::PointNotInDomain(_))
        ));
    }

    #[test]
    fn once_punctured_plane() {
        assert_eq!(punctured_plane(pt(0.0, 0.0), pt(1.0, 0.0)).unwrap().value, 0.125);
        assert_eq!(punctured_plane(pt(0.0, 0.0), pt(2.0, 0.0)).unwrap().value, 0.0625);
        let v = punctured_plane(pt(0.0, 1.0), pt(1.0, 1.0)).unwrap().value;
        assert!((v - 0.125).abs() < 1e-15);
        assert!(matches!(
            punctured_plane(pt(1.0, 0.0), pt(1.0, 0.0)),
            Err(MetricError::PunctureValue(_))
        ));
    }

    #[test]
    fn punctured_disk_model_is_exact() {
        let lambda = |z: Point| -> Result<f64> {
            let r = z.norm();
            Ok(1.0 / (r * (1.0 / r).ln()))
        };
        let est = extract(&lambda, pt(0.0, 0.0), &[0.02, 0.01, 0.005]).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
        assert!(est.extrapolation_error < 1e-12);
        assert_eq!(est.source, EstimateSource::Extraction);
    }

    #[test]
    fn extraction_recovers_one_eighth() {
        let est = extract(&c01_source(), pt(1.0, 0.0), &[0.02, 0.01, 0.005]).unwrap();
        assert!((est.value * 8.0 - 1.0).abs() < 0.01, "{}", est.value);
    }

    #[test]
    fn solved_extraction_on_the_disk() {
        // η = λ on simply connected domains
        let w = pt(0.3, -0.2);
        let est = extract_by_solving(&DomainSpec::unit_disk(), w, &HurwitzConfig::default()).unwrap();
        let want = 2.0 / (1.0 - w.norm_sqr());
        assert!((est.value / want - 1.0).abs() < 5e-3, "{} vs {want}", est.value);
        assert!(est.discretization_error.is_finite() && est.relative_error() < 5e-3);
    }

    #[test]
    fn solved_extraction_on_twice_punctured_planes() {
        let cfg = HurwitzConfig::default();
        // z ↦ z² maps ℂ∖{0,±1} two-to-one onto ℂ∖{0,1}; comparing the
        // Hurwitz coverings of ℂ∖{0,1} at 1/2 and of ℂ∖{±1} at 0 through it
        // gives η_{ℂ∖{0,1}}(1/2) = 1 and η_{ℂ∖{±1}}(0) = 1/2
        let half = two_punctures(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.5, 0.0), &cfg).unwrap();
        assert!((half.value - 1.0).abs() < 5e-3, "{}", half.value);
        let sym = general(&DomainSpec::punctured_plane(vec![pt(-1.0, 0.0), pt(1.0, 0.0)]), pt(0.0, 0.0), &cfg)
            .unwrap();
        assert!((sym.value - 0.5).abs() < 2.5e-3, "{}", sym.value);
        // η_{ℂ∖{0,1}}(−1) = 1/4 from z ↦ 1/(1 − z) applied at 1/2
        let minus_one = two_punctures(pt(0.0, 0.0), pt(1.0, 0.0), pt(-1.0, 0.0), &cfg).unwrap();
        assert!((minus_one.value - 0.25).abs() < 1.25e-3, "{}", minus_one.value);
    }

    #[test]
    fn inverted_charts_agree_with_the_plane_itself() {
        let cfg = HurwitzConfig::default();
        let punctures = vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)];
        let w = pt(-1.0, 0.0);
        let direct = extract_by_solving(&DomainSpec::punctured_plane(punctures.clone()), w, &cfg).unwrap();
        // inversion about the puncture 0: ℂ∖{1, −i, 0} at −1 with |T'| = 1
        let image = vec![pt(1.0, 0.0), pt(0.0, -1.0), pt(0.0, 0.0)];
        let inverted = extract_by_solving(&DomainSpec::punctured_plane(image), pt(-1.0, 0.0), &cfg).unwrap();
        assert!((direct.value / inverted.value - 1.0).abs() < 1e-3);
        let chosen = general(&DomainSpec::punctured_plane(punctures.clone()), pt(4.0, -1.0), &cfg).unwrap();
        assert!(chart_spread(&punctures, pt(4.0, -1.0)) > 4.0);
        assert!((chosen.value / 0.09367841653670028 - 1.0).abs() < 1e-3, "{}", chosen.value);
    }

    #[test]
    fn anharmonic_images_are_consistent() {
        for v in [pt(-1.0, 0.0), pt(3.0, 0.0), pt(0.2, 0.7), pt(-5.0, 2.0), pt(1e-3, 0.0)] {
            let (g, factor) = anharmonic_normal_form(v);
            let a = crate::modular::density_c01(v).unwrap().value;
            let b = crate::modular::density_c01(g).unwrap().value * factor;
            assert!((a / b - 1.0).abs() < 1e-9, "{v} → {g}");
            assert!((g - 0.5).norm() <= (v - 0.5).norm());
        }
        assert_eq!(anharmonic_normal_form(pt(-1.0, 0.0)).0, pt(0.5, 0.0));
    }

    #[test]
    fn general_prefers_closed_forms() {
        let cfg = HurwitzConfig::default();
        let once = DomainSpec::punctured_plane(vec![pt(0.0, 0.0)]);
        let est = general(&once, pt(0.0, 2.0), &cfg).unwrap();
        assert_eq!((est.value, est.source), (0.0625, EstimateSource::ClosedForm));
        let est = general(&DomainSpec::unit_disk(), pt(0.0, 0.0), &cfg).unwrap();
        assert_eq!((est.value, est.source), (2.0, EstimateSource::ClosedForm));
        assert!(general(&DomainSpec::unit_disk(), pt(1.0, 0.0), &cfg).is_err());
    }

    #[test]
    fn extraction_validates_radii() {
        let src = c01_source();
        let w = pt(1.0, 0.0);
        assert!(extract(&src, w, &[0.01]).is_err());
        assert!(extract(&src, w, &[0.01, 0.02]).is_err());
        assert!(extract(&src, w, &[0.01, -0.01]).is_err());
        let nowhere = |z: Point| -> Result<f64> { Err(MetricError::OutOfField(z)) };
        assert!(matches!(
            extract(&nowhere, w, &[0.02, 0.01]),
            Err(MetricError::RadiusOutOfField(_))
        ));
        let negative = |_: Point| -> Result<f64> { Ok(-1.0) };
        assert!(matches!(
            extract(&negative, w, &[0.02, 0.01]),
            Err(MetricError::NegativeDensity(_))
        ));
    }

    #[test]
    fn line_fit_is_exact_on_lines() {
        let (a, b) = fit_line(&[3.0, 2.0, 1.0], &[7.0, 5.0, 3.0]);
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
    }
}
