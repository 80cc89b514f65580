//! Metrics defined as suprema over pairs of complement points:
//!
//! ```text
//! κ_Ω(w)   = sup λ_{ℂ∖{a,b}}(w)
//! η̄_Ω(w)   = sup η_{ℂ∖{a,b}}(w)
//! 1/δ̄_Ω(w) = sup 1/δ_{ℂ∖{a,b}}(w)      over distinct a, b ∈ Ω^c.
//! ```
//!
//! Each supremum is searched over the whole complement: a coarse pass over
//! pairs drawn from a boundary sample and a polar sample of the interior of
//! the complement, then Nelder–Mead refinement in the four real coordinates
//! of the pair, with both points projected back onto `Ω^c`.

use std::cell::RefCell;
use std::cmp::Ordering;

use argmin::core::{CostFunction, Error as ArgminError, Executor};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::geometry::{self, DomainSpec, Point};
use crate::hurwitz::{self, Eta01Table, HurwitzConfig};
use crate::modular;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerBudget {
    /// Best coarse pairs used as refinement starts. For expensive
    /// objectives this is also the number of coarse evaluations.
    pub coarse_pairs: usize,
    /// Simplex iterations per refinement start.
    pub refine_iters: usize,
    /// Standard deviation of simplex values at which refinement stops.
    pub simplex_tolerance: f64,
    /// Points sampled on the boundary.
    pub boundary_samples: usize,
    /// Rings of the polar sample of the complement interior, at radii
    /// `2^k δ` around `w`.
    pub interior_rings: usize,
    /// Angles per ring.
    pub interior_angles: usize,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        OptimizerBudget {
            coarse_pairs: 24,
            refine_iters: 40,
            simplex_tolerance: 1e-12,
            boundary_samples: 48,
            interior_rings: 6,
            interior_angles: 16,
        }
    }
}

impl OptimizerBudget {
    fn validate(&self) -> Result<()> {
        if self.coarse_pairs == 0
            || self.refine_iters == 0
            || !(self.simplex_tolerance > 0.0)
            || self.boundary_samples < 2
        {
            return Err(MetricError::InvalidArgument(
                "optimizer budget entries must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub pair: (Point, Point),
    pub value: f64,
    pub stage: String,
}

/// Certified bounds `1/(8δ) ≤ η̄ ≤ 2/δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSupremumResult {
    pub value: f64,
    pub argmax_pair: (Point, Point),
    pub evaluations: usize,
    /// Improvement of the value during the final polishing run.
    pub attainment_residual: f64,
    /// Running best, recorded at every improvement; non-decreasing.
    pub method_trace: Vec<TraceEntry>,
    /// Relative error bar of `value` from the objective itself.
    pub relative_error: f64,
    pub envelope: Option<Envelope>,
}

/// Candidate points of `Ω^c`: a boundary sample, a polar sample of the
/// complement interior around `w`, deduplicated.
pub fn complement_sample(domain: &DomainSpec, w: Point, budget: &OptimizerBudget) -> Result<Vec<Point>> {
    let delta = domain.boundary_distance(w)?;
    let comps = domain.boundary_components().len();
    let mut points = geometry::boundary_sample(domain, budget.boundary_samples.max(comps))?.points;
    for k in 1..=budget.interior_rings {
        let r = delta * f64::powi(2.0, k as i32);
        for j in 0..budget.interior_angles {
            let theta = std::f64::consts::TAU * (j as f64 + 0.5 * (k % 2) as f64)
                / budget.interior_angles as f64;
            let p = w + Point::from_polar(r, theta);
            if !domain.contains(p) {
                points.push(p);
            }
        }
    }
    points.sort_by(|a, b| lex(*a, *b));
    points.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    if points.len() < 2 {
        return Err(MetricError::InsufficientComplementSamples);
    }
    Ok(points)
}

fn lex(a: Point, b: Point) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Orders the pair lexicographically; objectives are symmetric.
fn canonical(a: Point, b: Point) -> (Point, Point) {
    if lex(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

/// Nearest point of `Ω^c`: the point itself when outside `Ω`. Boundary
/// points that round back into `Ω` are pushed outward by a few ulps.
fn project(domain: &DomainSpec, p: Point) -> Point {
    if !domain.contains(p) {
        return p;
    }
    let Ok(q) = domain.nearest_boundary_point(p) else {
        return p;
    };
    let d = q - p;
    if d.norm() == 0.0 {
        return q;
    }
    let dir = d / d.norm();
    let mut step = f64::EPSILON * (1.0 + q.norm());
    let mut out = q;
    for _ in 0..16 {
        if !domain.contains(out) {
            break;
        }
        out = q + dir * step;
        step *= 4.0;
    }
    out
}

/// Higher value wins; equal values go to the lexicographically smaller pair.
fn better(value: f64, pair: (Point, Point), best: &Option<(f64, (Point, Point))>) -> bool {
    match best {
        None => value.is_finite(),
        Some((v, p)) => {
            value > *v
                || (value == *v
                    && lex(pair.0, p.0).then(lex(pair.1, p.1)) == Ordering::Less)
        }
    }
}

struct Search<'a, F> {
    domain: &'a DomainSpec,
    objective: F,
    evaluations: usize,
    best: Option<(f64, (Point, Point))>,
    trace: Vec<TraceEntry>,
}

impl<F: Fn(Point, Point) -> Result<f64>> Search<'_, F> {
    fn eval(&mut self, a: Point, b: Point, stage: &str) -> f64 {
        let (a, b) = canonical(project(self.domain, a), project(self.domain, b));
        if (a - b).norm() <= 1e-9 {
            return f64::NEG_INFINITY;
        }
        self.evaluations += 1;
        let v = match (self.objective)(a, b) {
            Ok(v) if v.is_finite() => v,
            _ => return f64::NEG_INFINITY,
        };
        if better(v, (a, b), &self.best) {
            self.best = Some((v, (a, b)));
            self.trace.push(TraceEntry {
                pair: (a, b),
                value: v,
                stage: stage.to_string(),
            });
        }
        v
    }

    /// Nelder–Mead from `start`; returns the best value found by this run.
    fn refine(&mut self, start: (Point, Point), w: Point, iters: usize, tol: f64, stage: &str) -> f64 {
        let scale = 0.1 * (start.0 - w).norm().min((start.1 - w).norm()).max(1e-9);
        let x0 = vec![start.0.re, start.0.im, start.1.re, start.1.im];
        let mut simplex = vec![x0.clone()];
        for k in 0..4 {
            let mut x = x0.clone();
            x[k] += scale;
            simplex.push(x);
        }
        let best_before = self.best.map_or(f64::NEG_INFINITY, |b| b.0);
        let cell = RefCell::new(self);
        let problem = Problem { search: &cell, stage };
        let solver = match NelderMead::new(simplex).with_sd_tolerance(tol) {
            Ok(s) => s,
            Err(_) => return best_before,
        };
        // a failed run leaves the best value found so far in place
        let _ = Executor::new(problem, solver)
            .configure(|state| state.max_iters(iters as u64))
            .run();
        let search = cell.into_inner();
        search.best.map_or(f64::NEG_INFINITY, |b| b.0)
    }
}

struct Problem<'s, 'm, 'a, F> {
    search: &'s RefCell<&'m mut Search<'a, F>>,
    stage: &'s str,
}

impl<F: Fn(Point, Point) -> Result<f64>> CostFunction for Problem<'_, '_, '_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        let v = self
            .search
            .borrow_mut()
            .eval(Point::new(x[0], x[1]), Point::new(x[2], x[3]), self.stage);
        // the simplex minimises; invalid pairs sit at a large finite cost
        Ok(if v.is_finite() { -v } else { 1e300 })
    }
}

/// Coarse candidates, ordered best first; `None` evaluates every pair.
enum Coarse {
    AllPairs,
    Ranked(Vec<(Point, Point)>),
}

fn optimize(
    domain: &DomainSpec,
    w: Point,
    budget: &OptimizerBudget,
    objective: impl Fn(Point, Point) -> Result<f64>,
    coarse: Coarse,
    seeds: &[(Point, Point)],
) -> Result<PairSupremumResult> {
    budget.validate()?;
    if !domain.contains(w) {
        return Err(MetricError::PointNotInDomain(w));
    }
    let mut search = Search {
        domain,
        objective,
        evaluations: 0,
        best: None,
        trace: Vec::new(),
    };
    let mut scored: Vec<(f64, (Point, Point))> = Vec::new();
    for &(a, b) in seeds {
        let v = search.eval(a, b, "seed");
        scored.push((v, canonical(project(domain, a), project(domain, b))));
    }
    match coarse {
        Coarse::AllPairs => {
            let sample = complement_sample(domain, w, budget)?;
            for i in 0..sample.len() {
                for j in i + 1..sample.len() {
                    let v = search.eval(sample[i], sample[j], "coarse");
                    scored.push((v, (sample[i], sample[j])));
                }
            }
        }
        Coarse::Ranked(pairs) => {
            for (a, b) in pairs.into_iter().take(budget.coarse_pairs) {
                let v = search.eval(a, b, "coarse");
                scored.push((v, (a, b)));
            }
        }
    }
    if search.best.is_none() {
        return Err(MetricError::InsufficientComplementSamples);
    }
    scored.retain(|s| s.0.is_finite());
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(lex(x.1 .0, y.1 .0)).then(lex(x.1 .1, y.1 .1)));
    let starts: Vec<(Point, Point)> = scored.iter().take(budget.coarse_pairs).map(|s| s.1).collect();
    for start in starts {
        search.refine(start, w, budget.refine_iters, budget.simplex_tolerance, "refine");
    }
    let before = search.best.map(|b| b.0).unwrap_or(f64::NEG_INFINITY);
    let polish_from = search.best.map(|b| b.1).expect("best exists");
    let after = search.refine(polish_from, w, budget.refine_iters, budget.simplex_tolerance, "polish");
    let (value, argmax_pair) = search.best.expect("best exists");
    Ok(PairSupremumResult {
        value,
        argmax_pair,
        evaluations: search.evaluations,
        attainment_residual: (after - before).max(0.0),
        method_trace: search.trace,
        relative_error: 0.0,
        envelope: None,
    })
}

fn require_hyperbolic(domain: &DomainSpec, w: Point) -> Result<f64> {
    domain.validate()?;
    if !domain.is_hyperbolic() {
        return Err(MetricError::NotHyperbolic);
    }
    domain.boundary_distance(w)
}

/// `κ_Ω(w) = sup λ_{ℂ∖{a,b}}(w)`.
pub fn kappa(domain: &DomainSpec, w: Point, budget: &OptimizerBudget) -> Result<PairSupremumResult> {
    require_hyperbolic(domain, w)?;
    let seeds = basic_seeds(domain, w, budget)?;
    optimize(
        domain,
        w,
        budget,
        |a, b| modular::density_two_punctures(a, b, w).map(|d| d.value),
        Coarse::AllPairs,
        &seeds,
    )
}

/// Nearest boundary point with the farthest boundary sample, and with a
/// far complement point opposite to it (the single-puncture limit).
fn basic_seeds(domain: &DomainSpec, w: Point, budget: &OptimizerBudget) -> Result<Vec<(Point, Point)>> {
    let near = domain.nearest_boundary_point(w)?;
    let sample = geometry::boundary_sample(domain, budget.boundary_samples.max(domain.boundary_components().len()))?;
    let far = sample
        .points
        .iter()
        .copied()
        .max_by(|a, b| (a - w).norm().total_cmp(&(b - w).norm()).then(lex(*b, *a)))
        .unwrap_or(near);
    let opposite = project(domain, w + (w - near) * 1e3);
    Ok(vec![(near, far), (near, opposite)])
}

/// `η̄_Ω(w) = sup η_{ℂ∖{a,b}}(w)`, evaluated with the tabulated
/// `η_{ℂ∖{0,1}}` and the affine reduction of each pair.
pub fn eta_bar(domain: &DomainSpec, w: Point, budget: &OptimizerBudget) -> Result<PairSupremumResult> {
    eta_bar_with(domain, w, budget, Eta01Table::builtin())
}

pub fn eta_bar_with(
    domain: &DomainSpec,
    w: Point,
    budget: &OptimizerBudget,
    table: &Eta01Table,
) -> Result<PairSupremumResult> {
    let delta = require_hyperbolic(domain, w)?;
    let k = kappa(domain, w, budget)?;
    let mut seeds = vec![k.argmax_pair];
    seeds.extend(basic_seeds(domain, w, budget)?);
    let mut result = optimize(
        domain,
        w,
        budget,
        |a, b| table.eta_two(a, b, w),
        Coarse::AllPairs,
        &seeds,
    )?;
    result.relative_error = table.max_error() + hurwitz::INTERPOLATION_ERROR;
    result.envelope = Some(envelope(delta, result.value));
    Ok(result)
}

/// `η̄_Ω(w)` with every evaluation a fresh extraction. The coarse pass is
/// limited to `coarse_pairs` pairs, ranked by the κ objective.
pub fn eta_bar_direct(
    domain: &DomainSpec,
    w: Point,
    budget: &OptimizerBudget,
    config: &HurwitzConfig,
) -> Result<PairSupremumResult> {
    let delta = require_hyperbolic(domain, w)?;
    let k = kappa(domain, w, budget)?;
    let mut seeds = vec![k.argmax_pair];
    seeds.extend(basic_seeds(domain, w, budget)?);
    let sample = complement_sample(domain, w, budget)?;
    let mut ranked: Vec<(f64, (Point, Point))> = Vec::new();
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            let (a, b) = (sample[i], sample[j]);
            if let Ok(d) = modular::density_two_punctures(a, b, w) {
                ranked.push((d.value, (a, b)));
            }
        }
    }
    ranked.sort_by(|x, y| y.0.total_cmp(&x.0));
    let errors = RefCell::new(0.0f64);
    let single_budget = OptimizerBudget {
        coarse_pairs: 1,
        ..budget.clone()
    };
    let mut result = optimize(
        domain,
        w,
        &single_budget,
        |a, b| {
            let est = hurwitz::two_punctures(a, b, w, config)?;
            let mut e = errors.borrow_mut();
            *e = e.max(est.relative_error());
            Ok(est.value)
        },
        Coarse::Ranked(ranked.into_iter().map(|r| r.1).take(budget.coarse_pairs).collect()),
        &seeds,
    )?;
    result.relative_error = errors.into_inner();
    result.envelope = Some(envelope(delta, result.value));
    Ok(result)
}

fn envelope(delta: f64, value: f64) -> Envelope {
    Envelope {
        lower: (1.0 / (8.0 * delta)).max(value),
        upper: 2.0 / delta,
    }
}

/// Pair optimizer run on `1/δ_{ℂ∖{a,b}}(w) = 1/min(|w − a|, |w − b|)`.
/// Its value equals `1/δ_Ω(w)`.
pub fn delta_bar(domain: &DomainSpec, w: Point, budget: &OptimizerBudget) -> Result<PairSupremumResult> {
    require_hyperbolic(domain, w)?;
    let seeds = basic_seeds(domain, w, budget)?;
    optimize(
        domain,
        w,
        budget,
        |a, b| Ok(1.0 / (w - a).norm().min((w - b).norm())),
        Coarse::AllPairs,
        &seeds,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineReport {
    pub alpha: Point,
    pub beta: Point,
    /// `η̄_{Ω}(w)`.
    pub original: f64,
    /// `η̄_{T(Ω)}(T(w)) |T'(w)|`.
    pub transformed: f64,
    pub deviation: f64,
}

/// Compares `η̄_Ω(w)` with `η̄_{T(Ω)}(T(w)) |α|` for `T(z) = αz + β`.
pub fn affine_invariance_check(
    domain: &DomainSpec,
    w: Point,
    alpha: Point,
    beta: Point,
    budget: &OptimizerBudget,
) -> Result<AffineReport> {
    let image = domain.affine_image(alpha, beta)?;
    let original = eta_bar(domain, w, budget)?.value;
    let transformed = eta_bar(&image, alpha * w + beta, budget)?.value * alpha.norm();
    Ok(AffineReport {
        alpha,
        beta,
        original,
        transformed,
        deviation: (transformed / original - 1.0).abs(),
    })
}

/// Allowed excess of `η̄(w₀)` over the liminf estimate, relative to `η̄(w₀)`.
pub const LSC_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LscReport {
    pub limit_point: Point,
    pub limit_value: f64,
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    /// Estimate of `liminf η̄(w_n)`: the last two values extrapolated
    /// linearly in `|w_n − w₀|` to zero step.
    pub liminf_estimate: f64,
    /// `η̄(w₀) − liminf_estimate`.
    pub gap: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Zero-step value of the line through the last two `(|w_n − w₀|, η̄(w_n))`
/// pairs; the last value when the steps coincide.
fn extrapolated_tail(steps: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len();
    let last = *values.last()?;
    if n < 2 {
        return Some(last);
    }
    let (sa, sb) = (steps[n - 2], steps[n - 1]);
    let (va, vb) = (values[n - 2], values[n - 1]);
    if (sa - sb).abs() <= f64::EPSILON * sa.max(sb) {
        return Some(last);
    }
    Some((vb * sa - va * sb) / (sa - sb))
}

/// One-sided check `η̄(w₀) ≤ liminf η̄(w_n)`. A finite sequence only sees the
/// liminf through its tail, so the last two values are extrapolated linearly
/// in the step to zero; the excess of `η̄(w₀)` over that estimate must not
/// exceed the slack. A downward jump at `w₀` survives the extrapolation.
pub fn lsc_probe(
    domain: &DomainSpec,
    w: Point,
    sequence: &[Point],
    budget: &OptimizerBudget,
) -> Result<LscReport> {
    let limit = eta_bar(domain, w, budget)?;
    let values = sequence
        .iter()
        .map(|&p| eta_bar(domain, p, budget).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<f64> = sequence.iter().map(|p| (p - w).norm()).collect();
    let liminf_estimate = extrapolated_tail(&steps, &values).unwrap_or(limit.value);
    let gap = limit.value - liminf_estimate;
    let slack = (LSC_SLACK + limit.relative_error) * limit.value;
    Ok(LscReport {
        limit_point: w,
        limit_value: limit.value,
        points: sequence.to_vec(),
        values,
        liminf_estimate,
        gap,
        slack,
        holds: gap <= slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    fn budget() -> OptimizerBudget {
        OptimizerBudget::default()
    }

    #[test]
    fn kappa_of_twice_punctured_plane_is_lambda() {
        let d = DomainSpec::twice_punctured_standard();
        let w = pt(-1.0, 0.0);
        let r = kappa(&d, w, &budget()).unwrap();
        assert_eq!(r.argmax_pair, (pt(0.0, 0.0), pt(1.0, 0.0)));
        let want = modular::density_c01(w).unwrap().value;
        assert!((r.value - want).abs() < 1e-12);
    }

    #[test]
    fn kappa_on_the_disk_is_sandwiched() {
        let d = DomainSpec::unit_disk();
        let r = kappa(&d, pt(0.0, 0.0), &budget()).unwrap();
        let pair = modular::density_c01(pt(0.5, 0.0)).unwrap().value / 2.0;
        assert!(r.value <= 2.0 && r.value >= pair * (1.0 - 1e-12), "{}", r.value);
    }

    #[test]
    fn optimizer_results_are_sound() {
        let d = DomainSpec::Annulus {
            inner: 0.5,
            outer: 1.0,
            center: pt(0.0, 0.0),
        };
        let w = pt(0.3, 0.6);
        let r = kappa(&d, w, &budget()).unwrap();
        let (a, b) = r.argmax_pair;
        assert!(!d.contains(a) && !d.contains(b) && (a - b).norm() > 1e-9);
        let again = modular::density_two_punctures(a, b, w).unwrap().value;
        assert!((again - r.value).abs() <= 1e-12 * r.value);
        assert!(r.method_trace.windows(2).all(|p| p[0].value <= p[1].value));
        assert!(r.attainment_residual >= 0.0);
    }

    #[test]
    fn eta_bar_is_sharp_on_the_twice_punctured_plane() {
        let d = DomainSpec::twice_punctured_standard();
        let r = eta_bar(&d, pt(-1.0, 0.0), &budget()).unwrap();
        assert_eq!(r.argmax_pair, (pt(0.0, 0.0), pt(1.0, 0.0)));
        // η_{ℂ∖{0,1}}(−1) = 1/4 through the anharmonic map z ↦ 1/(1 − z)
        assert!((r.value - 0.25).abs() < 0.25 * r.relative_error, "{}", r.value);
        let env = r.envelope.unwrap();
        assert!(env.lower <= r.value && r.value <= env.upper);
    }

    #[test]
    fn eta_bar_on_the_disk_center() {
        let d = DomainSpec::unit_disk();
        let r = eta_bar(&d, pt(0.0, 0.0), &budget()).unwrap();
        // the pair {−1, 1} gives η_{ℂ∖{±1}}(0) = 1/2; λ_𝔻(0) = 2 bounds η̄
        assert!(r.value >= 0.5 * (1.0 - r.relative_error), "{}", r.value);
        assert!(r.value <= 2.0);
        assert!(r.method_trace.windows(2).all(|t| t[1].value >= t[0].value));
        println!("disk center: {} at {:?}", r.value, r.argmax_pair);
    }

    #[test]
    fn eta_bar_is_affine_invariant() {
        let cases = [
            (DomainSpec::twice_punctured_standard(), pt(-1.0, 0.0)),
            (DomainSpec::twice_punctured_standard(), pt(0.3, 0.8)),
            (DomainSpec::unit_disk(), pt(0.3, 0.2)),
        ];
        for (d, w) in &cases {
            for (alpha, beta) in [(pt(2.0, 0.0), pt(1.0, 0.0)), (pt(0.0, 1.0), pt(0.0, 0.0))] {
                let r = affine_invariance_check(d, *w, alpha, beta, &budget()).unwrap();
                assert!(r.deviation < 0.02, "{w} {alpha}: {r:?}");
            }
        }
    }

    #[test]
    fn tail_extrapolation_is_exact_on_lines() {
        let steps = [0.4, 0.2, 0.1];
        let values: Vec<f64> = steps.iter().map(|s| 3.0 - 2.0 * s).collect();
        assert!((extrapolated_tail(&steps, &values).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(extrapolated_tail(&[0.0, 0.0], &[1.5, 1.5]), Some(1.5));
        assert_eq!(extrapolated_tail(&[0.3], &[2.0]), Some(2.0));
        assert_eq!(extrapolated_tail(&[], &[]), None);
    }

    #[test]
    fn eta_bar_is_lower_semicontinuous() {
        let d = DomainSpec::ExteriorDisk {
            center: pt(0.0, 0.0),
            radius: 1.0,
        };
        let seq: Vec<Point> = (1..=12).map(|n| pt(2.0 + 0.5f64.powi(n), 0.1 * 0.5f64.powi(n))).collect();
        let r = lsc_probe(&d, pt(2.0, 0.0), &seq, &budget()).unwrap();
        assert!(r.holds, "{r:?}");
        let c01 = DomainSpec::twice_punctured_standard();
        let seq: Vec<Point> = (1..=12).map(|n| pt(-1.0, 0.5f64.powi(n))).collect();
        assert!(lsc_probe(&c01, pt(-1.0, 0.0), &seq, &budget()).unwrap().holds);
    }

    #[test]
    fn delta_bar_matches_boundary_distance() {
        let b = budget();
        let r = delta_bar(&DomainSpec::unit_disk(), pt(0.0, 0.0), &b).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = delta_bar(&DomainSpec::twice_punctured_standard(), pt(3.0, 0.0), &b).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!(r.argmax_pair.0 == pt(1.0, 0.0) || r.argmax_pair.1 == pt(1.0, 0.0));
    }

    #[test]
    fn rejects_points_outside() {
        let d = DomainSpec::unit_disk();
        assert!(matches!(
            kappa(&d, pt(2.0, 0.0), &budget()),
            Err(MetricError::PointNotInDomain(_))
        ));
    }
}
