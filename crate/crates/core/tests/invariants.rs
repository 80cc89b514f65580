//! Property tests of invariants that cut across modules.

use metricroom::barmetrics::{self, OptimizerBudget};
use metricroom::hurwitz;
use metricroom::liouville;
use metricroom::modular;
use metricroom::verify::{self, Gallery, Status};
use metricroom::{pt, DomainSpec, Point};
use proptest::prelude::*;

fn annulus() -> DomainSpec {
    DomainSpec::Annulus {
        inner: 0.5,
        outer: 1.0,
        center: pt(0.0, 0.0),
    }
}

fn exterior() -> DomainSpec {
    DomainSpec::ExteriorDisk {
        center: pt(0.0, 0.0),
        radius: 1.0,
    }
}

fn polar(r: f64, t: f64) -> Point {
    Point::from_polar(r, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The closed-form densities satisfy λ ≤ 2/δ, and λδ stays above the
    /// annulus constant b.
    #[test]
    fn closed_form_densities_respect_the_distance_bounds(r in 0.501..0.999f64, s in 1.001..50.0f64, t in 0.0..6.3f64) {
        let a = annulus();
        let z = polar(r, t);
        let l = liouville::closed_form_density(&a, z).unwrap();
        let d = a.boundary_distance(z).unwrap();
        prop_assert!(l * d <= 2.0 && l * d >= 0.98);
        let e = exterior();
        let z = polar(s, t);
        let l = liouville::closed_form_density(&e, z).unwrap();
        prop_assert!(l * e.boundary_distance(z).unwrap() <= 2.0);
    }

    /// Smaller domains carry larger densities: annulus ⊂ disk and
    /// exterior disk ⊂ ℂ∖{0,1}.
    #[test]
    fn closed_form_densities_are_monotone(r in 0.501..0.999f64, s in 1.001..50.0f64, t in 0.0..6.3f64) {
        let z = polar(r, t);
        let disk = 2.0 / (1.0 - z.norm_sqr());
        prop_assert!(liouville::closed_form_density(&annulus(), z).unwrap() >= disk);
        let z = polar(s, t);
        let c01 = modular::density_c01(z).unwrap().value;
        prop_assert!(liouville::closed_form_density(&exterior(), z).unwrap() >= c01 * (1.0 - 1e-12));
    }

    /// Extraction from the closed-form density of ℂ∖{a,b} at b recovers
    /// η_{ℂ∖{a}}(b) = 1/(8|b − a|), with strictly decreasing radii.
    #[test]
    fn extraction_recovers_the_punctured_plane(ax in -3.0..3.0f64, ay in -3.0..3.0f64, bx in -3.0..3.0f64, by in -3.0..3.0f64) {
        let (a, b) = (pt(ax, ay), pt(bx, by));
        prop_assume!((a - b).norm() > 0.05);
        let lambda = |z: Point| Ok(modular::density_two_punctures(a, b, z)?.value);
        let radii: Vec<f64> = hurwitz::RADIUS_FACTORS.iter().map(|f| f * (a - b).norm()).collect();
        let est = hurwitz::extract(&lambda, b, &radii).unwrap();
        prop_assert!(est.radii.windows(2).all(|r| r[0] > r[1]));
        prop_assert!(est.value > 0.0 && est.extrapolation_error >= 0.0);
        prop_assert!((est.value * 8.0 * (a - b).norm() - 1.0).abs() < 0.01);
    }

    /// δ̄ is the quasihyperbolic density 1/δ.
    #[test]
    fn delta_bar_is_the_reciprocal_distance(k in 0usize..3, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let d = [DomainSpec::unit_disk(), annulus(), exterior()][k].clone();
        let w = pt(x, y);
        prop_assume!(d.contains(w));
        let r = barmetrics::delta_bar(&d, w, &OptimizerBudget::default()).unwrap();
        prop_assert!((r.value * d.boundary_distance(w).unwrap() - 1.0).abs() <= 1e-9);
    }

    /// A check passes exactly when the comparison holds within the slack,
    /// and always carries both compared numbers.
    #[test]
    fn checks_follow_their_slack(lhs in 1e-3..1e3f64, rhs in 1e-3..1e3f64, slack in 1.0..1.5f64) {
        let c = verify::at_most("C1", Some(lhs), Some(rhs), slack, 0.0);
        prop_assert_eq!(c.status == Status::Pass, lhs / rhs <= slack);
        prop_assert_eq!(c.status == Status::Fail, lhs / rhs - 1.0 > 2.0 * (slack - 1.0));
        prop_assert_eq!((c.lhs, c.rhs, c.slack), (Some(lhs), Some(rhs), slack));
        let e = verify::equal("C4", Some(lhs), Some(rhs), slack - 1.0, 0.0);
        prop_assert_eq!(e.status, verify::equal("C4", Some(rhs), Some(lhs), slack - 1.0, 0.0).status);
    }

    /// Drawn probes lie in their domains and depend only on the seed.
    #[test]
    fn drawn_probes_are_admissible_and_reproducible(seed in any::<u64>()) {
        let mut g = Gallery::builtin();
        for e in &mut g.entries {
            e.probes.clear();
        }
        let mut h = g.clone();
        g.fill_probes(seed, 5).unwrap();
        h.fill_probes(seed, 5).unwrap();
        for (e, f) in g.entries.iter().zip(&h.entries) {
            prop_assert_eq!(&e.probes, &f.probes);
            prop_assert_eq!(e.probes.len(), 5);
            prop_assert!(e.probes.iter().all(|p| e.domain.contains(*p)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// κ: argmax points lie in the complement and are distinct, the value
    /// is the density of ℂ∖{argmax pair}, and κ ≤ λ.
    #[test]
    fn kappa_results_are_attained(k in 0usize..3, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let d = [DomainSpec::unit_disk(), annulus(), exterior()][k].clone();
        let w = pt(x, y);
        prop_assume!(d.contains(w) && d.boundary_distance(w).unwrap() > 0.02);
        let r = barmetrics::kappa(&d, w, &OptimizerBudget::default()).unwrap();
        let (a, b) = r.argmax_pair;
        prop_assert!(a != b && !d.contains(a) && !d.contains(b));
        prop_assert_eq!(r.value, modular::density_two_punctures(a, b, w).unwrap().value);
        prop_assert!(r.attainment_residual >= 0.0);
        let lambda = liouville::closed_form_density(&d, w).unwrap_or(2.0 / (1.0 - w.norm_sqr()));
        prop_assert!(r.value <= lambda * (1.0 + 1e-9));
    }

    /// η̄ lies within 1/(8δ) ≤ η̄ ≤ 2/δ and its trace never decreases.
    #[test]
    fn eta_bar_respects_the_distance_bounds(k in 0usize..2, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let d = [DomainSpec::unit_disk(), exterior()][k].clone();
        let w = pt(x, y);
        prop_assume!(d.contains(w) && d.boundary_distance(w).unwrap() > 0.02);
        let delta = d.boundary_distance(w).unwrap();
        let r = barmetrics::eta_bar(&d, w, &OptimizerBudget::default()).unwrap();
        let (a, b) = r.argmax_pair;
        prop_assert!(a != b && !d.contains(a) && !d.contains(b));
        prop_assert!(r.value >= 1.0 / (8.0 * delta) * (1.0 - r.relative_error));
        prop_assert!(r.value <= 2.0 / delta);
        prop_assert!(r.method_trace.windows(2).all(|t| t[1].value >= t[0].value));
    }
}
