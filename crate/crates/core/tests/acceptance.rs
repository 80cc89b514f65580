//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line to
//! standard output (bypassing the test harness capture) and the test fails
//! if any criterion does.

use std::io::Write;
use std::time::{Duration, Instant};

use metricroom::barmetrics::{self, OptimizerBudget};
use metricroom::hurwitz::{self, HurwitzConfig};
use metricroom::liouville::{self, SolverConfig};
use metricroom::modular;
use metricroom::verify::{self, Gallery, Status, SuiteConfig};
use metricroom::{pt, DomainSpec, Point};

/// λ_{ℂ∖{0,1}}(−1) = Γ(3/4)⁴/π², evaluated independently at 30 digits.
const GOLDEN_LAMBDA: f64 = 0.228_473_290_522_231_6;
/// Γ(1/4)⁴/(4π²), evaluated independently at 30 digits.
const GOLDEN_K: f64 = 4.376_879_230_452_953;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn special_function_golden_value() -> Outcome {
    let start = Instant::now();
    let lambda = modular::density_c01(pt(-1.0, 0.0)).unwrap().value;
    let k = modular::constant_k();
    let elapsed = start.elapsed();
    let passed = (lambda - GOLDEN_LAMBDA).abs() <= 1e-10
        && (k - GOLDEN_K).abs() <= 1e-6
        && elapsed < Duration::from_secs(1);
    outcome(
        passed,
        format!(
            "λ(−1) = {lambda:.15} (|Δ| = {:.1e}), K = {k:.9} (|Δ| = {:.1e}), printed K = {} kept as a discrepancy, {elapsed:.2?}",
            (lambda - GOLDEN_LAMBDA).abs(),
            (k - GOLDEN_K).abs(),
            modular::PRINTED_K
        ),
    )
}

/// Probes on the circles |z − 1/2| = 1 and 3/2, at distance ≥ 1/2 from
/// both punctures.
fn c01_probe_annulus() -> Vec<Point> {
    [1.0, 1.5]
        .iter()
        .flat_map(|r| (0..16).map(move |k| pt(0.5, 0.0) + Point::from_polar(*r, (k as f64 + 0.5) * std::f64::consts::TAU / 16.0)))
        .collect()
}

fn pde_versus_closed_form() -> Outcome {
    let config = SolverConfig {
        grid: 513,
        estimate_error: false,
        ..SolverConfig::default()
    };
    let annulus = DomainSpec::Annulus {
        inner: 0.5,
        outer: 1.0,
        center: pt(0.0, 0.0),
    };
    let disk_probes: Vec<Point> = (0..12).map(|k| Point::from_polar(0.1 * (k % 8) as f64, k as f64)).collect();
    let annulus_probes: Vec<Point> = (0..12).map(|k| Point::from_polar(0.58 + 0.03 * (k % 4) as f64 * 1.1, 0.7 * k as f64)).collect();
    let cases: [(&str, DomainSpec, Vec<Point>, f64, Box<dyn Fn(Point) -> f64>); 3] = [
        (
            "ℂ∖{0,1}",
            DomainSpec::twice_punctured_standard(),
            c01_probe_annulus(),
            0.02,
            Box::new(|z| modular::density_c01(z).unwrap().value),
        ),
        ("𝔻", DomainSpec::unit_disk(), disk_probes, 0.01, Box::new(|z: Point| 2.0 / (1.0 - z.norm_sqr()))),
        (
            "Annulus(0.5,1)",
            annulus.clone(),
            annulus_probes,
            0.02,
            Box::new(move |z| liouville::closed_form_density(&annulus, z).unwrap()),
        ),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, domain, probes, tolerance, exact) in cases {
        let start = Instant::now();
        let field = liouville::solve_density(&domain, &config).unwrap();
        let elapsed = start.elapsed();
        let worst = probes
            .iter()
            .map(|&z| (liouville::eval_density(&field, z).unwrap().value / exact(z) - 1.0).abs())
            .fold(0.0, f64::max);
        passed &= worst <= tolerance && elapsed < Duration::from_secs(60);
        parts.push(format!("{name}: max rel. error {worst:.1e} (≤ {tolerance}) in {elapsed:.1?}"));
    }
    outcome(passed, parts.join("; "))
}

fn extraction_oracle() -> Outcome {
    let radii = [0.02, 0.01, 0.005];
    let once = hurwitz::extract(&hurwitz::c01_source(), pt(1.0, 0.0), &radii).unwrap();
    let model = |z: Point| -> metricroom::Result<f64> {
        let r = z.norm();
        Ok(1.0 / (r * (1.0 / r).ln()))
    };
    let disk = hurwitz::extract(&model, pt(0.0, 0.0), &radii).unwrap();
    let passed = (once.value * 8.0 - 1.0).abs() <= 0.01 && (disk.value - 2.0).abs() <= 1e-12;
    outcome(
        passed,
        format!(
            "η_ℂ∖{{0}}(1) = {:.6} vs 1/8 (rel. {:.1e}); punctured-disk model |Δ| = {:.1e}",
            once.value,
            (once.value * 8.0 - 1.0).abs(),
            (disk.value - 2.0).abs()
        ),
    )
}

fn sharpness() -> Outcome {
    let domain = DomainSpec::twice_punctured_standard();
    let budget = OptimizerBudget::default();
    let config = HurwitzConfig::default();
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for w in [pt(-1.0, 0.0), pt(0.5, 0.0), pt(0.3, 0.8), pt(2.0, 1.0), pt(0.5, -1.5)] {
        let bar = barmetrics::eta_bar(&domain, w, &budget).unwrap();
        let eta = hurwitz::general(&domain, w, &config).unwrap();
        let deviation = (bar.value / eta.value - 1.0).abs();
        worst = worst.max(deviation);
        passed &= bar.argmax_pair == (pt(0.0, 0.0), pt(1.0, 0.0)) && deviation <= verify::SHARPNESS_TOLERANCE;
    }
    outcome(passed, format!("argmax pair (0,1) at 5 points, max |η̄/η − 1| = {worst:.1e} (≤ {})", verify::SHARPNESS_TOLERANCE))
}

fn inequality_sweep(report: &verify::VerificationReport, elapsed: Duration) -> Outcome {
    let mut hard = Vec::new();
    for c in report.checks() {
        if c.id == "C4" {
            continue;
        }
        if matches!(c.status, Status::Fail | Status::Uncomputable) {
            hard.push(c);
        }
    }
    let mut by_check = std::collections::BTreeMap::<String, usize>::new();
    for c in &hard {
        *by_check.entry(c.id.clone()).or_default() += 1;
    }
    let worst_c5 = hard
        .iter()
        .filter(|c| c.id == "C5")
        .filter_map(|c| c.ratio)
        .fold(f64::NAN, f64::max);
    let passed = hard.is_empty() && elapsed < Duration::from_secs(30 * 60);
    outcome(
        passed,
        format!(
            "{} rows, {} checks, hard failures by check {by_check:?} (worst C5 ratio {worst_c5:.3} against slack {}), {elapsed:.0?}",
            report.rows.len(),
            report.checks().count(),
            report.slack
        ),
    )
}

fn delta_bar_identity(report: &verify::VerificationReport) -> Outcome {
    let deviations: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.delta_bar.map_or(f64::INFINITY, |d| (d * r.delta - 1.0).abs()))
        .collect();
    let worst = deviations.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= 1e-9,
        format!("max |δ̄·δ − 1| = {worst:.1e} over {} probes", deviations.len()),
    )
}

fn affine_invariance() -> Outcome {
    let budget = OptimizerBudget::default();
    let cases = [
        (DomainSpec::twice_punctured_standard(), pt(-1.0, 0.0)),
        (DomainSpec::twice_punctured_standard(), pt(0.3, 0.8)),
        (DomainSpec::unit_disk(), pt(0.3, 0.2)),
        (DomainSpec::unit_disk(), pt(-0.5, 0.1)),
    ];
    let mut worst: f64 = 0.0;
    for (domain, w) in &cases {
        for (alpha, beta) in [(pt(2.0, 0.0), pt(1.0, 0.0)), (pt(0.0, 1.0), pt(0.0, 0.0))] {
            let r = barmetrics::affine_invariance_check(domain, *w, alpha, beta, &budget).unwrap();
            worst = worst.max(r.deviation);
        }
    }
    outcome(worst <= 0.02, format!("max deviation {worst:.1e} over 8 cases (≤ 0.02)"))
}

fn continuity_and_lsc(report: &verify::ConvergeReport) -> Outcome {
    let plane = report.cases.iter().find(|c| c.name == "punctured-plane").unwrap();
    let exact = plane
        .continuity
        .as_ref()
        .is_some_and(|c| c.rows.iter().all(|r| r.value == 1.0 / (8.0 * r.point.norm())));
    let extraction = report
        .cases
        .iter()
        .filter(|c| c.name != "punctured-plane")
        .all(|c| c.continuity.as_ref().is_some_and(|k| k.passed && k.tail_converges));
    let lsc = report.cases.iter().all(|c| c.lsc.as_ref().map_or(true, |l| l.holds));
    let tails: Vec<String> = report
        .cases
        .iter()
        .filter_map(|c| {
            let k = c.continuity.as_ref()?;
            Some(format!("{} {:.1e}", c.name, k.rows.last().map_or(0.0, |r| r.deviation)))
        })
        .collect();
    outcome(
        exact && extraction && lsc && report.passed,
        format!(
            "closed form exact: {exact}; tail deviations [{}]; LSC holds on all cases: {lsc}",
            tails.join(", ")
        ),
    )
}

fn hausdorff_identity(cases: &[verify::ConvergeCase], report: &verify::ConvergeReport) -> Outcome {
    let mut checked = 0;
    let mut passed = report.cases.iter().all(|c| c.hausdorff_identity);
    for (c, r) in cases.iter().zip(&report.cases) {
        let delta = c.domain.boundary_distance(c.w).unwrap();
        let Some(b) = &r.boundary else {
            passed = false;
            continue;
        };
        for (p, h) in c.sequence.iter().zip(&b.hausdorff) {
            let step = (p - c.w).norm();
            if step <= delta.min(c.domain.boundary_distance(*p).unwrap()) {
                passed &= *h == step;
                checked += 1;
            }
        }
    }
    outcome(passed, format!("H = |w_n − w| exactly at {checked} sequence points in {} cases", report.cases.len()))
}

#[test]
fn acceptance_criteria() {
    let suite_config = SuiteConfig::default();
    let start = Instant::now();
    let report = verify::run_suite(&Gallery::builtin(), &suite_config).unwrap();
    let suite_time = start.elapsed();
    let cases = verify::default_cases();
    let converge = verify::converge_suite(&cases, &suite_config);

    let results = [
        ("special-function golden value", special_function_golden_value()),
        ("PDE versus closed forms", pde_versus_closed_form()),
        ("extraction oracle", extraction_oracle()),
        ("sharpness on ℂ∖{0,1}", sharpness()),
        ("inequality sweep", inequality_sweep(&report, suite_time)),
        ("δ̄ identity", delta_bar_identity(&report)),
        ("affine invariance of η̄", affine_invariance()),
        ("continuity and lower semicontinuity", continuity_and_lsc(&converge)),
        ("Hausdorff identity", hausdorff_identity(&cases, &converge)),
    ];
    let mut out = std::io::stdout().lock();
    for (i, (name, o)) in results.iter().enumerate() {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {}: {verdict} {name}: {}", i + 1, o.detail).unwrap();
    }
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, (_, o))| !o.passed)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
