//! Machine-checked comparison of the densities λ, η, η̄, κ and `1/δ` on a
//! gallery of domains, convergence probes and plot-ready sweeps.
//!
//! Every check compares numbers from independent routes: λ comes from a
//! closed form or a Cartesian solve, η from a log-polar extraction, η̄ and
//! κ from the pair optimizer over the complement.

mod checks;
mod converge;
mod gallery;
mod sweep;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barmetrics::{self, OptimizerBudget};
use crate::error::{MetricError, Result};
use crate::geometry::{DomainSpec, Point};
use crate::hurwitz::{self, Eta01Table, HurwitzConfig, HurwitzEstimate};
use crate::liouville::{self, DensityField, DensitySource, SolverConfig};
use crate::modular;

pub use checks::{at_most, definition, equal, CheckDef, CheckResult, Relation, Status, CHECKS};
pub use converge::{converge_suite, default_cases, ConvergeCase, ConvergeCaseReport, ConvergeReport};
pub use gallery::{Flags, Gallery, GalleryEntry, NestedPair};
pub use sweep::{sweep, GridSpec, SweepMetric, SweepRow};

/// Identifier of the report layout; bumped on incompatible changes.
pub const REPORT_SCHEMA: &str = "metricroom.verify.v1";

pub const DEFAULT_SLACK: f64 = 1.05;

/// Relative tolerance of the sharpness check `η̄ = η`, covering the
/// extraction and the table each side goes through.
pub const SHARPNESS_TOLERANCE: f64 = 0.04;

/// Relative tolerance of `δ̄ = 1/δ`.
pub const DELTA_BAR_TOLERANCE: f64 = 1e-9;

/// Numerical settings of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// Multiplicative slack applied to the disadvantaged side; at least 1.
    pub slack: f64,
    /// Seeds the probes drawn for entries that list none.
    pub seed: u64,
    pub probes_per_entry: usize,
    /// Also run the connected-boundary check with the printed value of K.
    pub strict: bool,
    /// Cartesian solves for λ.
    pub solver: SolverConfig,
    /// Log-polar solves for η.
    pub hurwitz: HurwitzConfig,
    pub budget: OptimizerBudget,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            slack: DEFAULT_SLACK,
            seed: 0,
            probes_per_entry: 20,
            strict: false,
            solver: SolverConfig::default(),
            hurwitz: HurwitzConfig::default(),
            budget: OptimizerBudget::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.slack >= 1.0) || !self.slack.is_finite() {
            return Err(MetricError::InvalidArgument("slack must be at least 1".into()));
        }
        self.solver.validate()?;
        self.hurwitz.solver.validate()
    }
}

/// A computed density with its relative error bar and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    /// `closed_form`, `pde`, `extraction`, `table` or `optimizer`.
    pub source: String,
}

impl Estimate {
    fn new(value: f64, error: f64, source: &str) -> Self {
        Estimate {
            value,
            error: if error.is_finite() { error } else { 0.0 },
            source: source.to_string(),
        }
    }

    fn from_hurwitz(est: &HurwitzEstimate) -> Self {
        let source = match est.source {
            hurwitz::EstimateSource::ClosedForm => "closed_form",
            hurwitz::EstimateSource::Extraction => "extraction",
            hurwitz::EstimateSource::Table => "table",
        };
        Estimate::new(est.value, est.relative_error(), source)
    }
}

fn value(e: &Option<Estimate>) -> Option<f64> {
    e.as_ref().map(|e| e.value)
}

fn error(e: &Option<Estimate>) -> f64 {
    e.as_ref().map_or(0.0, |e| e.error)
}

/// All quantities and checks at one probe point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub entry: String,
    pub probe: Point,
    pub delta: f64,
    pub lambda: Option<Estimate>,
    pub eta: Option<Estimate>,
    pub eta_bar: Option<Estimate>,
    pub eta_bar_pair: Option<(Point, Point)>,
    pub kappa: Option<Estimate>,
    pub delta_bar: Option<f64>,
    pub checks: Vec<CheckResult>,
    /// Quantities that could not be computed, with the reason.
    pub failures: Vec<String>,
}

/// Domain monotonicity at a probe of the smaller domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedRow {
    pub inner: String,
    pub outer: String,
    pub probe: Point,
    pub outer_eta: Option<Estimate>,
    pub outer_eta_bar: Option<Estimate>,
    pub checks: Vec<CheckResult>,
    pub failures: Vec<String>,
}

/// The constant `K = Γ(1/4)⁴/(4π²)`, computed, next to the commonly
/// printed approximation 4.3859 it disagrees with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub k: f64,
    pub k_printed: f64,
    pub k_over_4: f64,
    pub k_printed_over_4: f64,
}

impl Constants {
    pub fn new() -> Self {
        let k = modular::constant_k();
        Constants {
            k,
            k_printed: modular::PRINTED_K,
            k_over_4: k / 4.0,
            k_printed_over_4: modular::PRINTED_K / 4.0,
        }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants::new()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: usize,
    pub marginal: usize,
    pub fail: usize,
    pub uncomputable: usize,
}

impl Counts {
    fn add(&mut self, s: Status) {
        match s {
            Status::Pass => self.pass += 1,
            Status::Marginal => self.marginal += 1,
            Status::Fail => self.fail += 1,
            Status::Uncomputable => self.uncomputable += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: Counts,
    /// Keyed by check family (`C1` … `C11`).
    pub by_check: BTreeMap<String, Counts>,
    /// Rows in which some quantity could not be computed.
    pub rows_with_failures: usize,
    /// Range of `κ/λ` over the rows. No bound is asserted on it.
    pub kappa_over_lambda: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub slack: f64,
    pub seed: u64,
    pub config: SuiteConfig,
    pub constants: Constants,
    pub rows: Vec<Row>,
    pub nested: Vec<NestedRow>,
    pub summary: Summary,
}

impl VerificationReport {
    /// Number of failed checks; marginal results do not count.
    pub fn hard_failures(&self) -> usize {
        self.summary.total.fail
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.rows
            .iter()
            .flat_map(|r| &r.checks)
            .chain(self.nested.iter().flat_map(|n| &n.checks))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Where λ comes from for one gallery entry.
enum LambdaSource {
    ClosedForm,
    Field(Box<DensityField>),
    Failed(String),
}

impl LambdaSource {
    fn for_domain(domain: &DomainSpec, probes: &[Point], config: &SolverConfig) -> Self {
        if probes
            .iter()
            .all(|p| liouville::closed_form_density(domain, *p).is_some())
        {
            return LambdaSource::ClosedForm;
        }
        match liouville::solve_density(domain, config) {
            Ok(f) => LambdaSource::Field(Box::new(f)),
            Err(e) => LambdaSource::Failed(e.to_string()),
        }
    }

    fn at(&self, domain: &DomainSpec, w: Point) -> Result<Estimate, String> {
        match self {
            LambdaSource::ClosedForm => liouville::closed_form_density(domain, w)
                .map(|v| Estimate::new(v, 0.0, "closed_form"))
                .ok_or_else(|| "no closed form".to_string()),
            LambdaSource::Field(f) => f
                .density_at(w)
                .map(|v| Estimate::new(v, f.estimated_discretization_error, "pde"))
                .map_err(|e| e.to_string()),
            LambdaSource::Failed(e) => Err(e.clone()),
        }
    }
}

/// η through a route independent of λ: the closed form or a chart-adapted
/// extraction on punctured planes, otherwise extraction from a solve on `Ω ∖ {w}`, also for simply
/// connected domains where `η = λ`.
pub fn independent_eta(domain: &DomainSpec, w: Point, config: &HurwitzConfig) -> Result<HurwitzEstimate> {
    match domain {
        DomainSpec::PuncturedPlane { .. } => hurwitz::general(domain, w, config),
        _ => hurwitz::extract_by_solving(domain, w, config),
    }
}

/// η by the cheapest available route: closed forms, the table for twice
/// punctured planes, extraction otherwise.
fn cheap_eta(domain: &DomainSpec, w: Point, config: &HurwitzConfig) -> Result<Estimate> {
    match domain {
        DomainSpec::Disk { .. } | DomainSpec::HalfPlane { .. } => liouville::closed_form_density(domain, w)
            .map(|v| Estimate::new(v, 0.0, "closed_form"))
            .ok_or(MetricError::PointNotInDomain(w)),
        DomainSpec::PuncturedPlane { punctures } if punctures.len() == 2 => {
            let table = Eta01Table::builtin();
            let v = table.eta_two(punctures[0], punctures[1], w)?;
            Ok(Estimate::new(
                v,
                table.max_error() + hurwitz::INTERPOLATION_ERROR,
                "table",
            ))
        }
        _ => independent_eta(domain, w, config).map(|e| Estimate::from_hurwitz(&e)),
    }
}

fn optimizer_estimate(r: &barmetrics::PairSupremumResult) -> Estimate {
    Estimate::new(r.value, r.relative_error, "optimizer")
}

fn evaluate_row(
    entry: &GalleryEntry,
    w: Point,
    lambda_source: &LambdaSource,
    config: &SuiteConfig,
    constants: &Constants,
) -> Row {
    let domain = &entry.domain;
    let mut failures = Vec::new();
    let mut note = |what: &str, e: String| failures.push(format!("{what}: {e}"));
    let delta = domain.boundary_distance(w).unwrap_or(f64::NAN);
    let lambda = lambda_source
        .at(domain, w)
        .map_err(|e| note("lambda", e))
        .ok();
    let eta = independent_eta(domain, w, &config.hurwitz)
        .map(|e| Estimate::from_hurwitz(&e))
        .map_err(|e| note("eta", e.to_string()))
        .ok();
    let eta_bar_result = barmetrics::eta_bar(domain, w, &config.budget)
        .map_err(|e| note("eta_bar", e.to_string()))
        .ok();
    let eta_bar = eta_bar_result.as_ref().map(optimizer_estimate);
    let kappa = barmetrics::kappa(domain, w, &config.budget)
        .map(|r| optimizer_estimate(&r))
        .map_err(|e| note("kappa", e.to_string()))
        .ok();
    let delta_bar = barmetrics::delta_bar(domain, w, &config.budget)
        .map(|r| r.value)
        .map_err(|e| note("delta_bar", e.to_string()))
        .ok();

    let s = config.slack;
    let (l, h, hb) = (value(&lambda), value(&eta), value(&eta_bar));
    let (el, eh, ehb) = (error(&lambda), error(&eta), error(&eta_bar));
    let inv_delta = Some(1.0 / delta);
    let scale = |v: Option<f64>, c: f64| v.map(|x| x * c);
    let mut checks = vec![
        at_most("C1", hb, h, s, ehb + eh),
        at_most("C2-lower", scale(inv_delta, 0.125), hb, s, ehb),
        at_most("C2-upper", hb, scale(inv_delta, 2.0), s, ehb),
        at_most("C3", scale(h, 1.0 / 16.0), hb, s, ehb + eh),
    ];
    if entry.flags.twice_punctured {
        checks.push(equal("C4", hb, h, SHARPNESS_TOLERANCE, ehb + eh));
    }
    if entry.flags.connected_boundary {
        checks.push(at_most("C5", h, scale(hb, constants.k_over_4), s, ehb + eh));
        if config.strict {
            checks.push(at_most(
                "C5-printed",
                h,
                scale(hb, constants.k_printed_over_4),
                s,
                ehb + eh,
            ));
        }
    }
    checks.push(at_most("C6", l, h, s, el + eh));
    if entry.flags.uniformly_perfect {
        let b = entry.b.unwrap_or(f64::NAN);
        checks.push(at_most("C7-lower", scale(inv_delta, b), l, s, el));
        checks.push(at_most("C7-upper", l, scale(inv_delta, 2.0), s, el));
        checks.push(at_most("C8-lower", scale(hb, b / 2.0), l, s, el + ehb));
        checks.push(at_most("C8-upper", l, scale(hb, 16.0), s, el + ehb));
    }
    if let DomainSpec::PuncturedPlane { punctures } = domain {
        if let [a, b] = punctures.as_slice() {
            let bound = modular::hempel_lower_bound((w - a) / (b - a))
                .map(|v| v / (b - a).norm())
                .ok();
            checks.push(at_most("C9", bound, l, s, el));
        }
    }
    checks.push(equal("C10", delta_bar, inv_delta, DELTA_BAR_TOLERANCE, 0.0));

    Row {
        entry: entry.name.clone(),
        probe: w,
        delta,
        lambda,
        eta,
        eta_bar,
        eta_bar_pair: eta_bar_result.map(|r| r.argmax_pair),
        kappa,
        delta_bar,
        checks,
        failures,
    }
}

fn evaluate_nested(pair: &NestedPair, outer: &GalleryEntry, row: &Row, config: &SuiteConfig) -> NestedRow {
    let w = row.probe;
    let mut failures = Vec::new();
    let outer_eta = cheap_eta(&outer.domain, w, &config.hurwitz)
        .map_err(|e| failures.push(format!("eta: {e}")))
        .ok();
    let outer_eta_bar = barmetrics::eta_bar(&outer.domain, w, &config.budget)
        .map(|r| optimizer_estimate(&r))
        .map_err(|e| failures.push(format!("eta_bar: {e}")))
        .ok();
    let s = config.slack;
    let checks = vec![
        at_most(
            "C11-eta",
            value(&outer_eta),
            value(&row.eta),
            s,
            error(&outer_eta) + error(&row.eta),
        ),
        at_most(
            "C11-eta-bar",
            value(&outer_eta_bar),
            value(&row.eta_bar),
            s,
            error(&outer_eta_bar) + error(&row.eta_bar),
        ),
    ];
    NestedRow {
        inner: pair.inner.clone(),
        outer: pair.outer.clone(),
        probe: w,
        outer_eta,
        outer_eta_bar,
        checks,
        failures,
    }
}

fn summarize(rows: &[Row], nested: &[NestedRow]) -> Summary {
    let mut total = Counts::default();
    let mut by_check: BTreeMap<String, Counts> = BTreeMap::new();
    let all = rows
        .iter()
        .flat_map(|r| &r.checks)
        .chain(nested.iter().flat_map(|n| &n.checks));
    for c in all {
        total.add(c.status);
        let family = c.id.split('-').next().unwrap_or(&c.id).to_string();
        by_check.entry(family).or_default().add(c.status);
    }
    let ratios: Vec<f64> = rows
        .iter()
        .filter_map(|r| Some(value(&r.kappa)? / value(&r.lambda)?))
        .collect();
    let kappa_over_lambda = (!ratios.is_empty()).then(|| {
        ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(*q), hi.max(*q)))
    });
    Summary {
        total,
        by_check,
        rows_with_failures: rows.iter().filter(|r| !r.failures.is_empty()).count()
            + nested.iter().filter(|n| !n.failures.is_empty()).count(),
        kappa_over_lambda,
    }
}

/// Evaluates every applicable check on every probe of the gallery.
pub fn run_suite(gallery: &Gallery, config: &SuiteConfig) -> Result<VerificationReport> {
    run_suite_with_progress(gallery, config, |_| {})
}

/// As [`run_suite`], calling `progress` as each row completes. Rows run in
/// parallel; the report lists them in gallery order.
pub fn run_suite_with_progress(
    gallery: &Gallery,
    config: &SuiteConfig,
    progress: impl Fn(&Row) + Sync,
) -> Result<VerificationReport> {
    config.validate()?;
    let mut gallery = gallery.clone();
    gallery.fill_probes(config.seed, config.probes_per_entry)?;
    gallery.validate()?;
    let constants = Constants::new();

    let sources: Vec<LambdaSource> = gallery
        .entries
        .par_iter()
        .map(|e| LambdaSource::for_domain(&e.domain, &e.probes, &config.solver))
        .collect();
    let jobs: Vec<(usize, Point)> = gallery
        .entries
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.probes.iter().map(move |p| (i, *p)))
        .collect();
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(i, w)| {
            let row = evaluate_row(&gallery.entries[i], w, &sources[i], config, &constants);
            progress(&row);
            row
        })
        .collect();

    let nested_jobs: Vec<(&NestedPair, &GalleryEntry, &Row)> = gallery
        .nested
        .iter()
        .flat_map(|pair| {
            let outer = gallery.entry(&pair.outer).expect("validated");
            rows.iter()
                .filter(move |r| r.entry == pair.inner)
                .map(move |r| (pair, outer, r))
        })
        .collect();
    let nested: Vec<NestedRow> = nested_jobs
        .par_iter()
        .map(|(pair, outer, row)| evaluate_nested(pair, outer, row, config))
        .collect();

    let summary = summarize(&rows, &nested);
    Ok(VerificationReport {
        schema: REPORT_SCHEMA.to_string(),
        slack: config.slack,
        seed: config.seed,
        config: config.clone(),
        constants,
        rows,
        nested,
        summary,
    })
}
