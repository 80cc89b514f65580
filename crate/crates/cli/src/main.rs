//! `metricroom`: command line front-end for the density toolkit.
//!
//! Exit status: 0 on success, 1 when a verification reports hard failures,
//! 2 on invalid input or a failed computation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use metricroom::barmetrics;
use metricroom::geometry;
use metricroom::hurwitz::{self, Eta01Table};
use metricroom::liouville::{self, io as field_io};
use metricroom::modular;
use metricroom::verify::{self, Gallery, GridSpec, Status, SuiteConfig, SweepMetric};
use metricroom::{DomainSpec, Point};

/// Environment variable fixing the size of the work pool.
const THREADS_VAR: &str = "METRICROOM_THREADS";

#[derive(Parser)]
#[command(name = "metricroom", version, about = "Hyperbolic, Hurwitz and pair-supremum densities of plane domains")]
struct Cli {
    /// JSON file with solver, extraction and optimizer settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every comparison check on a domain gallery.
    Verify {
        /// Gallery file; the built-in six-domain gallery by default.
        #[arg(long)]
        gallery: Option<PathBuf>,
        #[arg(long)]
        slack: Option<f64>,
        /// Seed for probes of entries that list none.
        #[arg(long)]
        seed: Option<u64>,
        /// Also check with the printed value 4.3859 of K.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary convergence, continuity of η and lower semicontinuity of η̄.
    Converge {
        /// JSON list of cases; the built-in cases by default.
        #[arg(long)]
        cases: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one density on a rectangular grid.
    Sweep {
        #[arg(long)]
        domain: String,
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// `min:max:nodes`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// `min:max:nodes`.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Skip nodes closer than this to the boundary.
        #[arg(long, default_value_t = 0.0)]
        exclusion: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All densities at one point.
    Eval {
        #[arg(long)]
        domain: String,
        /// `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Skip the PDE-based η extraction.
        #[arg(long)]
        no_eta: bool,
    },
    /// Solve for λ and save the field.
    Solve {
        #[arg(long)]
        domain: String,
        /// Center a log-polar chart at this puncture instead of using a
        /// Cartesian grid.
        #[arg(long, allow_hyphen_values = true)]
        log_polar_at: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        /// Binary field file.
        #[arg(long)]
        out: PathBuf,
        /// Also write the main grid as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Hurwitz density η at a point.
    Hurwitz {
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// η̄ at a point, with the optimizer certificate.
    Etabar {
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Extract η afresh for every pair instead of using the table.
        #[arg(long)]
        direct: bool,
    },
    /// κ at a point, with the optimizer certificate.
    Kappa {
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Closed-form λ of ℂ∖{0,1}.
    Lambda01 {
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// The constant K and related values.
    Constants,
    /// Geometric queries.
    Geom {
        #[arg(long)]
        domain: String,
        #[command(subcommand)]
        op: GeomOp,
    },
    /// Recompute the η table of ℂ∖{0,1}.
    Table {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GeomOp {
    /// Membership, boundary distance and nearest boundary point.
    Point {
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Boundary sample with `n` points.
    Sample {
        #[arg(long)]
        n: usize,
    },
    /// Hausdorff distance to the boundary of another domain.
    Hausdorff {
        #[arg(long)]
        other: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Delta,
    Lambda,
    Eta,
    EtaBar,
    Kappa,
}

impl From<MetricArg> for SweepMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Delta => SweepMetric::Delta,
            MetricArg::Lambda => SweepMetric::Lambda,
            MetricArg::Eta => SweepMetric::Eta,
            MetricArg::EtaBar => SweepMetric::EtaBar,
            MetricArg::Kappa => SweepMetric::Kappa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// `re,im` or a bare real number.
fn parse_point(s: &str) -> Result<Point> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().with_context(|| format!("bad number {t:?} in point {s:?}"));
    let p = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => bail!("a point is written re,im; got {s:?}"),
    };
    if !(p.re.is_finite() && p.im.is_finite()) {
        bail!("point {s:?} is not finite");
    }
    Ok(p)
}

/// Inline JSON, the name of a built-in gallery entry, or a JSON file.
fn parse_domain(s: &str) -> Result<DomainSpec> {
    let domain: DomainSpec = if s.trim_start().starts_with('{') {
        serde_json::from_str(s).context("parsing domain JSON")?
    } else if let Some(e) = Gallery::builtin().entry(s) {
        e.domain.clone()
    } else {
        let text = fs::read_to_string(s).with_context(|| format!("{s:?} is neither JSON, a gallery name nor a file"))?;
        serde_json::from_str(&text).with_context(|| format!("parsing domain file {s}"))?
    };
    domain.validate()?;
    Ok(domain)
}

/// `min:max:nodes`.
fn parse_axis(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        bail!("an axis is written min:max:nodes; got {s:?}");
    };
    Ok((lo.parse()?, hi.parse()?, n.parse()?))
}

fn load_config(path: Option<&Path>) -> Result<SuiteConfig> {
    let config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SuiteConfig::default(),
    };
    config.validate()?;
    Ok(config)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
            Ok(())
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?, None)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("configuring the work pool: {e}"))?;
    }
    Ok(())
}

fn print_summary(report: &verify::VerificationReport) {
    eprintln!("check   pass  marginal  fail  uncomputable");
    for (id, c) in &report.summary.by_check {
        eprintln!("{id:<6} {:>5} {:>9} {:>5} {:>13}", c.pass, c.marginal, c.fail, c.uncomputable);
    }
    let t = report.summary.total;
    eprintln!("{:<6} {:>5} {:>9} {:>5} {:>13}", "all", t.pass, t.marginal, t.fail, t.uncomputable);
    eprintln!(
        "K = {:.7} (K/4 = {:.4}); printed value {} (K/4 = {:.4})",
        report.constants.k, report.constants.k_over_4, report.constants.k_printed, report.constants.k_printed_over_4
    );
}

#[derive(Serialize)]
struct PointReport {
    domain: DomainSpec,
    at: Point,
    delta: f64,
    lambda: Option<f64>,
    lambda_source: &'static str,
    eta: Option<hurwitz::HurwitzEstimate>,
    eta_bar: barmetrics::PairSupremumResult,
    kappa: barmetrics::PairSupremumResult,
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Verify {
            gallery,
            slack,
            seed,
            strict,
            out,
        } => {
            let gallery = match gallery {
                Some(p) => Gallery::from_json(&fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?,
                None => Gallery::builtin(),
            };
            let config = SuiteConfig {
                slack: slack.unwrap_or(config.slack),
                seed: seed.unwrap_or(config.seed),
                strict: strict || config.strict,
                ..config
            };
            let report = verify::run_suite_with_progress(&gallery, &config, |row| {
                let worst = row.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass);
                eprintln!("{:<24} ({:+.4}, {:+.4})  {worst:?}", row.entry, row.probe.re, row.probe.im);
            })?;
            emit(&report.to_json()?, out.as_deref())?;
            print_summary(&report);
            Ok(if report.hard_failures() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Converge { cases, out } => {
            let cases = match cases {
                Some(p) => serde_json::from_str(&fs::read_to_string(&p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => verify::default_cases(),
            };
            let report = verify::converge_suite(&cases, &config);
            emit(&serde_json::to_string_pretty(&report)?, out.as_deref())?;
            for c in &report.cases {
                eprintln!("{:<24} {}", c.name, if c.passed { "pass" } else { "FAIL" });
            }
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Sweep {
            domain,
            metric,
            x,
            y,
            exclusion,
            format,
            out,
        } => {
            let domain = parse_domain(&domain)?;
            let (x0, x1, nx) = parse_axis(&x)?;
            let (y0, y1, ny) = parse_axis(&y)?;
            let grid = GridSpec {
                x0,
                x1,
                y0,
                y1,
                nx,
                ny,
                exclusion,
            };
            let rows = verify::sweep(&domain, &grid, metric.into(), &config)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&rows)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    String::from_utf8(w.into_inner()?)?
                }
            };
            emit(text.trim_end(), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { domain, at, no_eta } => {
            let domain = parse_domain(&domain)?;
            let w = parse_point(&at)?;
            let delta = domain.boundary_distance(w)?;
            let (lambda, lambda_source) = match liouville::closed_form_density(&domain, w) {
                Some(v) => (Some(v), "closed_form"),
                None => {
                    let field = liouville::solve_density(&domain, &config.solver)?;
                    (Some(liouville::eval_density(&field, w)?.value), "pde")
                }
            };
            let eta = if no_eta {
                None
            } else {
                Some(hurwitz::general(&domain, w, &config.hurwitz)?)
            };
            print_json(&PointReport {
                eta_bar: barmetrics::eta_bar(&domain, w, &config.budget)?,
                kappa: barmetrics::kappa(&domain, w, &config.budget)?,
                domain,
                at: w,
                delta,
                lambda,
                lambda_source,
                eta,
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            domain,
            log_polar_at,
            grid,
            out,
            csv,
        } => {
            let domain = parse_domain(&domain)?;
            let mut solver = config.solver.clone();
            if let Some(g) = grid {
                solver.grid = g;
            }
            let field = match log_polar_at {
                Some(c) => liouville::solve_log_polar(&domain, parse_point(&c)?, &solver)?,
                None => liouville::solve_density(&domain, &solver)?,
            };
            field_io::write_field(&field, io::BufWriter::new(fs::File::create(&out)?))?;
            if let Some(p) = csv {
                field_io::write_csv(&field, io::BufWriter::new(fs::File::create(p)?))?;
            }
            eprintln!(
                "solved; estimated discretization error {:e}",
                field.estimated_discretization_error
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Hurwitz { domain, at } => {
            let domain = parse_domain(&domain)?;
            print_json(&hurwitz::general(&domain, parse_point(&at)?, &config.hurwitz)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Etabar { domain, at, direct } => {
            let domain = parse_domain(&domain)?;
            let w = parse_point(&at)?;
            let r = if direct {
                barmetrics::eta_bar_direct(&domain, w, &config.budget, &config.hurwitz)?
            } else {
                barmetrics::eta_bar(&domain, w, &config.budget)?
            };
            print_json(&r)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Kappa { domain, at } => {
            let domain = parse_domain(&domain)?;
            print_json(&barmetrics::kappa(&domain, parse_point(&at)?, &config.budget)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lambda01 { at } => {
            let w = parse_point(&at)?;
            #[derive(Serialize)]
            struct Out {
                at: Point,
                lambda: f64,
                tau: Complex64,
                hempel_lower_bound: f64,
                convention: &'static str,
            }
            print_json(&Out {
                at: w,
                lambda: modular::density_c01(w)?.value,
                tau: modular::inverse_lambda(w)?.value,
                hempel_lower_bound: modular::hempel_lower_bound(w)?,
                convention: modular::DensityValue::CONVENTION,
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Constants => {
            let c = verify::Constants::new();
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                constants: verify::Constants,
                lambda01_at_minus_one: f64,
                eta01_at_minus_one: f64,
            }
            print_json(&Out {
                constants: c,
                lambda01_at_minus_one: modular::density_c01(Complex64::new(-1.0, 0.0))?.value,
                eta01_at_minus_one: Eta01Table::builtin().eta01(Complex64::new(-1.0, 0.0))?,
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Geom { domain, op } => {
            let domain = parse_domain(&domain)?;
            match op {
                GeomOp::Point { at } => {
                    let w = parse_point(&at)?;
                    #[derive(Serialize)]
                    struct Out {
                        contains: bool,
                        boundary_distance: Option<f64>,
                        nearest_boundary_point: Option<Point>,
                    }
                    print_json(&Out {
                        contains: domain.contains(w),
                        boundary_distance: domain.boundary_distance(w).ok(),
                        nearest_boundary_point: domain.nearest_boundary_point(w).ok(),
                    })?;
                }
                GeomOp::Sample { n } => {
                    let s = geometry::boundary_sample(&domain, n)?;
                    print_json(&s.points.iter().zip(&s.component).collect::<Vec<_>>())?;
                }
                GeomOp::Hausdorff { other } => {
                    let other = parse_domain(&other)?;
                    let h = geometry::hausdorff(
                        &geometry::comparison_sample(&domain),
                        &geometry::comparison_sample(&other),
                    )?;
                    print_json(&h)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Table { out } => {
            let table = Eta01Table::generate(&config.hurwitz, |node| {
                eprintln!("x = {:.4}, σ = {:.4}: P = {:.8} ± {:.1e}", node.x, node.sigma, node.p, node.error);
            })?;
            emit(&serde_json::to_string_pretty(&table)?, Some(&out))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_axes_parse() {
        assert_eq!(parse_point("-1,0.5").unwrap(), Complex64::new(-1.0, 0.5));
        assert_eq!(parse_point("2").unwrap(), Complex64::new(2.0, 0.0));
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("inf").is_err());
        assert_eq!(parse_axis("-2:3:200").unwrap(), (-2.0, 3.0, 200));
        assert!(parse_axis("1:2").is_err());
    }

    #[test]
    fn domains_parse_from_json_and_gallery_names() {
        let d = parse_domain(r#"{"type":"disk","center":[0,0],"radius":2}"#).unwrap();
        assert_eq!(d, DomainSpec::disk(Complex64::new(0.0, 0.0), 2.0));
        assert_eq!(parse_domain("unit-disk").unwrap(), DomainSpec::unit_disk());
        assert!(parse_domain(r#"{"type":"disk","center":[0,0],"radius":-1}"#).is_err());
        assert!(parse_domain("no-such-thing").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
