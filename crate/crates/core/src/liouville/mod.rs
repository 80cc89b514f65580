//! Finite-difference solver for the curvature −1 Liouville equation
//! `Δu = e^{2u}`, `u = log λ`, on truncated plane domains.
//!
//! A solve runs on a uniform grid in a conformal [`Chart`]:
//!
//! * **Cartesian**: the default, used for λ on a square viewport. Bounded
//!   domains are covered by their bounding box. Domains with compact
//!   complement are cut at a far circle that carries the cusp data of
//!   infinity.
//! * **Log-polar**: centered at a puncture `w`, with `ζ = log(z − w)`.
//!   Resolution then grows without bound towards `w`, which is what the
//!   Hurwitz extraction needs. The inner end of the strip carries the exact
//!   cusp condition `∂ₛũ = e^{ũ}`. The outer end carries `∂ₛũ = −e^{ũ}` when
//!   the complement is compact.
//!
//! Continua carry Dirichlet data from the comparison-domain densities of
//! [`model`]. A puncture `p` is excised by a ring of radius ε and covered by
//! a log-polar patch. The patch reaches from deep inside the cusp, where it
//! carries `∂ₛũ = e^{ũ}`, out to a circle well clear of ε. The main grid and
//! the patches exchange Dirichlet data by alternating Schwarz iteration.
//! Infinity is handled the same way by a patch outside the far circle. Each
//! patch fixes the cusp shape only, so the cusp scale is set by the global
//! solution.

mod anderson;
pub mod grid;
pub mod io;
pub mod model;
mod newton;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::geometry::{BoundaryComponent, DomainSpec, Point};
use crate::modular::DensityValue;

pub use grid::{Chart, Grid, NodeKind};
pub use model::{RingData, RingKind};

use anderson::Anderson;
use model::{continuum_density, continuum_piece, Piece};
use newton::System;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Nodes per side of a Cartesian grid.
    pub grid: usize,
    /// Angular nodes of a log-polar grid; the radial spacing matches.
    pub theta_nodes: usize,
    /// Angular nodes of the cusp patches.
    pub patch_theta_nodes: usize,
    /// Puncture ring radius ε. `None` uses `ring_factor` local spacings.
    pub puncture_ring_radius: Option<f64>,
    pub ring_factor: f64,
    /// Far-circle radius for domains with compact complement. `None` uses
    /// `3 (diam + 1)` where `diam` is the complement diameter.
    pub truncation_radius: Option<f64>,
    /// Bound on the residual sup-norm in grid units, `h²|Δ_h ũ − e^{2ũ}|`.
    pub newton_tolerance: f64,
    pub max_newton_iters: usize,
    pub damping: f64,
    /// Maximum number of Schwarz exchanges between grid and patches.
    pub schwarz_rounds: usize,
    /// Exchanges stop once no ring value of `u` changes by more than this.
    pub schwarz_tolerance: f64,
    /// Puncture patches end at this fraction of the distance to the nearest
    /// other boundary feature.
    pub patch_fraction: f64,
    /// Harmonics in the initial ring data and in the reported fits.
    pub harmonics: usize,
    /// Interior nodes keep this many local spacings from continua.
    pub boundary_layer: f64,
    /// Log-polar strip starts at this fraction of the distance from the
    /// center to the rest of the boundary.
    pub inner_radius_factor: f64,
    /// Log-polar strip ends at this multiple of the complement extent
    /// (compact complements only).
    pub outer_radius_factor: f64,
    /// Also solve at half resolution and attach a Richardson error estimate.
    pub estimate_error: bool,
    /// Relative residual floor for the inner conjugate gradient solves.
    pub cg_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: 513,
            theta_nodes: 256,
            patch_theta_nodes: 128,
            puncture_ring_radius: None,
            ring_factor: 4.0,
            truncation_radius: None,
            newton_tolerance: 1e-8,
            max_newton_iters: 60,
            damping: 1.0,
            schwarz_rounds: 60,
            schwarz_tolerance: 1e-8,
            patch_fraction: 0.6,
            harmonics: 4,
            boundary_layer: 2.0,
            inner_radius_factor: 1e-4,
            outer_radius_factor: 1e3,
            estimate_error: true,
            cg_tolerance: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MetricError::InvalidArgument(m.to_string()));
        if self.grid < 9 || self.grid % 2 == 0 {
            return bad("grid must be odd and at least 9");
        }
        let even = |n: usize| n >= 16 && n % 2 == 0;
        if !even(self.theta_nodes) || !even(self.patch_theta_nodes) {
            return bad("theta_nodes and patch_theta_nodes must be even and at least 16");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.newton_tolerance > 0.0) || self.max_newton_iters == 0 {
            return bad("newton_tolerance and max_newton_iters must be positive");
        }
        if !(self.patch_fraction > 0.0 && self.patch_fraction < 0.9) {
            return bad("patch_fraction must lie in (0, 0.9)");
        }
        if self.ring_factor < 2.0 || self.boundary_layer < 1.0 {
            return bad("ring_factor must be >= 2 and boundary_layer >= 1");
        }
        if let Some(e) = self.puncture_ring_radius {
            if !(e > 0.0) {
                return bad("puncture_ring_radius must be positive");
            }
        }
        Ok(())
    }

    /// The configuration of the half-resolution companion solve.
    pub fn coarsened(&self) -> SolverConfig {
        SolverConfig {
            grid: (self.grid - 1) / 2 + 1,
            theta_nodes: self.theta_nodes / 2,
            patch_theta_nodes: (self.patch_theta_nodes / 2).max(16),
            estimate_error: false,
            ..self.clone()
        }
    }

    /// The configuration with halved spacing.
    pub fn refined(&self) -> SolverConfig {
        SolverConfig {
            grid: 2 * self.grid - 1,
            theta_nodes: 2 * self.theta_nodes,
            patch_theta_nodes: 2 * self.patch_theta_nodes,
            estimate_error: false,
            ..self.clone()
        }
    }
}

/// Gridded solution `u = log λ` together with its solve metadata.
#[derive(Debug, Clone)]
pub struct DensityField {
    pub grid: Grid,
    pub domain: DomainSpec,
    /// Final residual sup-norm in grid units.
    pub convergence_residual: f64,
    /// Richardson estimate of the relative error of λ, `NaN` when absent.
    pub estimated_discretization_error: f64,
    /// Excised rings, punctures first, then the far ring. `log_rho` and the
    /// harmonics are fitted from the final solution.
    pub rings: Vec<RingData>,
    /// Log-polar patch covering each ring, in the same order.
    pub patches: Vec<Grid>,
    pub newton_iterations: usize,
    pub schwarz_rounds: usize,
    pub config: SolverConfig,
    continua: Vec<BoundaryComponent>,
}

/// Anything that can report a hyperbolic density at a point.
pub trait DensitySource {
    fn density_at(&self, z: Point) -> Result<f64>;
}

impl<F: Fn(Point) -> Result<f64>> DensitySource for F {
    fn density_at(&self, z: Point) -> Result<f64> {
        self(z)
    }
}

impl DensitySource for DensityField {
    fn density_at(&self, z: Point) -> Result<f64> {
        eval_density(self, z).map(|d| d.value)
    }
}

impl DensityField {
    /// The grid responsible for `z`: a patch inside an excised ring or
    /// beyond the far circle, the main grid elsewhere.
    fn grid_for(&self, z: Point) -> Option<&Grid> {
        for (ring, patch) in self.rings.iter().zip(&self.patches) {
            let r = (z - ring.center).norm();
            let (lo, hi) = patch_span(patch);
            let inside = match ring.kind {
                RingKind::Puncture => r < ring.radius,
                RingKind::Far => r > ring.radius,
            };
            if inside {
                return (r >= lo && r <= hi).then_some(patch);
            }
        }
        Some(&self.grid)
    }

    /// Interpolated `u = log λ` at `z`, `None` outside the solved region.
    pub fn log_density(&self, z: Point) -> Option<f64> {
        if !self.domain.contains(z) {
            return None;
        }
        let g = self.grid_for(z)?;
        let (x, y) = g.chart.to_chart(z)?;
        let near = std::ptr::eq(g, &self.grid)
            && continuum_distance(&self.continua, z) < MODEL_BAND * self.spacing_at(z);
        let model = |p: Point| continuum_density(&self.continua, p).map(f64::ln);
        if near {
            if let Some(mz) = model(z) {
                let offset = |i: usize, j: usize| {
                    model(g.node_point(i, j)).unwrap_or(f64::NAN) + g.chart.log_scale(g.x(i))
                };
                if let Some(c) = g.interpolate_relative(x, y, offset).filter(|c| c.is_finite()) {
                    return Some(c + mz);
                }
            }
        }
        Some(g.interpolate(x, y)? - g.chart.log_scale(x))
    }

    /// True when `z` lies in the solved region.
    pub fn covers(&self, z: Point) -> bool {
        self.log_density(z).is_some()
    }

    /// Chart center for log-polar fields.
    pub fn center(&self) -> Option<Point> {
        match self.grid.chart {
            Chart::LogPolar { center } => Some(center),
            Chart::Cartesian => None,
        }
    }

    /// Patch around the puncture `p`, if the solve excised it.
    pub fn patch_at(&self, p: Point) -> Option<&Grid> {
        self.rings
            .iter()
            .zip(&self.patches)
            .find(|(r, _)| r.kind == RingKind::Puncture && r.center == p)
            .map(|(_, g)| g)
    }

    /// Physical spacing of the responsible grid near `z`.
    pub fn spacing_at(&self, z: Point) -> f64 {
        let g = self.grid_for(z).unwrap_or(&self.grid);
        match g.chart {
            Chart::Cartesian => g.h,
            Chart::LogPolar { center } => g.h * (z - center).norm(),
        }
    }
}

/// Within this many spacings of a continuum, interpolation works on the
/// ratio to the boundary model, which carries the `1/d` blow-up.
const MODEL_BAND: f64 = 8.0;

/// Smallest ratio of patch radius to ring radius.
const MIN_OVERLAP: f64 = 3.0;

/// Nodes within this many spacings of a continuum or a puncture ring get a
/// defect correction from the local closed-form model.
const DEFECT_BAND: f64 = 16.0;

/// Radii `[e^{s_min}, e^{s_max}]` spanned by a log-polar grid.
fn patch_span(g: &Grid) -> (f64, f64) {
    (g.x(0).exp(), g.x(g.nx - 1).exp())
}

/// Interpolated density at `z`.
pub fn eval_density(field: &DensityField, z: Point) -> Result<DensityValue> {
    let u = field.log_density(z).ok_or(MetricError::OutOfField(z))?;
    Ok(DensityValue::new(u.exp()))
}

/// Solves for λ on a Cartesian grid.
pub fn solve_density(domain: &DomainSpec, config: &SolverConfig) -> Result<DensityField> {
    solve_in_chart(domain, config, Chart::Cartesian, None)
}

/// Solves for λ on a log-polar grid centered at the puncture `center` of
/// `domain`.
pub fn solve_log_polar(
    domain: &DomainSpec,
    center: Point,
    config: &SolverConfig,
) -> Result<DensityField> {
    solve_in_chart(domain, config, Chart::LogPolar { center }, None)
}

/// λ in closed form where one is known: disks, half-planes, annuli,
/// exteriors of disks and twice punctured planes.
pub fn closed_form_density(domain: &DomainSpec, z: Point) -> Option<f64> {
    if !domain.contains(z) {
        return None;
    }
    match domain {
        DomainSpec::Disk { center, radius } => {
            let r2 = (z - center).norm_sqr() / (radius * radius);
            Some(2.0 / (radius * (1.0 - r2)))
        }
        DomainSpec::HalfPlane { .. } => Some(1.0 / domain.boundary_distance(z).ok()?),
        DomainSpec::Annulus { inner, outer, center } => {
            // covering by the strip 0 < Im ζ < π through log, rescaled
            let r = (z - center).norm();
            let l = (outer / inner).ln();
            Some(PI / (r * l * (PI * (r / inner).ln() / l).sin()))
        }
        DomainSpec::ExteriorDisk { center, radius } => {
            // image of the punctured disk under z ↦ 1/z
            let r = (z - center).norm();
            Some(1.0 / (r * (r / radius).ln()))
        }
        DomainSpec::PuncturedPlane { punctures } => match punctures.as_slice() {
            [a, b] => crate::modular::density_two_punctures(*a, *b, z).ok().map(|d| d.value),
            _ => None,
        },
        _ => None,
    }
}

/// Re-solves with halved spacing, warm-started from `field`. The error
/// estimate of the result compares the two resolutions.
pub fn refine(field: &DensityField) -> Result<DensityField> {
    let cfg = field.config.refined();
    let mut fine = solve_once(&field.domain, &cfg, field.grid.chart, Some(field))?;
    fine.estimated_discretization_error = richardson(&fine, field);
    fine.config.estimate_error = field.config.estimate_error;
    Ok(fine)
}

fn solve_in_chart(
    domain: &DomainSpec,
    config: &SolverConfig,
    chart: Chart,
    warm: Option<&DensityField>,
) -> Result<DensityField> {
    let mut field = solve_once(domain, config, chart, warm)?;
    if config.estimate_error {
        let coarse = solve_once(domain, &config.coarsened(), chart, None)?;
        field.estimated_discretization_error = richardson(&field, &coarse);
    }
    Ok(field)
}

/// Relative error estimate of the finer field, `max |λ_f/λ_c − 1| / 3`
/// over coarse interior nodes clear of rings and continua.
fn richardson(fine: &DensityField, coarse: &DensityField) -> f64 {
    let g = &coarse.grid;
    let continua: Vec<BoundaryComponent> = continua_of(&coarse.domain);
    let mut worst: f64 = 0.0;
    for i in 0..g.nx {
        for j in 0..g.ny {
            let k = g.index(i, j);
            if g.kind[k] != NodeKind::Interior {
                continue;
            }
            let z = g.node_point(i, j);
            let hl = g.local_spacing(i);
            let d_c = continuum_distance(&continua, z);
            if d_c < 4.0 * hl {
                continue;
            }
            let clear = coarse.rings.iter().all(|r| match r.kind {
                RingKind::Puncture => (z - r.center).norm() >= 3.0 * r.radius,
                RingKind::Far => (z - r.center).norm() <= 0.8 * r.radius,
            });
            if !clear {
                continue;
            }
            if let Some(uf) = fine.log_density(z) {
                let uc = g.physical_u(i, j);
                worst = worst.max(((uf - uc).exp() - 1.0).abs());
            }
        }
    }
    worst / 3.0
}

pub(crate) fn continua_of(domain: &DomainSpec) -> Vec<BoundaryComponent> {
    domain
        .boundary_components()
        .into_iter()
        .filter(|c| !c.is_puncture())
        .collect()
}

fn continuum_distance(continua: &[BoundaryComponent], z: Point) -> f64 {
    continua
        .iter()
        .map(|c| c.nearest(z).1)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy)]
enum Feature {
    Continuum,
    Ring(usize),
}

/// Grid layout and boundary features of one solve.
struct Setup {
    grid: Grid,
    continua: Vec<BoundaryComponent>,
    rings: Vec<RingData>,
    patches: Vec<Grid>,
    outer_cusp: bool,
}

impl Setup {
    fn new(domain: &DomainSpec, config: &SolverConfig, chart: Chart) -> Result<Setup> {
        let continua = continua_of(domain);
        let all_punctures = domain.punctures().to_vec();
        let mut punctures = all_punctures.clone();
        let mut outer_cusp = false;
        let mut far: Option<(Point, f64)> = None;
        let grid = match chart {
            Chart::Cartesian => {
                let (center, half) = if let Some((lo, hi)) = domain.bounding_box() {
                    let d = hi - lo;
                    ((lo + hi) / 2.0, d.re.max(d.im) / 2.0)
                } else if let Some((c0, rc)) = domain.complement_extent() {
                    let minimum = 3.0 * (2.0 * rc + 1.0);
                    let r = config.truncation_radius.unwrap_or(minimum);
                    if r < minimum * (1.0 - 1e-12) {
                        return Err(MetricError::InvalidArgument(format!(
                            "truncation radius {r} must exceed 3 (diam + 1) = {minimum}"
                        )));
                    }
                    far = Some((c0, r));
                    (c0, r)
                } else {
                    let c = domain
                        .interior_candidates()
                        .first()
                        .copied()
                        .unwrap_or_default();
                    (c, config.truncation_radius.unwrap_or(10.0))
                };
                let view = half * 1.03;
                let n = config.grid;
                let h = 2.0 * view / (n - 1) as f64;
                Grid::new(chart, n, n, center.re - view, center.im - view, h)
            }
            Chart::LogPolar { center } => {
                if !all_punctures.contains(&center) {
                    return Err(MetricError::InvalidArgument(
                        "log-polar center must be a puncture of the domain".into(),
                    ));
                }
                punctures.retain(|p| *p != center);
                let delta = punctures
                    .iter()
                    .map(|p| (p - center).norm())
                    .fold(continuum_distance(&continua, center), f64::min);
                if !delta.is_finite() {
                    return Err(MetricError::NotHyperbolic);
                }
                let h = std::f64::consts::TAU / config.theta_nodes as f64;
                let s_min = (config.inner_radius_factor * delta).ln();
                let s_max = if domain.has_compact_complement() {
                    outer_cusp = true;
                    let (c0, rc) = domain.complement_extent().unwrap_or((center, delta));
                    (config.outer_radius_factor * ((center - c0).norm() + rc).max(delta)).ln()
                } else if let Some((lo, hi)) = domain.bounding_box() {
                    let corners = [lo, hi, Point::new(lo.re, hi.im), Point::new(hi.re, lo.im)];
                    let reach = corners
                        .iter()
                        .map(|c| (c - center).norm())
                        .fold(0.0, f64::max);
                    (1.05 * reach).ln()
                } else {
                    config.truncation_radius.unwrap_or(200.0 * delta).ln()
                };
                let nx = ((s_max - s_min) / h).ceil() as usize + 1;
                Grid::new(chart, nx, config.theta_nodes, s_min, 0.0, h)
            }
        };

        let hp = std::f64::consts::TAU / config.patch_theta_nodes as f64;
        let mut rings = Vec::new();
        let mut patches = Vec::new();
        for &p in &punctures {
            let clear = all_punctures
                .iter()
                .filter(|q| **q != p)
                .map(|q| (q - p).norm())
                .fold(continuum_distance(&continua, p), f64::min);
            let clear = match far {
                Some((c0, r)) => clear.min(r - (p - c0).norm()),
                None => clear,
            };
            let hl = match chart {
                Chart::Cartesian => grid.h,
                Chart::LogPolar { center } => grid.h * (p - center).norm(),
            };
            let r_out = config.patch_fraction * clear;
            // the ring sits well inside its patch so that the grid–patch
            // exchange contracts
            let eps = config
                .puncture_ring_radius
                .unwrap_or((config.ring_factor * hl).min(r_out / MIN_OVERLAP).max(2.0 * hl));
            if eps < 2.0 * hl * (1.0 - 1e-9) {
                return Err(MetricError::ResolutionError(format!(
                    "ring radius {eps:e} is below two grid spacings ({:e})",
                    2.0 * hl
                )));
            }
            if eps * MIN_OVERLAP > r_out * (1.0 + 1e-9) || eps + 3.0 * hl > r_out {
                return Err(MetricError::ResolutionError(format!(
                    "ring radius {eps:e} around ({}, {}) leaves too little overlap with its \
                     patch; the nearest other boundary feature is {clear:e} away",
                    p.re, p.im
                )));
            }
            let ring = RingData::new(
                RingKind::Puncture,
                p,
                eps,
                (4.0 * clear).ln(),
                config.harmonics,
            );
            let s_hi = r_out.ln();
            let nx = ((s_hi - (config.inner_radius_factor * clear).ln()) / hp).ceil() as usize + 1;
            let mut patch = Grid::new(
                Chart::LogPolar { center: p },
                nx,
                config.patch_theta_nodes,
                s_hi - (nx - 1) as f64 * hp,
                0.0,
                hp,
            );
            fill_patch(&mut patch, &ring, NodeKind::CuspInner, NodeKind::Dirichlet);
            rings.push(ring);
            patches.push(patch);
        }
        if let Some((c0, r)) = far {
            let rc = domain.complement_extent().map_or(1.0, |e| e.1).max(1e-3);
            let ring = RingData::new(RingKind::Far, c0, r, (rc / 3.0).ln(), config.harmonics);
            let s_lo = (0.5 * r).ln();
            let s_hi = (config.outer_radius_factor * r).ln();
            let nx = ((s_hi - s_lo) / hp).ceil() as usize + 1;
            let mut patch = Grid::new(
                Chart::LogPolar { center: c0 },
                nx,
                config.patch_theta_nodes,
                s_lo,
                0.0,
                hp,
            );
            fill_patch(&mut patch, &ring, NodeKind::Dirichlet, NodeKind::CuspOuter);
            rings.push(ring);
            patches.push(patch);
        }
        Ok(Setup {
            grid,
            continua,
            rings,
            patches,
            outer_cusp,
        })
    }

    /// Marks unknowns and the Dirichlet layer; returns the feature that
    /// supplies data to each Dirichlet node.
    fn build_mask(&mut self, domain: &DomainSpec, config: &SolverConfig) -> Vec<(usize, Feature)> {
        let g = &mut self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let log_polar = g.chart.is_periodic();
        for i in 0..nx {
            let hl = g.local_spacing(i);
            for j in 0..ny {
                let z = g.node_point(i, j);
                let mut ok = domain.contains(z)
                    && continuum_distance(&self.continua, z) >= config.boundary_layer * hl;
                if ok {
                    ok = self.rings.iter().all(|r| match r.kind {
                        RingKind::Puncture => (z - r.center).norm() >= r.radius,
                        RingKind::Far => (z - r.center).norm() <= r.radius,
                    });
                }
                let k = g.index(i, j);
                g.kind[k] = if !ok {
                    NodeKind::Excluded
                } else if log_polar && i == 0 {
                    NodeKind::CuspInner
                } else if log_polar && i + 1 == nx {
                    if self.outer_cusp {
                        NodeKind::CuspOuter
                    } else {
                        NodeKind::Excluded
                    }
                } else if !log_polar && (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny) {
                    NodeKind::Excluded
                } else {
                    NodeKind::Interior
                };
            }
        }
        let mut layer = Vec::new();
        for i in 0..nx {
            let hl = g.local_spacing(i);
            for j in 0..ny {
                let k = g.index(i, j);
                if g.kind[k] != NodeKind::Excluded
                    || !g.neighbours(i, j).any(|(m, _)| g.kind[m].is_unknown())
                {
                    continue;
                }
                let z = g.node_point(i, j);
                let mut best = (f64::INFINITY, Feature::Continuum);
                if !self.continua.is_empty() {
                    best.0 = continuum_distance(&self.continua, z) - config.boundary_layer * hl;
                }
                for (r_idx, r) in self.rings.iter().enumerate() {
                    let m = match r.kind {
                        RingKind::Puncture => (z - r.center).norm() - r.radius,
                        RingKind::Far => r.radius - (z - r.center).norm(),
                    };
                    if m < best.0 {
                        best = (m, Feature::Ring(r_idx));
                    }
                }
                g.kind[k] = NodeKind::Dirichlet;
                layer.push((k, best.1));
            }
        }
        layer
    }

    /// Writes model Dirichlet data into the main grid: comparison densities
    /// next to continua and the initial cusp models on rings.
    fn install_models(&mut self, layer: &[(usize, Feature)]) -> Result<()> {
        let g = &mut self.grid;
        for &(k, feature) in layer {
            let (i, j) = (k / g.ny, k % g.ny);
            let z = g.node_point(i, j);
            let u = match feature {
                Feature::Continuum => continuum_density(&self.continua, z)
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .map(f64::ln)
                    .ok_or_else(|| {
                        MetricError::ResolutionError(format!(
                            "no boundary model at ({}, {})",
                            z.re, z.im
                        ))
                    })?,
                Feature::Ring(r) => self.rings[r].u_at(z),
            };
            g.u[k] = u + g.chart.log_scale(g.x(i));
        }
        Ok(())
    }

    /// Ring-layer values of the main grid as read from the patches.
    fn ring_values_from_patches(&self, ring_nodes: &[(usize, usize)]) -> Result<Vec<f64>> {
        let g = &self.grid;
        ring_nodes
            .iter()
            .map(|&(k, r)| {
                let (i, j) = (k / g.ny, k % g.ny);
                let z = g.node_point(i, j);
                let u = self.patches[r].physical_u_at(z).ok_or_else(|| {
                    MetricError::ResolutionError(format!(
                        "ring node ({}, {}) is not covered by its patch",
                        z.re, z.im
                    ))
                })?;
                Ok(u + g.chart.log_scale(g.x(i)))
            })
            .collect()
    }

    /// Copies main-grid values onto the Dirichlet columns of the patches.
    fn feed_patches(&mut self) -> Result<()> {
        for patch in &mut self.patches {
            for i in [0, patch.nx - 1] {
                for j in 0..patch.ny {
                    let k = patch.index(i, j);
                    if patch.kind[k] != NodeKind::Dirichlet {
                        continue;
                    }
                    let z = patch.node_point(i, j);
                    let u = self.grid.physical_u_at(z).ok_or_else(|| {
                        MetricError::ResolutionError(format!(
                            "patch boundary at ({}, {}) is not covered by the grid",
                            z.re, z.im
                        ))
                    })?;
                    patch.u[k] = u + patch.chart.log_scale(patch.x(i));
                }
            }
        }
        Ok(())
    }

    fn initial_guess(&mut self, domain: &DomainSpec, warm: Option<&DensityField>) {
        let all: Vec<Point> = domain.punctures().to_vec();
        let continua = &self.continua;
        let guess = |z: Point| {
            warm.and_then(|w| w.log_density(z)).unwrap_or_else(|| {
                let d = all
                    .iter()
                    .map(|p| (z - p).norm())
                    .fold(continuum_distance(continua, z), f64::min);
                std::f64::consts::LN_2 - d.ln()
            })
        };
        let g = &mut self.grid;
        for i in 0..g.nx {
            let ls = g.chart.log_scale(g.x(i));
            for j in 0..g.ny {
                let k = g.index(i, j);
                if g.kind[k].is_unknown() {
                    g.u[k] = guess(g.node_point(i, j)) + ls;
                }
            }
        }
        if let Some(w) = warm {
            for patch in &mut self.patches {
                for i in 0..patch.nx {
                    let ls = patch.chart.log_scale(patch.x(i));
                    for j in 0..patch.ny {
                        let k = patch.index(i, j);
                        if let Some(u) = w.log_density(patch.node_point(i, j)) {
                            patch.u[k] = u + ls;
                        }
                    }
                }
            }
        }
    }

    /// Ring models refitted from the patches: the cusp scale deep in the
    /// cusp, the harmonics on the ring itself.
    fn fitted_rings(&self) -> Vec<RingData> {
        self.rings
            .iter()
            .zip(&self.patches)
            .map(|(ring, patch)| {
                let i = match ring.kind {
                    RingKind::Puncture => 4,
                    RingKind::Far => patch.nx - 5,
                };
                let r = patch.x(i).exp();
                let u: Vec<f64> = (0..patch.ny).map(|j| patch.physical_u(i, j)).collect();
                let mut deep = ring.fitted(r, &u, None);
                deep.cos.iter_mut().for_each(|c| *c = 0.0);
                deep.sin.iter_mut().for_each(|c| *c = 0.0);
                let on_ring: Option<Vec<f64>> = ring
                    .circle(ring.radius)
                    .iter()
                    .map(|z| patch.physical_u_at(*z))
                    .collect();
                match on_ring {
                    Some(u) => {
                        let shape = deep.fitted(ring.radius, &u, None);
                        RingData {
                            log_rho: deep.log_rho,
                            ..shape
                        }
                    }
                    None => deep,
                }
            })
            .collect()
    }
}

/// Installs `σ_k = h² e^{2m̃_k} − (Δ_h-stencil of m̃)_k` for a local exact
/// solution `m` near continua and puncture rings. The corrected scheme then
/// reproduces `m` exactly, which removes the leading truncation error where
/// `λ` blows up.
fn defect_correction(setup: &Setup, system: &mut System) {
    let g = &setup.grid;
    let h2 = g.h * g.h;
    for i in 0..g.nx {
        let hl = g.local_spacing(i);
        for j in 0..g.ny {
            let k = g.index(i, j);
            if g.kind[k] != NodeKind::Interior {
                continue;
            }
            let z = g.node_point(i, j);
            let piece = if continuum_distance(&setup.continua, z) < DEFECT_BAND * hl {
                continuum_piece(&setup.continua, z).map(|(p, _)| p)
            } else {
                // the single-cusp model is only trusted inside the patch
                setup
                    .rings
                    .iter()
                    .zip(&setup.patches)
                    .find(|(r, patch)| {
                        let d = (z - r.center).norm();
                        r.kind == RingKind::Puncture
                            && d < r.radius + DEFECT_BAND * hl
                            && d < patch_span(patch).1
                    })
                    .map(|(r, _)| r)
                    .map(|r| Piece::Cusp {
                        center: r.center,
                        log_rho: r.log_rho,
                    })
            };
            let Some(piece) = piece else { continue };
            let m = |ii: usize, jj: usize| {
                piece
                    .density(g.node_point(ii, jj))
                    .map(|v| v.ln() + g.chart.log_scale(g.x(ii)))
            };
            let Some(mk) = m(i, j) else { continue };
            let mut stencil = 0.0;
            let mut ok = true;
            for (n, _) in g.neighbours(i, j) {
                match m(n / g.ny, n % g.ny) {
                    Some(v) => stencil += v - mk,
                    None => ok = false,
                }
            }
            if ok {
                system.add_source(k, h2 * (2.0 * mk).exp() - stencil);
            }
        }
    }
}

/// Initialises a log-polar patch from a ring model, with the given kinds on
/// its inner and outer columns.
fn fill_patch(patch: &mut Grid, ring: &RingData, inner: NodeKind, outer: NodeKind) {
    for i in 0..patch.nx {
        let kind = if i == 0 {
            inner
        } else if i + 1 == patch.nx {
            outer
        } else {
            NodeKind::Interior
        };
        let ls = patch.chart.log_scale(patch.x(i));
        for j in 0..patch.ny {
            let k = patch.index(i, j);
            patch.kind[k] = kind;
            patch.u[k] = ring.u_at(patch.node_point(i, j)) + ls;
        }
    }
}

fn solve_once(
    domain: &DomainSpec,
    config: &SolverConfig,
    chart: Chart,
    warm: Option<&DensityField>,
) -> Result<DensityField> {
    config.validate()?;
    domain.validate()?;
    if !domain.is_hyperbolic() {
        return Err(MetricError::NotHyperbolic);
    }
    let mut setup = Setup::new(domain, config, chart)?;
    let layer = setup.build_mask(domain, config);
    if setup.grid.count(NodeKind::Interior) == 0 {
        return Err(MetricError::ResolutionError(
            "no interior nodes; grid too coarse for the domain".into(),
        ));
    }
    setup.initial_guess(domain, warm);
    let mut system = System::new(&setup.grid);
    defect_correction(&setup, &mut system);
    let patch_systems: Vec<System> = setup.patches.iter().map(System::new).collect();
    let newton = |sys: &System, g: &mut Grid| {
        sys.newton(
            g,
            config.newton_tolerance,
            config.max_newton_iters,
            config.damping,
            config.cg_tolerance,
        )
    };

    setup.install_models(&layer)?;
    let mut stats = newton(&system, &mut setup.grid)?;
    let mut newton_iterations = stats.iterations;
    let mut rounds = 0;
    if !setup.patches.is_empty() {
        let ring_nodes: Vec<(usize, usize)> = layer
            .iter()
            .filter_map(|&(k, f)| match f {
                Feature::Ring(r) => Some((k, r)),
                Feature::Continuum => None,
            })
            .collect();
        let mut x: Vec<f64> = ring_nodes.iter().map(|&(k, _)| setup.grid.u[k]).collect();
        let mut accel = Anderson::new(5);
        let mut change = f64::INFINITY;
        while rounds < config.schwarz_rounds {
            setup.feed_patches()?;
            let patch_iters = patch_systems
                .par_iter()
                .zip(setup.patches.par_iter_mut())
                .map(|(sys, patch)| newton(sys, patch).map(|s| s.iterations))
                .collect::<Result<Vec<_>>>()?;
            newton_iterations += patch_iters.iter().sum::<usize>();
            let gx = setup.ring_values_from_patches(&ring_nodes)?;
            change = gx
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            rounds += 1;
            x = if change < config.schwarz_tolerance {
                gx
            } else {
                accel.next(&x, &gx)
            };
            for (&(k, _), v) in ring_nodes.iter().zip(&x) {
                setup.grid.u[k] = *v;
            }
            stats = newton(&system, &mut setup.grid)?;
            newton_iterations += stats.iterations;
            if change < config.schwarz_tolerance {
                break;
            }
        }
        if change > 1e3 * config.schwarz_tolerance {
            return Err(MetricError::NonConvergence {
                what: "grid-patch coupling",
                iterations: rounds,
            });
        }
        setup.feed_patches()?;
        let patch_iters = patch_systems
            .par_iter()
            .zip(setup.patches.par_iter_mut())
            .map(|(sys, patch)| newton(sys, patch).map(|s| s.iterations))
            .collect::<Result<Vec<_>>>()?;
        newton_iterations += patch_iters.iter().sum::<usize>();
    }

    let rings = setup.fitted_rings();
    Ok(DensityField {
        grid: setup.grid,
        domain: domain.clone(),
        convergence_residual: stats.residual,
        estimated_discretization_error: f64::NAN,
        rings,
        patches: setup.patches,
        newton_iterations,
        schwarz_rounds: rounds,
        config: config.clone(),
        continua: setup.continua,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;
    use crate::modular::density_c01;

    fn quick() -> SolverConfig {
        SolverConfig {
            grid: 129,
            estimate_error: false,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn disk_matches_closed_form_on_coarse_grid() {
        let f = solve_density(&DomainSpec::unit_disk(), &quick()).unwrap();
        for z in [pt(0.0, 0.0), pt(0.5, 0.2), pt(-0.3, -0.7)] {
            let want = 2.0 / (1.0 - z.norm_sqr());
            let got = eval_density(&f, z).unwrap().value;
            assert!((got / want - 1.0).abs() < 5e-3, "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn node_values_are_reproduced() {
        let f = solve_density(&DomainSpec::unit_disk(), &quick()).unwrap();
        let g = &f.grid;
        let (i, j) = (g.nx / 2 + 3, g.ny / 2 - 5);
        let z = g.node_point(i, j);
        assert_eq!(eval_density(&f, z).unwrap().value, g.physical_u(i, j).exp());
    }

    #[test]
    fn twice_punctured_plane_coarse() {
        let cfg = SolverConfig {
            grid: 257,
            ..quick()
        };
        let f = solve_density(&DomainSpec::twice_punctured_standard(), &cfg).unwrap();
        let z = pt(-1.0, 0.0);
        let got = eval_density(&f, z).unwrap().value;
        let want = density_c01(z).unwrap().value;
        assert!((got / want - 1.0).abs() < 0.03, "{got} vs {want}");
    }

    #[test]
    fn closed_forms_agree_with_the_comparison_bounds() {
        let annulus = DomainSpec::Annulus {
            inner: 0.5,
            outer: 1.0,
            center: pt(0.0, 0.0),
        };
        let exterior = DomainSpec::ExteriorDisk {
            center: pt(0.0, 0.0),
            radius: 1.0,
        };
        // λ ≈ 1/δ next to a smooth boundary
        for (d, z) in [
            (&annulus, pt(0.5 + 1e-6, 0.0)),
            (&annulus, pt(0.0, 1.0 - 1e-6)),
            (&exterior, pt(-1.0 - 1e-6, 0.0)),
        ] {
            let l = closed_form_density(d, z).unwrap();
            let delta = d.boundary_distance(z).unwrap();
            assert!((l * delta - 1.0).abs() < 1e-5, "{z}: {}", l * delta);
        }
        // the annulus is symmetric under z ↦ 1/(2 z̄)
        let z = pt(0.6, 0.3);
        let image = 0.5 / z.conj();
        let a = closed_form_density(&annulus, z).unwrap();
        let b = closed_form_density(&annulus, image).unwrap() * 0.5 / z.norm_sqr();
        assert!((a / b - 1.0).abs() < 1e-12);
        assert!(closed_form_density(&annulus, pt(0.1, 0.0)).is_none());
    }

    #[test]
    fn annulus_matches_closed_form() {
        let annulus = DomainSpec::Annulus {
            inner: 0.5,
            outer: 1.0,
            center: pt(0.0, 0.0),
        };
        let f = solve_density(&annulus, &SolverConfig { grid: 257, ..quick() }).unwrap();
        for z in [pt(0.75, 0.0), pt(0.0, -0.6), pt(-0.6, 0.6)] {
            let want = closed_form_density(&annulus, z).unwrap();
            let got = eval_density(&f, z).unwrap().value;
            assert!((got / want - 1.0).abs() < 0.02, "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            solve_density(&DomainSpec::punctured_plane(vec![pt(0.0, 0.0)]), &quick()),
            Err(MetricError::NotHyperbolic)
        ));
        let cfg = SolverConfig {
            truncation_radius: Some(2.0),
            ..quick()
        };
        assert!(solve_density(&DomainSpec::twice_punctured_standard(), &cfg).is_err());
        let cfg = SolverConfig {
            puncture_ring_radius: Some(1e-4),
            ..quick()
        };
        assert!(matches!(
            solve_density(&DomainSpec::twice_punctured_standard(), &cfg),
            Err(MetricError::ResolutionError(_))
        ));
    }
}
