//! Boundary data for the Liouville solver.
//!
//! Next to a continuum boundary component the density is modelled by the
//! density of the simplest domain bounded by that component: a disk, the
//! exterior of a disk, a half-plane or a polygon-corner wedge. All of these
//! contain the true domain, so they are lower bounds for λ. They agree with
//! `1/d` to first order and with the true density to relative `O(d)`.
//!
//! Next to a puncture `p` the density is the cusp
//!
//! ```text
//! u = −log(r L) + Σ_k (a_k cos kθ + b_k sin kθ) f_k(r) / f_k(ε),
//! L = log(ρ/r),  f_k(r) = r^k (1 + 1/(k L)),
//! ```
//!
//! where `r = |z − p|`. The harmonics `f_k` are the exact decaying modes of
//! the equation linearised about the radial cusp. The radial mode `1/L`
//! is a change of ρ. Around infinity the same holds with
//! `L = log(r/ρ∞)` and `f_k(r) = r^{−k}(1 + 1/(kL))`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{edges, BoundaryComponent, Point};

/// Number of angles used when measuring a ring.
pub const RING_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingKind {
    /// A puncture; the domain lies outside the ring.
    Puncture,
    /// The far-field circle; the domain lies inside the ring.
    Far,
}

/// Cusp model installed on a ring of Dirichlet nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingData {
    pub kind: RingKind,
    pub center: Point,
    /// Ring radius: ε for punctures, the truncation radius for the far ring.
    pub radius: f64,
    /// `log ρ`, the cusp scale.
    pub log_rho: f64,
    /// Harmonic coefficients of `u` on the ring, `k = 1, 2, …`.
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl RingData {
    pub fn new(kind: RingKind, center: Point, radius: f64, log_rho: f64, harmonics: usize) -> Self {
        RingData {
            kind,
            center,
            radius,
            log_rho,
            cos: vec![0.0; harmonics],
            sin: vec![0.0; harmonics],
        }
    }

    /// `L(r)`, kept positive.
    fn log_factor(&self, r: f64) -> f64 {
        let l = match self.kind {
            RingKind::Puncture => self.log_rho - r.ln(),
            RingKind::Far => r.ln() - self.log_rho,
        };
        l.max(0.05)
    }

    fn mode(&self, k: usize, r: f64) -> f64 {
        let kf = k as f64;
        let l = self.log_factor(r);
        let p = match self.kind {
            RingKind::Puncture => r.powf(kf),
            RingKind::Far => r.powf(-kf),
        };
        p * (1.0 + 1.0 / (kf * l))
    }

    /// Radial part `−log(r L(r))`.
    pub fn radial_u(&self, r: f64) -> f64 {
        -(r * self.log_factor(r)).ln()
    }

    /// Model log-density at `z`.
    pub fn u_at(&self, z: Point) -> f64 {
        let d = z - self.center;
        let r = d.norm();
        let th = d.arg();
        let mut u = self.radial_u(r);
        for k in 1..=self.cos.len() {
            let scale = self.mode(k, r) / self.mode(k, self.radius);
            let kt = k as f64 * th;
            u += (self.cos[k - 1] * kt.cos() + self.sin[k - 1] * kt.sin()) * scale;
        }
        u
    }

    /// Fits `log ρ` and the harmonics from samples of `u` on circles of
    /// radii `r1 < r2` (`r2 = None` for a single circle). The circle mean of
    /// `1/(rλ)` differs from `L(r)` only at second order in the harmonics,
    /// so two radii are combined with a quadratic model in `r` (punctures)
    /// or in `1/r` (far ring).
    pub fn fitted(&self, r1: f64, u1: &[f64], r2: Option<(f64, &[f64])>) -> RingData {
        let e = |r: f64, u: &[f64]| {
            let m = u.iter().map(|v| (-v).exp()).sum::<f64>() / u.len() as f64 / r;
            match self.kind {
                RingKind::Puncture => m + r.ln(),
                RingKind::Far => m - r.ln(),
            }
        };
        let e1 = e(r1, u1);
        let est = match r2 {
            None => e1,
            Some((r2, u2)) => {
                let e2 = e(r2, u2);
                let (a, b) = match self.kind {
                    RingKind::Puncture => (r1 * r1, r2 * r2),
                    RingKind::Far => (1.0 / (r1 * r1), 1.0 / (r2 * r2)),
                };
                (b * e1 - a * e2) / (b - a)
            }
        };
        let log_rho = match self.kind {
            RingKind::Puncture => est,
            RingKind::Far => -est,
        };
        let mut out = RingData {
            log_rho,
            ..self.clone()
        };
        // harmonics from the circle nearest the ring
        let (rh, uh) = match (self.kind, r2) {
            (RingKind::Far, Some((r2, u2))) => (r2, u2),
            _ => (r1, u1),
        };
        let n = uh.len() as f64;
        let base = out.radial_u(rh);
        for k in 1..=out.cos.len() {
            let (mut a, mut b) = (0.0, 0.0);
            for (m, v) in uh.iter().enumerate() {
                let th = TAU * m as f64 / n;
                let kt = k as f64 * th;
                a += (v - base) * kt.cos();
                b += (v - base) * kt.sin();
            }
            let scale = out.mode(k, out.radius) / out.mode(k, rh);
            out.cos[k - 1] = 2.0 * a / n * scale;
            out.sin[k - 1] = 2.0 * b / n * scale;
        }
        out
    }

    /// Sample points on the circle of radius `r` at angles `2πm/M`.
    pub fn circle(&self, r: f64) -> Vec<Point> {
        (0..RING_SAMPLES)
            .map(|m| self.center + Point::from_polar(r, TAU * m as f64 / RING_SAMPLES as f64))
            .collect()
    }
}

/// A closed-form solution of the Liouville equation, valid on its own
/// domain, used as local boundary model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Disk { center: Point, radius: f64 },
    Exterior { center: Point, radius: f64 },
    /// `{ Re((z − q) n̄) > 0 }` for a unit normal `n`.
    HalfPlane { q: Point, n: Point },
    /// Wedge with apex `v`, swept counter-clockwise by `alpha` from the ray
    /// through `first`.
    Wedge { v: Point, first: Point, alpha: f64 },
    /// Radial cusp `1/(r log(ρ/r))` around a puncture.
    Cusp { center: Point, log_rho: f64 },
}

impl Piece {
    /// Density at `z`, `None` outside the piece's domain.
    pub fn density(&self, z: Point) -> Option<f64> {
        match *self {
            Piece::Disk { center, radius } => {
                let r = (z - center).norm();
                (r < radius).then(|| 2.0 * radius / (radius * radius - r * r))
            }
            Piece::Exterior { center, radius } => {
                let r = (z - center).norm();
                (r > radius).then(|| 1.0 / (r * (r / radius).ln()))
            }
            Piece::HalfPlane { q, n } => {
                let s = ((z - q) * n.conj()).re;
                (s > 0.0).then(|| 1.0 / s)
            }
            Piece::Wedge { v, first, alpha } => {
                let phi = ((z - v) / (first - v)).arg().rem_euclid(TAU);
                if phi <= 0.0 || phi >= alpha {
                    return None;
                }
                let r = (z - v).norm();
                Some(PI / alpha / (r * (PI * phi / alpha).sin()))
            }
            Piece::Cusp { center, log_rho } => {
                let r = (z - center).norm();
                let l = log_rho - r.ln();
                (r > 0.0 && l > 0.0).then(|| 1.0 / (r * l))
            }
        }
    }
}

/// Interior angle at each vertex for a polygon given in either orientation.
fn interior_angles(vertices: &[Point]) -> Vec<f64> {
    let n = vertices.len();
    let area: f64 = edges(vertices).map(|(a, b)| (a.conj() * b).im).sum();
    let ccw = area > 0.0;
    (0..n)
        .map(|i| {
            let v = vertices[i];
            let prev = vertices[(i + n - 1) % n];
            let next = vertices[(i + 1) % n];
            let a = ((prev - v) / (next - v)).arg().rem_euclid(TAU);
            if ccw {
                a
            } else {
                TAU - a
            }
        })
        .collect()
}

/// Candidate pieces of a polygon near `z`: the half-plane of the nearest
/// edge or the wedges at the nearest vertex.
fn polygon_pieces(vertices: &[Point], z: Point) -> Vec<Piece> {
    let n = vertices.len();
    let area: f64 = edges(vertices).map(|(a, b)| (a.conj() * b).im).sum();
    let ccw = area > 0.0;
    let angles = interior_angles(vertices);
    // the interior lies counter-clockwise from the outgoing edge of a
    // counter-clockwise polygon and from the incoming edge otherwise
    let wedge = |i: usize| Piece::Wedge {
        v: vertices[i],
        first: if ccw {
            vertices[(i + 1) % n]
        } else {
            vertices[(i + n - 1) % n]
        },
        alpha: angles[i],
    };
    let mut best = (f64::INFINITY, 0usize, 0.0f64);
    for (i, (a, b)) in edges(vertices).enumerate() {
        let ab = b - a;
        let t = (((z - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
        let d = (z - (a + ab * t)).norm();
        if d < best.0 {
            best = (d, i, t);
        }
    }
    let (d, i, t) = best;
    let j = (i + 1) % n;
    let (a, b) = (vertices[i], vertices[j]);
    let q = a + (b - a) * t;
    let mut out = Vec::new();
    if t <= 0.0 {
        out.push(wedge(i));
    } else if t >= 1.0 {
        out.push(wedge(j));
    } else {
        out.push(Piece::HalfPlane {
            q,
            n: (z - q) / d,
        });
        for k in [i, j] {
            if angles[k] < PI {
                out.push(wedge(k));
            }
        }
    }
    if d > 0.0 && out.iter().all(|p| p.density(z).is_none()) {
        // tangent half-plane at the nearest point as a last resort
        out.push(Piece::HalfPlane {
            q,
            n: (z - q) / d,
        });
    }
    out
}

/// Comparison pieces bounded by one continuum component near `z`.
fn component_pieces(c: &BoundaryComponent, z: Point) -> Vec<Piece> {
    match c {
        BoundaryComponent::Circle { center, radius } => {
            let (center, radius) = (*center, *radius);
            if (z - center).norm() < radius {
                vec![Piece::Disk { center, radius }]
            } else {
                vec![Piece::Exterior { center, radius }]
            }
        }
        BoundaryComponent::Line {
            normal_angle,
            offset,
        } => {
            let n = Point::from_polar(1.0, *normal_angle);
            vec![Piece::HalfPlane { q: n * offset, n }]
        }
        BoundaryComponent::Polygon { vertices } => polygon_pieces(vertices, z),
        BoundaryComponent::Puncture(_) => Vec::new(),
    }
}

/// The comparison piece with the largest density at `z`. Each piece's
/// domain contains the true domain, so each density bounds λ from below.
pub fn continuum_piece(continua: &[BoundaryComponent], z: Point) -> Option<(Piece, f64)> {
    continua
        .iter()
        .flat_map(|c| component_pieces(c, z))
        .filter_map(|p| p.density(z).map(|v| (p, v)))
        .fold(None, |acc: Option<(Piece, f64)>, (p, v)| match acc {
            Some((_, a)) if a >= v => acc,
            _ => Some((p, v)),
        })
}

/// Density of the comparison domain bounded by one continuum component, or
/// `None` if `z` lies on the component.
pub fn component_density(c: &BoundaryComponent, z: Point) -> Option<f64> {
    continuum_piece(std::slice::from_ref(c), z).map(|(_, v)| v)
}

/// Best continuum model density at `z`.
pub fn continuum_density(continua: &[BoundaryComponent], z: Point) -> Option<f64> {
    continuum_piece(continua, z).map(|(_, v)| v)
}
