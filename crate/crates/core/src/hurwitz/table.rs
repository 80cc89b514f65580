//! Tabulated `η_{ℂ∖{0,1}}`.
//!
//! The anharmonic maps permuting `{0, 1, ∞}`, and complex conjugation, are
//! automorphisms of `ℂ∖{0,1}`, so the ratio `H = η/λ` of the Hurwitz and
//! hyperbolic densities is invariant under them. In the modular variable
//! (`v = λ(τ)`) these maps are exactly the action of `SL(2, ℤ)` and
//! `τ ↦ −τ̄`, so `H` is a function on
//!
//! ```text
//! F = { 0 ≤ Re τ ≤ 1/2, |τ| ≥ 1 }.
//! ```
//!
//! Writing `τ = x + i y` and `σ = √(1 − x²) / y ∈ (0, 1]`, we tabulate
//! `P(x, σ) = 8H / (π y)`. The cusp `σ → 0` is the puncture, where
//! `λ ≈ 1/(|v| log(16/|v|))`, `|v| ≈ 16 e^{−π y}` and `η ≈ 1/(8|v|)`, so
//! `P → 1` there and `P` is smooth in `σ`. `η = H λ` is then recovered with
//! the closed-form `λ_{ℂ∖{0,1}}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{extract_by_solving, HurwitzConfig};
use crate::error::{MetricError, Result};
use crate::geometry::{DomainSpec, Point};
use crate::modular::{self, Tau};

/// One tabulated value with its relative error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableNode {
    pub x: f64,
    pub sigma: f64,
    pub p: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eta01Table {
    /// `Re τ` nodes, `k/(2m)` for `k = 0..=m`.
    pub x: Vec<f64>,
    /// `σ` nodes in increasing order, excluding the cusp `σ = 0`.
    pub sigma: Vec<f64>,
    /// `p[i][j]` at `(x[j], sigma[i])`.
    pub p: Vec<Vec<f64>>,
    /// Relative error bars, same layout.
    pub error: Vec<Vec<f64>>,
    /// Solver settings the values were produced with.
    pub config: HurwitzConfig,
}

const BUILTIN: &str = include_str!("../../data/eta01_table.json");

/// Relative interpolation error of the table away from its nodes, bounded
/// by comparison with direct extractions.
pub const INTERPOLATION_ERROR: f64 = 1e-3;

/// Intervals of `[0, 1/2]` in `Re τ`.
pub const TABLE_X_STEPS: usize = 6;

/// Intervals of `[0, 1]` in `σ`.
pub const TABLE_SIGMA_STEPS: usize = 8;

/// The modulus with table coordinates `(x, σ)`.
pub fn table_tau(x: f64, sigma: f64) -> Complex64 {
    Complex64::new(x, (1.0 - x * x).sqrt() / sigma)
}

/// Moves τ into `F` by `SL(2, ℤ)` and `τ ↦ −τ̄`, which leave `H` unchanged.
fn reduce(mut t: Complex64) -> Complex64 {
    for _ in 0..10_000 {
        t.re -= t.re.round();
        if t.norm_sqr() < 1.0 - 1e-15 {
            t = -t.inv();
        } else {
            break;
        }
    }
    Complex64::new(t.re.abs(), t.im)
}

/// Table coordinates `(x, σ, y)` of `v ∈ ℂ∖{0,1}`.
fn coordinates(v: Point) -> Result<(f64, f64, f64)> {
    let t = reduce(modular::inverse_lambda(v)?.value);
    let x = t.re.min(0.5);
    Ok((x, ((1.0 - x * x).sqrt() / t.im).min(1.0), t.im))
}

/// Cubic Lagrange interpolation through the four nodes nearest to `at`.
fn lagrange4(xs: &[f64], ys: &[f64], at: f64) -> f64 {
    let n = xs.len();
    let i = xs.partition_point(|v| *v < at).clamp(2, n - 2);
    let (xs, ys) = (&xs[i - 2..i + 2], &ys[i - 2..i + 2]);
    let mut s = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (at - xs[b]) / (xs[a] - xs[b]);
            }
        }
        s += w * ys[a];
    }
    s
}

impl Eta01Table {
    /// The table shipped with the library.
    pub fn builtin() -> &'static Eta01Table {
        static TABLE: std::sync::OnceLock<Eta01Table> = std::sync::OnceLock::new();
        TABLE.get_or_init(|| serde_json::from_str(BUILTIN).expect("bundled table parses"))
    }

    /// Computes every node by extraction; `progress` is called after each.
    pub fn generate(
        config: &HurwitzConfig,
        mut progress: impl FnMut(&TableNode),
    ) -> Result<Eta01Table> {
        let x: Vec<f64> = (0..=TABLE_X_STEPS)
            .map(|k| 0.5 * k as f64 / TABLE_X_STEPS as f64)
            .collect();
        let sigma: Vec<f64> = (1..=TABLE_SIGMA_STEPS)
            .map(|k| k as f64 / TABLE_SIGMA_STEPS as f64)
            .collect();
        let domain = DomainSpec::twice_punctured_standard();
        let mut p = vec![vec![0.0; x.len()]; sigma.len()];
        let mut error = p.clone();
        for (i, &s) in sigma.iter().enumerate() {
            for (j, &xj) in x.iter().enumerate() {
                let tau = table_tau(xj, s);
                let v = modular::modular_lambda(&Tau::new(tau)?);
                let est = extract_by_solving(&domain, v, config)?;
                let lambda = modular::density_c01(v)?.value;
                let node = TableNode {
                    x: xj,
                    sigma: s,
                    p: 8.0 * est.value / (lambda * PI * tau.im),
                    error: est.relative_error(),
                };
                p[i][j] = node.p;
                error[i][j] = node.error;
                progress(&node);
            }
        }
        Ok(Eta01Table {
            x,
            sigma,
            p,
            error,
            config: config.clone(),
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = TableNode> + '_ {
        self.sigma.iter().enumerate().flat_map(move |(i, &sigma)| {
            self.x.iter().enumerate().map(move |(j, &x)| TableNode {
                x,
                sigma,
                p: self.p[i][j],
                error: self.error[i][j],
            })
        })
    }

    /// Interpolated `P(x, σ)`, with `P = 1` at the cusp. `P` is even about
    /// `x = 0`, which supplies a mirror node there. The reflection about
    /// `x = 1/2` keeps `y` rather than `σ`, so that end is one-sided.
    pub fn p_at(&self, x: f64, sigma: f64) -> f64 {
        let mut ss = vec![0.0];
        ss.extend(&self.sigma);
        let row = |j: usize| -> Vec<f64> {
            std::iter::once(1.0).chain(self.p.iter().map(|r| r[j])).collect()
        };
        let mut xs = vec![-self.x[1]];
        xs.extend(&self.x);
        let mut values = vec![lagrange4(&ss, &row(1), sigma)];
        values.extend((0..self.x.len()).map(|j| lagrange4(&ss, &row(j), sigma)));
        lagrange4(&xs, &values, x)
    }

    /// Largest tabulated relative error bar.
    pub fn max_error(&self) -> f64 {
        self.error.iter().flatten().fold(0.0, |a, b| a.max(*b))
    }

    /// `η_{ℂ∖{0,1}}(v) / λ_{ℂ∖{0,1}}(v)`.
    pub fn ratio(&self, v: Point) -> Result<f64> {
        let (x, sigma, y) = coordinates(v)?;
        Ok(self.p_at(x, sigma) * PI * y / 8.0)
    }

    /// `η_{ℂ∖{0,1}}(v)`.
    pub fn eta01(&self, v: Point) -> Result<f64> {
        Ok(self.ratio(v)? * modular::density_c01(v)?.value)
    }

    /// `η_{ℂ∖{a,b}}(w)` through the affine reduction `w ↦ (w − a)/(b − a)`.
    pub fn eta_two(&self, a: Point, b: Point, w: Point) -> Result<f64> {
        if a == b {
            return Err(MetricError::DegeneratePair);
        }
        if w == a || w == b {
            return Err(MetricError::PunctureValue(w));
        }
        let d = b - a;
        Ok(self.eta01((w - a) / d)? / d.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn reduction_lands_in_the_modular_triangle() {
        for v in [pt(-1.0, 0.0), pt(3.0, 2.0), pt(0.5, -0.1), pt(0.9, 0.05), pt(-20.0, 7.0)] {
            let (x, sigma, y) = coordinates(v).unwrap();
            assert!((0.0..=0.5).contains(&x) && sigma > 0.0 && sigma <= 1.0 && y > 0.8);
        }
        // −1 and 1/2 lie in one orbit, at τ = i
        for v in [pt(-1.0, 0.0), pt(0.5, 0.0), pt(2.0, 0.0)] {
            let (x, sigma, _) = coordinates(v).unwrap();
            assert!(x.abs() < 1e-9 && (sigma - 1.0).abs() < 1e-9, "{v}: {x} {sigma}");
        }
        assert!(coordinates(pt(1.0, 0.0)).is_err());
    }

    #[test]
    fn builtin_table_reproduces_its_nodes() {
        let table = Eta01Table::builtin();
        for node in table.nodes() {
            let v = modular::modular_lambda(&Tau::new(table_tau(node.x, node.sigma)).unwrap());
            let (x, sigma, _) = coordinates(v).unwrap();
            let p = table.p_at(x, sigma);
            assert!((p - node.p).abs() < 1e-7 * node.p, "{node:?}: {p}");
        }
    }

    #[test]
    fn builtin_table_respects_the_comparisons() {
        let table = Eta01Table::builtin();
        for v in [pt(-1.0, 0.0), pt(0.3, 0.2), pt(1e-4, 1e-4), pt(0.5, 0.8), pt(7.0, -3.0)] {
            let eta = table.eta01(v).unwrap();
            let lambda = modular::density_c01(v).unwrap().value;
            let delta = v.norm().min((v - 1.0).norm());
            let tol = 1.0 + 3.0 * table.max_error();
            // λ ≤ η, and 1/(8δ) ≤ η ≤ 2/δ
            assert!(lambda <= eta * tol, "{v}: {lambda} {eta}");
            assert!(1.0 / (8.0 * delta) <= eta * tol, "{v}");
            assert!(eta <= 2.0 / delta * tol, "{v}");
        }
    }

    #[test]
    fn interpolation_matches_direct_extractions() {
        // (x, σ, η_{ℂ∖{0,1}}) from independent log-polar extractions at
        // points between the nodes
        let direct = [
            (0.04, 0.06, 4.169754489129359e20),
            (0.04, 0.19, 130428.28672342292),
            (0.21, 0.31, 201.02386931801377),
            (0.46, 0.44, 7.050054223991729),
            (0.125, 0.5625, 3.6512568328399553),
            (0.29, 0.69, 1.4309914908730594),
            (0.375, 0.8125, 0.8183854034989156),
            (0.46, 0.94, 0.4973062260951331),
            (0.21, 0.94, 0.8863239272475705),
            (0.0, 0.09, 11619255386104.926),
        ];
        let table = Eta01Table::builtin();
        for (x, sigma, eta) in direct {
            let v = modular::modular_lambda(&Tau::new(table_tau(x, sigma)).unwrap());
            let got = table.eta01(v).unwrap();
            assert!((got / eta - 1.0).abs() < INTERPOLATION_ERROR, "({x}, {sigma}): {got} vs {eta}");
        }
    }

    #[test]
    fn lagrange_reproduces_cubics() {
        let xs = [0.0, 0.1, 0.3, 0.4, 0.7, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        for x in [0.05, 0.35, 0.9] {
            assert!((lagrange4(&xs, &ys, x) - (x * x * x - x)).abs() < 1e-12);
        }
    }
}
