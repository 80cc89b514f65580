//! Damped Newton iteration for the discrete Liouville equation with a
//! MIC(0)-preconditioned conjugate gradient inner solver.
//!
//! The residual is measured in grid units:
//!
//! ```text
//! G_k = Σ_m c_km ũ_m − s_k ũ_k − w_k h² e^{2ũ_k} − r_k h e^{ũ_k} + σ_k,
//! ```
//!
//! which is `h²(Δ_h ũ − e^{2ũ})` on interior rows. On cusp rows it is the
//! same quantity with a ghost node eliminated through `∂ₛũ = ±e^{ũ}` and the
//! row halved to keep the Jacobian symmetric. `−∂G/∂ũ` is a symmetric
//! M-matrix. The constant `σ_k` is zero unless a defect correction is
//! installed.

use crate::error::{MetricError, Result};

use super::grid::{Grid, NodeKind};

const NONE: u32 = u32::MAX;
const MIC_RELAXATION: f64 = 0.95;
const MAX_CG_ITERS: usize = 5000;
const MAX_BACKTRACKS: usize = 12;
/// A line search that stalls within this factor of the tolerance has hit
/// round-off and is accepted.
const STALL_FACTOR: f64 = 1e3;

/// Sparse structure of the unknowns of a grid.
pub(crate) struct System {
    pub nodes: Vec<usize>,
    nbr: Vec<[u32; 4]>,
    coef: Vec<[f64; 4]>,
    dir_node: Vec<[u32; 4]>,
    dir_coef: Vec<[f64; 4]>,
    diag_sum: Vec<f64>,
    weight: Vec<f64>,
    robin: Vec<f64>,
    source: Vec<f64>,
    h: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
    pub cg_iterations: usize,
}

impl System {
    pub fn new(grid: &Grid) -> Self {
        let mut slot = vec![NONE; grid.kind.len()];
        let mut nodes = Vec::new();
        for (k, kind) in grid.kind.iter().enumerate() {
            if kind.is_unknown() {
                slot[k] = nodes.len() as u32;
                nodes.push(k);
            }
        }
        let n = nodes.len();
        let mut sys = System {
            nbr: vec![[NONE; 4]; n],
            coef: vec![[0.0; 4]; n],
            dir_node: vec![[NONE; 4]; n],
            dir_coef: vec![[0.0; 4]; n],
            diag_sum: vec![0.0; n],
            weight: vec![1.0; n],
            robin: vec![0.0; n],
            source: vec![0.0; n],
            h: grid.h,
            nodes,
        };
        for (row, &k) in sys.nodes.iter().enumerate() {
            let (i, j) = (k / grid.ny, k % grid.ny);
            let cusp = matches!(grid.kind[k], NodeKind::CuspInner | NodeKind::CuspOuter);
            if cusp {
                sys.weight[row] = 0.5;
                sys.robin[row] = 1.0;
            }
            let (mut a, mut b) = (0, 0);
            for (m, along_x) in grid.neighbours(i, j) {
                let c = if cusp && !along_x { 0.5 } else { 1.0 };
                sys.diag_sum[row] += c;
                if slot[m] != NONE {
                    sys.nbr[row][a] = slot[m];
                    sys.coef[row][a] = c;
                    a += 1;
                } else if grid.kind[m] == NodeKind::Dirichlet {
                    sys.dir_node[row][b] = m as u32;
                    sys.dir_coef[row][b] = c;
                    b += 1;
                }
            }
        }
        sys
    }

    /// Constant added to the residual of the unknown stored at grid index
    /// `k`, for defect correction.
    pub fn add_source(&mut self, k: usize, value: f64) {
        if let Ok(row) = self.nodes.binary_search(&k) {
            self.source[row] += value;
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    fn dirichlet_terms(&self, grid: &Grid) -> Vec<f64> {
        (0..self.len())
            .map(|row| {
                let mut s = self.source[row];
                for t in 0..4 {
                    let m = self.dir_node[row][t];
                    if m != NONE {
                        s += self.dir_coef[row][t] * grid.u[m as usize];
                    }
                }
                s
            })
            .collect()
    }

    fn residual(&self, x: &[f64], dir: &[f64], out: &mut [f64]) -> f64 {
        let h2 = self.h * self.h;
        let mut sup: f64 = 0.0;
        for row in 0..self.len() {
            let mut s = dir[row] - self.diag_sum[row] * x[row];
            for t in 0..4 {
                let m = self.nbr[row][t];
                if m != NONE {
                    s += self.coef[row][t] * x[m as usize];
                }
            }
            let e = x[row].exp();
            s -= self.weight[row] * h2 * e * e + self.robin[row] * self.h * e;
            out[row] = s;
            sup = sup.max(if s.is_finite() { s.abs() } else { f64::INFINITY });
        }
        sup
    }

    fn jacobian_diag(&self, x: &[f64]) -> Vec<f64> {
        let h2 = self.h * self.h;
        (0..self.len())
            .map(|row| {
                let e = x[row].exp();
                self.diag_sum[row]
                    + 2.0 * self.weight[row] * h2 * e * e
                    + self.robin[row] * self.h * e
            })
            .collect()
    }

    fn apply(&self, diag: &[f64], p: &[f64], out: &mut [f64]) {
        for row in 0..self.len() {
            let mut s = diag[row] * p[row];
            for t in 0..4 {
                let m = self.nbr[row][t];
                if m != NONE {
                    s -= self.coef[row][t] * p[m as usize];
                }
            }
            out[row] = s;
        }
    }

    /// Modified incomplete Cholesky pivots for `A = diag − C`.
    fn mic_pivots(&self, diag: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut upper_sum = vec![0.0; n];
        for row in 0..n {
            for t in 0..4 {
                let m = self.nbr[row][t];
                if m != NONE && (m as usize) > row {
                    upper_sum[row] += self.coef[row][t];
                }
            }
        }
        let mut d = vec![0.0; n];
        for row in 0..n {
            let mut v = diag[row];
            for t in 0..4 {
                let m = self.nbr[row][t];
                if m != NONE && (m as usize) < row {
                    let m = m as usize;
                    let c = self.coef[row][t];
                    v -= c / d[m] * (c + MIC_RELAXATION * (upper_sum[m] - c));
                }
            }
            d[row] = if v > 1e-3 * diag[row] { v } else { diag[row] };
        }
        d
    }

    fn precondition(&self, d: &[f64], r: &[f64], z: &mut [f64]) {
        let n = self.len();
        for row in 0..n {
            let mut s = r[row];
            for t in 0..4 {
                let m = self.nbr[row][t];
                if m != NONE && (m as usize) < row {
                    s += self.coef[row][t] * z[m as usize];
                }
            }
            z[row] = s / d[row];
        }
        for row in (0..n).rev() {
            let mut s = 0.0;
            for t in 0..4 {
                let m = self.nbr[row][t];
                if m != NONE && (m as usize) > row {
                    s += self.coef[row][t] * z[m as usize];
                }
            }
            z[row] += s / d[row];
        }
    }

    /// Solves `A x = b` to relative residual `rtol`; returns the iteration count.
    fn pcg(&self, diag: &[f64], b: &[f64], rtol: f64, x: &mut [f64]) -> usize {
        let n = self.len();
        let d = self.mic_pivots(diag);
        x.iter_mut().for_each(|v| *v = 0.0);
        let mut r = b.to_vec();
        let bnorm = dot(b, b).sqrt();
        if bnorm == 0.0 {
            return 0;
        }
        let mut z = vec![0.0; n];
        self.precondition(&d, &r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 1..=MAX_CG_ITERS {
            self.apply(diag, &p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if dot(&r, &r).sqrt() <= rtol * bnorm {
                return it;
            }
            self.precondition(&d, &r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        MAX_CG_ITERS
    }

    /// Damped Newton on the unknowns of `grid`, in place. Every accepted step
    /// strictly decreases the residual sup-norm.
    pub fn newton(
        &self,
        grid: &mut Grid,
        tolerance: f64,
        max_iters: usize,
        damping: f64,
        cg_tolerance: f64,
    ) -> Result<NewtonStats> {
        let n = self.len();
        let dir = self.dirichlet_terms(grid);
        let mut x: Vec<f64> = self.nodes.iter().map(|&k| grid.u[k]).collect();
        let mut g = vec![0.0; n];
        let mut g_try = vec![0.0; n];
        let mut x_try = vec![0.0; n];
        let mut delta = vec![0.0; n];
        let mut res = self.residual(&x, &dir, &mut g);
        let mut stats = NewtonStats {
            residual: res,
            ..Default::default()
        };
        let mut stalled = false;
        for it in 0..max_iters {
            if res <= tolerance {
                break;
            }
            let diag = self.jacobian_diag(&x);
            let rtol = (0.1 * res).clamp(cg_tolerance, 1e-2);
            stats.cg_iterations += self.pcg(&diag, &g, rtol, &mut delta);
            let mut alpha = damping;
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                for k in 0..n {
                    x_try[k] = x[k] + alpha * delta[k];
                }
                let r = self.residual(&x_try, &dir, &mut g_try);
                if r < res {
                    std::mem::swap(&mut x, &mut x_try);
                    std::mem::swap(&mut g, &mut g_try);
                    res = r;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            stats.iterations = it + 1;
            stats.residual = res;
            if !accepted {
                // stalled at round-off level counts as converged
                if res <= tolerance * STALL_FACTOR {
                    stalled = true;
                    break;
                }
                return Err(MetricError::NewtonDivergence {
                    residual: res,
                    iterations: it + 1,
                });
            }
        }
        if res > tolerance && !stalled {
            return Err(MetricError::NewtonDivergence {
                residual: res,
                iterations: stats.iterations,
            });
        }
        for (row, &k) in self.nodes.iter().enumerate() {
            grid.u[k] = x[row];
        }
        Ok(stats)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::grid::Chart;

    /// Unit disk on a small Cartesian grid with exact Dirichlet data.
    fn disk_grid(n: usize) -> Grid {
        let h = 2.4 / (n - 1) as f64;
        let mut g = Grid::new(Chart::Cartesian, n, n, -1.2, -1.2, h);
        let exact = |i: usize, j: usize, g: &Grid| {
            let r2 = g.node_point(i, j).norm_sqr();
            (2.0 / (1.0 - r2)).ln()
        };
        for i in 0..n {
            for j in 0..n {
                let z = g.node_point(i, j);
                let k = g.index(i, j);
                if z.norm() < 0.9 && i > 0 && j > 0 && i + 1 < n && j + 1 < n {
                    g.kind[k] = NodeKind::Interior;
                    g.u[k] = 3.0;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let k = g.index(i, j);
                if !g.kind[k].is_unknown()
                    && g.neighbours(i, j).any(|(m, _)| g.kind[m].is_unknown())
                {
                    g.kind[k] = NodeKind::Dirichlet;
                    g.u[k] = exact(i, j, &g);
                }
            }
        }
        g
    }

    #[test]
    fn newton_converges_on_disk() {
        let mut g = disk_grid(81);
        let sys = System::new(&g);
        let stats = sys.newton(&mut g, 1e-10, 60, 1.0, 1e-12).unwrap();
        assert!(stats.residual <= 1e-10);
        let mut worst: f64 = 0.0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                let k = g.index(i, j);
                if g.kind[k] == NodeKind::Interior {
                    let r2 = g.node_point(i, j).norm_sqr();
                    worst = worst.max((g.u[k] - (2.0 / (1.0 - r2)).ln()).abs());
                }
            }
        }
        assert!(worst < 5e-3, "max error {worst}");
    }

    #[test]
    fn jacobian_is_symmetric() {
        let g = disk_grid(21);
        let sys = System::new(&g);
        let n = sys.len();
        for row in 0..n {
            for t in 0..4 {
                let m = sys.nbr[row][t];
                if m != NONE {
                    let back = (0..4)
                        .find(|&s| sys.nbr[m as usize][s] == row as u32)
                        .expect("neighbour relation is symmetric");
                    assert_eq!(sys.coef[row][t], sys.coef[m as usize][back]);
                }
            }
        }
    }
}
