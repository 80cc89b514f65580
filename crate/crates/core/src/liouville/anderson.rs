//! Anderson acceleration of a fixed-point iteration `x ↦ G(x)`.

use std::collections::VecDeque;

/// Largest accepted distance of the accelerated iterate from `G(x)`,
/// in units of the plain step `|G(x) − x|`.
const MAX_EXTRAPOLATION: f64 = 100.0;

pub(crate) struct Anderson {
    depth: usize,
    xs: VecDeque<Vec<f64>>,
    fs: VecDeque<Vec<f64>>,
}

impl Anderson {
    pub fn new(depth: usize) -> Self {
        Anderson {
            depth,
            xs: VecDeque::new(),
            fs: VecDeque::new(),
        }
    }

    /// Next iterate from the current one `x` and its image `gx`.
    pub fn next(&mut self, x: &[f64], gx: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = gx.iter().zip(x).map(|(g, x)| g - x).collect();
        self.xs.push_back(x.to_vec());
        self.fs.push_back(f);
        while self.xs.len() > self.depth + 1 {
            self.xs.pop_front();
            self.fs.pop_front();
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return gx.to_vec();
        }
        let diff = |v: &VecDeque<Vec<f64>>, i: usize| -> Vec<f64> {
            v[i + 1].iter().zip(&v[i]).map(|(a, b)| a - b).collect()
        };
        let df: Vec<Vec<f64>> = (0..m).map(|i| diff(&self.fs, i)).collect();
        let dx: Vec<Vec<f64>> = (0..m).map(|i| diff(&self.xs, i)).collect();
        let fk = &self.fs[m];

        // normal equations of min ‖f_k − ΔF γ‖, lightly regularised
        let mut a = vec![vec![0.0; m + 1]; m];
        for i in 0..m {
            for j in 0..m {
                a[i][j] = dot(&df[i], &df[j]);
            }
            a[i][m] = dot(&df[i], fk);
        }
        let scale = (0..m).map(|i| a[i][i]).fold(0.0, f64::max);
        if scale == 0.0 {
            return gx.to_vec();
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 1e-10 * scale;
        }
        let Some(gamma) = solve(a) else {
            self.xs.clear();
            self.fs.clear();
            return gx.to_vec();
        };
        let mut out = gx.to_vec();
        for (i, g) in gamma.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o -= g * (dx[i][k] + df[i][k]);
            }
        }
        // an extrapolation far beyond the plain step signals a poor model
        let step = fk.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let jump = out
            .iter()
            .zip(gx)
            .fold(0.0, |a: f64, (o, g)| a.max((o - g).abs()));
        if !(jump <= MAX_EXTRAPOLATION * step) {
            self.xs.clear();
            self.fs.clear();
            return gx.to_vec();
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..=n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
