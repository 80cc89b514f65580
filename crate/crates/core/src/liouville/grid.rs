//! Uniform grids in a conformal chart.
//!
//! The solver works with `ũ = u + log|dz/dζ|`, the log-density expressed in
//! chart coordinates `ζ`. The Liouville equation `Δũ = e^{2ũ}` keeps its form
//! under conformal changes of variable, so every chart uses the same
//! five-point stencil.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Chart {
    /// `ζ = z`.
    Cartesian,
    /// `ζ = log(z − center) = s + iθ`, periodic in θ with period 2π.
    LogPolar { center: Point },
}

impl Chart {
    pub fn to_physical(&self, x: f64, y: f64) -> Point {
        match self {
            Chart::Cartesian => Point::new(x, y),
            Chart::LogPolar { center } => center + Point::from_polar(x.exp(), y),
        }
    }

    /// Chart coordinates of `z`; `None` at the center of a log-polar chart.
    pub fn to_chart(&self, z: Point) -> Option<(f64, f64)> {
        match self {
            Chart::Cartesian => Some((z.re, z.im)),
            Chart::LogPolar { center } => {
                let d = z - center;
                let r = d.norm();
                if r == 0.0 {
                    return None;
                }
                Some((r.ln(), d.arg().rem_euclid(TAU)))
            }
        }
    }

    /// `log|dz/dζ|` at chart abscissa `x`.
    pub fn log_scale(&self, x: f64) -> f64 {
        match self {
            Chart::Cartesian => 0.0,
            Chart::LogPolar { .. } => x,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Chart::LogPolar { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum NodeKind {
    /// Outside the computational region; carries no value.
    Excluded = 0,
    /// Unknown governed by the five-point equation.
    Interior = 1,
    /// Fixed boundary value.
    Dirichlet = 2,
    /// Unknown on the inner end of a log-polar strip, `∂ₛũ = e^{ũ}`.
    CuspInner = 3,
    /// Unknown on the outer end of a log-polar strip, `∂ₛũ = −e^{ũ}`.
    CuspOuter = 4,
}

impl NodeKind {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => NodeKind::Excluded,
            1 => NodeKind::Interior,
            2 => NodeKind::Dirichlet,
            3 => NodeKind::CuspInner,
            4 => NodeKind::CuspOuter,
            _ => return None,
        })
    }

    pub fn is_unknown(self) -> bool {
        matches!(
            self,
            NodeKind::Interior | NodeKind::CuspInner | NodeKind::CuspOuter
        )
    }

    pub fn has_value(self) -> bool {
        self != NodeKind::Excluded
    }
}

/// Node `(i, j)` sits at chart coordinates `(x0 + i h, y0 + j h)` and is
/// stored at `i * ny + j`. Values are chart log-densities `ũ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub chart: Chart,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub kind: Vec<NodeKind>,
    pub u: Vec<f64>,
}

impl Grid {
    pub fn new(chart: Chart, nx: usize, ny: usize, x0: f64, y0: f64, h: f64) -> Self {
        Grid {
            chart,
            nx,
            ny,
            x0,
            y0,
            h,
            kind: vec![NodeKind::Excluded; nx * ny],
            u: vec![f64::NAN; nx * ny],
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h
    }

    pub fn node_point(&self, i: usize, j: usize) -> Point {
        self.chart.to_physical(self.x(i), self.y(j))
    }

    /// Physical spacing near node column `i`.
    pub fn local_spacing(&self, i: usize) -> f64 {
        self.h * self.chart.log_scale(self.x(i)).exp()
    }

    /// The four stencil neighbours of `(i, j)` as `(index, along_x)`.
    pub fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, bool)> + '_ {
        let periodic = self.chart.is_periodic();
        let mut out = [None; 4];
        if i > 0 {
            out[0] = Some((self.index(i - 1, j), true));
        }
        if i + 1 < self.nx {
            out[1] = Some((self.index(i + 1, j), true));
        }
        if j > 0 {
            out[2] = Some((self.index(i, j - 1), false));
        } else if periodic {
            out[2] = Some((self.index(i, self.ny - 1), false));
        }
        if j + 1 < self.ny {
            out[3] = Some((self.index(i, j + 1), false));
        } else if periodic {
            out[3] = Some((self.index(i, 0), false));
        }
        out.into_iter().flatten()
    }

    /// Physical log-density `u` stored at a node.
    pub fn physical_u(&self, i: usize, j: usize) -> f64 {
        self.u[self.index(i, j)] - self.chart.log_scale(self.x(i))
    }

    /// Cubic convolution (Keys, a = −1/2) of `ũ` at chart point `(x, y)`.
    /// Falls back to bilinear interpolation when the 4×4 stencil is not
    /// fully populated; `None` when even the enclosing cell is not.
    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        self.interpolate_relative(x, y, |_, _| 0.0)
    }

    /// Interpolates `ũ − offset` and returns the result without the offset
    /// added back. `offset(i, j)` is evaluated only at populated nodes.
    pub fn interpolate_relative(
        &self,
        x: f64,
        y: f64,
        offset: impl Fn(usize, usize) -> f64,
    ) -> Option<f64> {
        let fx = (x - self.x0) / self.h;
        let fy = (y - self.y0) / self.h;
        if !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        let i0 = fx.floor();
        let j0 = fy.floor();
        let tx = fx - i0;
        let ty = fy - j0;
        let (i0, j0) = (i0 as i64, j0 as i64);
        let periodic = self.chart.is_periodic();
        let node = |i: i64, j: i64| -> Option<f64> {
            if i < 0 || i >= self.nx as i64 {
                return None;
            }
            let j = if periodic {
                j.rem_euclid(self.ny as i64)
            } else if j < 0 || j >= self.ny as i64 {
                return None;
            } else {
                j
            };
            let (i, j) = (i as usize, j as usize);
            let k = self.index(i, j);
            self.kind[k].has_value().then(|| self.u[k] - offset(i, j))
        };
        // exact node hits reproduce the stored value
        if tx == 0.0 && ty == 0.0 {
            return node(i0, j0);
        }
        let mut full = [[0.0; 4]; 4];
        let mut ok = true;
        'outer: for (a, row) in full.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                match node(i0 - 1 + a as i64, j0 - 1 + b as i64) {
                    Some(val) => *v = val,
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            let wx = keys_weights(tx);
            let wy = keys_weights(ty);
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += wx[a] * wy[b] * full[a][b];
                }
            }
            return Some(s);
        }
        let c00 = node(i0, j0)?;
        let c10 = node(i0 + 1, j0)?;
        let c01 = node(i0, j0 + 1)?;
        let c11 = node(i0 + 1, j0 + 1)?;
        Some(
            (1.0 - tx) * (1.0 - ty) * c00
                + tx * (1.0 - ty) * c10
                + (1.0 - tx) * ty * c01
                + tx * ty * c11,
        )
    }

    /// Physical log-density at `z` by interpolation.
    pub fn physical_u_at(&self, z: Point) -> Option<f64> {
        let (x, y) = self.chart.to_chart(z)?;
        Some(self.interpolate(x, y)? - self.chart.log_scale(x))
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.kind.iter().filter(|k| **k == kind).count()
    }
}

fn keys_weights(t: f64) -> [f64; 4] {
    const A: f64 = -0.5;
    let w = |d: f64| {
        let d = d.abs();
        if d <= 1.0 {
            (A + 2.0) * d * d * d - (A + 3.0) * d * d + 1.0
        } else if d < 2.0 {
            A * d * d * d - 5.0 * A * d * d + 8.0 * A * d - 4.0 * A
        } else {
            0.0
        }
    };
    [w(1.0 + t), w(t), w(1.0 - t), w(2.0 - t)]
}
