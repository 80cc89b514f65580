//! Persistence of density fields.
//!
//! The binary layout is little-endian:
//!
//! ```text
//! magic  "MRDF"            4 bytes
//! version u32              currently 1
//! header_len u64, header   JSON: domain, config, rings, stats, grid shapes
//! then for the main grid and each patch in turn:
//!   runs u64, (kind u8, len u32) × runs    node kinds, run-length encoded
//!   values f64 × (nodes with a value)      chart log-density ũ
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::grid::{Chart, Grid, NodeKind};
use super::model::RingData;
use super::{DensityField, SolverConfig};
use crate::error::{MetricError, Result};
use crate::geometry::DomainSpec;

const MAGIC: &[u8; 4] = b"MRDF";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Shape {
    chart: Chart,
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    h: f64,
}

impl Shape {
    fn of(g: &Grid) -> Self {
        Shape {
            chart: g.chart,
            nx: g.nx,
            ny: g.ny,
            x0: g.x0,
            y0: g.y0,
            h: g.h,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    domain: DomainSpec,
    config: SolverConfig,
    grids: Vec<Shape>,
    rings: Vec<RingData>,
    convergence_residual: f64,
    estimated_discretization_error: Option<f64>,
    newton_iterations: usize,
    schwarz_rounds: usize,
}

pub fn write_field<W: Write>(field: &DensityField, mut out: W) -> Result<()> {
    let g = &field.grid;
    let err = field.estimated_discretization_error;
    let header = Header {
        domain: field.domain.clone(),
        config: field.config.clone(),
        grids: std::iter::once(g)
            .chain(&field.patches)
            .map(Shape::of)
            .collect(),
        rings: field.rings.clone(),
        convergence_residual: field.convergence_residual,
        estimated_discretization_error: err.is_finite().then_some(err),
        newton_iterations: field.newton_iterations,
        schwarz_rounds: field.schwarz_rounds,
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;

    for grid in std::iter::once(g).chain(&field.patches) {
        write_grid(grid, &mut out)?;
    }
    Ok(())
}

fn write_grid<W: Write>(g: &Grid, out: &mut W) -> Result<()> {
    let mut runs: Vec<(u8, u32)> = Vec::new();
    for kind in &g.kind {
        match runs.last_mut() {
            Some((k, n)) if *k == *kind as u8 && *n < u32::MAX => *n += 1,
            _ => runs.push((*kind as u8, 1)),
        }
    }
    out.write_all(&(runs.len() as u64).to_le_bytes())?;
    for (k, n) in runs {
        out.write_all(&[k])?;
        out.write_all(&n.to_le_bytes())?;
    }
    for (kind, u) in g.kind.iter().zip(&g.u) {
        if kind.has_value() {
            out.write_all(&u.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_field<R: Read>(mut input: R) -> Result<DensityField> {
    let bad = |m: &str| MetricError::Format(m.to_string());
    if &read_array::<4, _>(&mut input)? != MAGIC {
        return Err(bad("not a density field file"));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let len = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;

    let mut grids = header
        .grids
        .iter()
        .map(|shape| read_grid(shape, &mut input))
        .collect::<Result<Vec<_>>>()?;
    if grids.is_empty() || grids.len() != header.rings.len() + 1 {
        return Err(bad("grid count does not match the rings"));
    }
    let grid = grids.remove(0);
    let continua = super::continua_of(&header.domain);
    Ok(DensityField {
        grid,
        domain: header.domain,
        convergence_residual: header.convergence_residual,
        estimated_discretization_error: header.estimated_discretization_error.unwrap_or(f64::NAN),
        rings: header.rings,
        patches: grids,
        newton_iterations: header.newton_iterations,
        schwarz_rounds: header.schwarz_rounds,
        config: header.config,
        continua,
    })
}

fn read_grid<R: Read>(shape: &Shape, input: &mut R) -> Result<Grid> {
    let bad = |m: &str| MetricError::Format(m.to_string());
    let total = shape
        .nx
        .checked_mul(shape.ny)
        .filter(|t| *t <= 1 << 32)
        .ok_or_else(|| bad("grid too large"))?;
    let mut grid = Grid::new(shape.chart, shape.nx, shape.ny, shape.x0, shape.y0, shape.h);
    let runs = u64::from_le_bytes(read_array(input)?);
    let mut pos = 0usize;
    for _ in 0..runs {
        let [k] = read_array::<1, _>(input)?;
        let n = u32::from_le_bytes(read_array(input)?) as usize;
        let kind = NodeKind::from_u8(k).ok_or_else(|| bad("unknown node kind"))?;
        if pos + n > total {
            return Err(bad("node kinds overflow the grid"));
        }
        grid.kind[pos..pos + n].fill(kind);
        pos += n;
    }
    if pos != total {
        return Err(bad("node kinds do not cover the grid"));
    }
    for k in 0..total {
        if grid.kind[k].has_value() {
            grid.u[k] = f64::from_le_bytes(read_array(input)?);
        }
    }
    Ok(grid)
}

/// Writes `x,y,u,lambda` in physical coordinates for every main-grid node
/// that carries a value.
pub fn write_csv<W: Write>(field: &DensityField, mut out: W) -> Result<()> {
    let g = &field.grid;
    writeln!(out, "x,y,u,lambda")?;
    for i in 0..g.nx {
        for j in 0..g.ny {
            if !g.kind[g.index(i, j)].has_value() {
                continue;
            }
            let z = g.node_point(i, j);
            let u = g.physical_u(i, j);
            writeln!(out, "{},{},{},{}", z.re, z.im, u, u.exp())?;
        }
    }
    Ok(())
}
