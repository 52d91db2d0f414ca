use std::fs;
use std::path::Path;

use super::SimState;
use crate::error::{MhdError, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::io::write_atomic;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MHDCKPT1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointHeader {
    pub nx: u64,
    pub ny: u64,
    pub t: f64,
    pub dt: f64,
    /// Velocity truncation, 0 for the exact Stokes solve.
    pub truncation: u64,
}

pub fn save_checkpoint(path: &Path, state: &SimState, dt: f64, truncation: u64) -> Result<()> {
    let g = state.u.grid;
    let mut buf = Vec::with_capacity(48 + 8 * (2 * (g.n_ufaces() + g.n_vfaces()) + g.n_cells()));
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&(g.nx as u64).to_le_bytes());
    buf.extend_from_slice(&(g.ny as u64).to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    buf.extend_from_slice(&dt.to_le_bytes());
    buf.extend_from_slice(&truncation.to_le_bytes());
    for arr in [
        &state.u.u,
        &state.u.v,
        &state.b.u,
        &state.b.v,
        &state.p.data,
    ] {
        for x in arr.iter() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    write_atomic(path, &buf)
}

/// Reads a checkpoint; `expect` is `(nx, ny, dt, truncation)` and must match exactly.
pub fn load_checkpoint(
    path: &Path,
    expect: Option<(usize, usize, f64, u64)>,
) -> Result<(CheckpointHeader, SimState)> {
    let bytes = fs::read(path)?;
    let bad = |m: &str| MhdError::Format(format!("{}: {m}", path.display()));
    if bytes.len() < 48 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint"));
    }
    let word = |k: usize| -> [u8; 8] { bytes[8 + 8 * k..16 + 8 * k].try_into().unwrap() };
    let header = CheckpointHeader {
        nx: u64::from_le_bytes(word(0)),
        ny: u64::from_le_bytes(word(1)),
        t: f64::from_le_bytes(word(2)),
        dt: f64::from_le_bytes(word(3)),
        truncation: u64::from_le_bytes(word(4)),
    };
    if let Some((nx, ny, dt, n)) = expect {
        if header.nx != nx as u64
            || header.ny != ny as u64
            || header.dt.to_bits() != dt.to_bits()
            || header.truncation != n
        {
            return Err(bad(&format!(
                "header ({}, {}, dt {}, n {}) does not match ({nx}, {ny}, dt {dt}, n {n})",
                header.nx, header.ny, header.dt, header.truncation
            )));
        }
    }
    let g = Grid::new(header.nx as usize, header.ny as usize)?;
    let sizes = [
        g.n_ufaces(),
        g.n_vfaces(),
        g.n_ufaces(),
        g.n_vfaces(),
        g.n_cells(),
    ];
    let want = 48 + 8 * sizes.iter().sum::<usize>();
    if bytes.len() != want {
        return Err(bad(&format!(
            "expected {want} bytes, found {}",
            bytes.len()
        )));
    }
    let mut off = 48;
    let mut arrays: Vec<Vec<f64>> = Vec::with_capacity(5);
    for n in sizes {
        arrays.push(
            bytes[off..off + 8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        );
        off += 8 * n;
    }
    let p = arrays.pop().unwrap();
    let bv = arrays.pop().unwrap();
    let bu = arrays.pop().unwrap();
    let uv = arrays.pop().unwrap();
    let uu = arrays.pop().unwrap();
    let state = SimState {
        t: header.t,
        u: VectorField {
            grid: g,
            u: uu,
            v: uv,
        },
        b: VectorField {
            grid: g,
            u: bu,
            v: bv,
        },
        p: ScalarField { grid: g, data: p },
    };
    Ok((header, state))
}
