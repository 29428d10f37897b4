//! Field snapshots: the binary `FPF1` layout and a plain `x,y,value` CSV.
//!
//! `FPF1` is the four magic bytes `FPF1`, then `Nx` and `Ny` as little-endian
//! `u32`, then `Nx·Ny` little-endian `f64` values with `x` varying fastest.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::spectral::{PeriodicGrid, ScalarField};

pub const MAGIC: &[u8; 4] = b"FPF1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not an FPF1 snapshot (magic bytes {0:?})")]
    Magic([u8; 4]),
    #[error("snapshot is {got}x{got_y} but the grid is {want}x{want_y}", got = .found.0, got_y = .found.1, want = .expected.0, want_y = .expected.1)]
    Shape { found: (usize, usize), expected: (usize, usize) },
    #[error("snapshot has {0} trailing bytes")]
    Trailing(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Writes `field` in the `FPF1` layout.
pub fn write_fpf1<W: Write>(mut out: W, field: &ScalarField) -> io::Result<()> {
    let grid = field.grid();
    let header_dim = |n: usize| u32::try_from(n).map_err(|_| io::Error::other("grid too large for FPF1"));
    out.write_all(MAGIC)?;
    out.write_all(&header_dim(grid.nx())?.to_le_bytes())?;
    out.write_all(&header_dim(grid.ny())?.to_le_bytes())?;
    let mut body = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        body.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&body)
}

pub fn fpf1_bytes(field: &ScalarField) -> Vec<u8> {
    let mut buf = Vec::with_capacity(12 + 8 * field.values().len());
    write_fpf1(&mut buf, field).expect("writing to a Vec cannot fail");
    buf
}

/// Reads an `FPF1` snapshot onto `grid`, whose node counts must match.
pub fn read_fpf1<R: Read>(mut input: R, grid: &Arc<PeriodicGrid>) -> Result<ScalarField, SnapshotError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::Magic(magic));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let nx = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let ny = u32::from_le_bytes(word) as usize;
    if (nx, ny) != (grid.nx(), grid.ny()) {
        return Err(SnapshotError::Shape {
            found: (nx, ny),
            expected: (grid.nx(), grid.ny()),
        });
    }
    let mut body = vec![0u8; 8 * nx * ny];
    input.read_exact(&mut body)?;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(SnapshotError::Trailing(rest.len()));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(ScalarField::from_values(grid, values).expect("shape checked above"))
}

/// `x,y,value` rows in storage order, full precision.
pub fn to_csv(field: &ScalarField) -> String {
    let grid = field.grid();
    let mut out = String::with_capacity(48 * (field.values().len() + 1));
    out.push_str("x,y,value\n");
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let (x, y) = grid.point(ix, iy);
            let _ = writeln!(out, "{x:e},{y:e},{:e}", field.values()[iy * grid.nx() + ix]);
        }
    }
    out
}

/// File stem for a snapshot requested at time `t`, e.g. `snapshot_2.5`.
pub fn file_stem(t: f64) -> String {
    format!("snapshot_{t}")
}
