//! State snapshots: one JSON header line followed by raw little-endian
//! `f64` lattices, one per listed field, in lattice-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::grid::{FieldError, GridSpec, ScalarGrid, VecFieldGrid};
use crate::state::ExtendedState;

pub const SNAPSHOT_FORMAT: &str = "invar-state";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub box_len: f64,
    pub dt: f64,
    pub fields: Vec<String>,
    pub byte_order: String,
}

const EXTENDED_FIELDS: [&str; 8] = ["a_x", "a_y", "a_z", "e_x", "e_y", "e_z", "psi", "mu"];

/// Writes the extended state (divergence-free `Ã`, `E`, and the gauge
/// scalars) with the grid parameters in the header.
pub fn save_extended(
    path: &Path,
    grid: &GridSpec,
    state: &ExtendedState,
) -> Result<(), FieldError> {
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.to_string(),
        version: SNAPSHOT_VERSION,
        n: grid.n,
        box_len: grid.box_len,
        dt: grid.dt,
        fields: EXTENDED_FIELDS.iter().map(|s| s.to_string()).collect(),
        byte_order: "little-endian".to_string(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &header).map_err(|e| FieldError::Snapshot(e.to_string()))?;
    w.write_all(b"\n")?;
    let lattices: [&ScalarGrid; 8] = [
        &state.a_tilde.comps[0],
        &state.a_tilde.comps[1],
        &state.a_tilde.comps[2],
        &state.e.comps[0],
        &state.e.comps[1],
        &state.e.comps[2],
        &state.psi,
        &state.mu,
    ];
    for lat in lattices {
        for v in &lat.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads a snapshot; the stored grid parameters must match `grid` except for
/// the timestep (a run may resume with a different `dt`).
pub fn load_extended(path: &Path, grid: &GridSpec) -> Result<ExtendedState, FieldError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header_line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let got = r.read(&mut byte)?;
        if got == 0 {
            return Err(FieldError::Snapshot("missing header line".into()));
        }
        if byte[0] == b'\n' {
            break;
        }
        header_line.push(byte[0]);
        if header_line.len() > 1 << 16 {
            return Err(FieldError::Snapshot("header line too long".into()));
        }
    }
    let header: SnapshotHeader = serde_json::from_slice(&header_line)
        .map_err(|e| FieldError::Snapshot(format!("bad header: {e}")))?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(FieldError::Snapshot(format!(
            "unknown format '{}'",
            header.format
        )));
    }
    if header.byte_order != "little-endian" {
        return Err(FieldError::Snapshot(format!(
            "unsupported byte order '{}'",
            header.byte_order
        )));
    }
    if header.n != grid.n {
        return Err(FieldError::Snapshot(format!(
            "snapshot grid n = {} does not match the requested n = {}",
            header.n, grid.n
        )));
    }
    if (header.box_len - grid.box_len).abs() > 1e-12 * grid.box_len {
        return Err(FieldError::Snapshot(format!(
            "snapshot box length {} does not match {}",
            header.box_len, grid.box_len
        )));
    }
    if header.fields != EXTENDED_FIELDS {
        return Err(FieldError::Snapshot(format!(
            "unexpected field list {:?}",
            header.fields
        )));
    }
    let points = grid.num_points();
    let mut read_lattice = || -> Result<ScalarGrid, FieldError> {
        let mut buf = vec![0u8; points * 8];
        r.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(ScalarGrid { n: grid.n, data })
    };
    let ax = read_lattice()?;
    let ay = read_lattice()?;
    let az = read_lattice()?;
    let ex = read_lattice()?;
    let ey = read_lattice()?;
    let ez = read_lattice()?;
    let psi = read_lattice()?;
    let mu = read_lattice()?;
    let state = ExtendedState {
        a_tilde: VecFieldGrid { comps: [ax, ay, az] },
        e: VecFieldGrid { comps: [ex, ey, ez] },
        psi,
        mu,
    };
    if !(state.a_tilde.all_finite()
        && state.e.all_finite()
        && state.psi.all_finite()
        && state.mu.all_finite())
    {
        return Err(FieldError::Snapshot("non-finite values in snapshot".into()));
    }
    Ok(state)
}
