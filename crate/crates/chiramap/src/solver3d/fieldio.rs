//! Field snapshot export/import: a short self-describing text header followed
//! by little-endian complex128 samples, component-major, x-fastest.

use super::{FieldSolution, SolverError};
use num_complex::Complex64;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

const MAGIC: &str = "#chiramap-field 1";

pub fn write_snapshot(path: &Path, sol: &FieldSolution) -> Result<(), SolverError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))?;
    let [nx, ny, nz] = sol.stag.extents;
    let header = format!(
        "{MAGIC}\ndims {nx} {ny} {nz}\ncell_size_m {:.17e}\nfrequency_hz {:.17e}\ncomponents Ex Ey Ez\nlayout component-major x-fastest\ndtype complex128-le\nresidual {:.17e}\niterations {}\ndata {}\n",
        sol.stag.cell_size,
        sol.frequency,
        sol.residual,
        sol.iterations,
        sol.e.len() * 16,
    );
    f.write_all(header.as_bytes()).map_err(|e| SolverError::Io(e.to_string()))?;
    let mut buf = Vec::with_capacity(sol.e.len() * 16);
    for z in &sol.e {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    f.write_all(&buf).map_err(|e| SolverError::Io(e.to_string()))
}

/// Reads back a snapshot written by [`write_snapshot`]; returns the header
/// fields and the raw samples.
pub fn read_snapshot(path: &Path) -> Result<([usize; 3], f64, Vec<Complex64>), SolverError> {
    let f = std::fs::File::open(path)
        .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))?;
    let mut reader = BufReader::new(f);
    let mut dims = [0usize; 3];
    let mut cell = 0.0f64;
    let mut line = String::new();
    reader.read_line(&mut line).map_err(|e| SolverError::Io(e.to_string()))?;
    if line.trim() != MAGIC {
        return Err(SolverError::Io(format!("not a field snapshot: {}", line.trim())));
    }
    let nbytes: usize = loop {
        line.clear();
        reader.read_line(&mut line).map_err(|e| SolverError::Io(e.to_string()))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.first().copied() {
            Some("dims") => {
                for (d, p) in dims.iter_mut().zip(&parts[1..4]) {
                    *d = p.parse().map_err(|e| SolverError::Io(format!("dims: {e}")))?;
                }
            }
            Some("cell_size_m") => {
                cell = parts[1].parse().map_err(|e| SolverError::Io(format!("cell: {e}")))?;
            }
            Some("data") => {
                break parts[1].parse().map_err(|e| SolverError::Io(format!("data: {e}")))?;
            }
            Some(_) => {}
            None => return Err(SolverError::Io("truncated header".into())),
        }
    };
    let mut raw = vec![0u8; nbytes];
    reader.read_exact(&mut raw).map_err(|e| SolverError::Io(e.to_string()))?;
    let mut e = Vec::with_capacity(nbytes / 16);
    for chunk in raw.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        e.push(Complex64::new(re, im));
    }
    Ok((dims, cell, e))
}
