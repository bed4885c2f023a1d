//! Current-sheet sources: a full-plane sheet for plane-wave injection and a
//! rectangular uniform sheet standing in for a polarized aperture antenna.
//!
//! A sheet of electric current on a grid plane radiates plane (or aperture)
//! waves symmetrically toward both absorbing ends; transmissions are always
//! referenced to a calibration run, so the source amplitude scale cancels.

use super::operator::LinearOperator;
use super::SolverError;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// Uniform sheet across the whole transverse cross-section.
    PlaneWave,
    /// Uniform sheet over a rectangle (`center`, `size` in the two transverse
    /// axes, m, in grid coordinates).
    Aperture { center: [f64; 2], size: [f64; 2] },
}

/// A polarized current sheet on the plane `axis = plane_index`.
#[derive(Debug, Clone, Copy)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Propagation axis (normal of the sheet plane).
    pub axis: usize,
    /// Plane position as a primal grid index along `axis`.
    pub plane_index: usize,
    /// Polarization; must be orthogonal to the propagation axis.
    pub polarization: [f64; 3],
    /// Source amplitude, V/m scale.
    pub amplitude: f64,
}

/// The two transverse axes of a propagation axis, in increasing order.
pub fn transverse_axes(axis: usize) -> [usize; 2] {
    match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

pub(super) fn validate_polarization(
    polarization: [f64; 3],
    axis: usize,
) -> Result<[f64; 3], SolverError> {
    if axis > 2 {
        return Err(SolverError::InvalidSource(format!("axis {axis}")));
    }
    let norm = polarization.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(SolverError::InvalidSource(format!(
            "polarization {polarization:?} must be a nonzero vector"
        )));
    }
    let p = [polarization[0] / norm, polarization[1] / norm, polarization[2] / norm];
    if p[axis].abs() > 1e-12 {
        return Err(SolverError::InvalidSource(format!(
            "polarization {polarization:?} not orthogonal to propagation axis {axis}"
        )));
    }
    Ok(p)
}

impl SourceSpec {
    /// Builds the right-hand side `j omega mu0 J` over the operator's grid.
    pub fn rhs(&self, op: &LinearOperator) -> Result<Vec<Complex64>, SolverError> {
        let p = validate_polarization(self.polarization, self.axis)?;
        let stag = &op.stag;
        if self.plane_index >= stag.extents[self.axis] {
            return Err(SolverError::InvalidSource(format!(
                "plane index {} outside axis {} with {} cells",
                self.plane_index, self.axis, stag.extents[self.axis]
            )));
        }
        let omega = 2.0 * PI * op.frequency;
        let scale = Complex64::new(0.0, omega * crate::media::MU0 * self.amplitude);
        let [t1, t2] = transverse_axes(self.axis);
        let mut b = vec![Complex64::new(0.0, 0.0); stag.cells() * 3];
        for &c in &[t1, t2] {
            if p[c] == 0.0 {
                continue;
            }
            for k in 0..stag.extents[2] {
                for j in 0..stag.extents[1] {
                    for i in 0..stag.extents[0] {
                        let idx = [i, j, k];
                        if idx[self.axis] != self.plane_index {
                            continue;
                        }
                        let pos = stag.edge_position(c, i, j, k);
                        let inside = match self.kind {
                            SourceKind::PlaneWave => true,
                            SourceKind::Aperture { center, size } => {
                                (pos[t1] - center[0]).abs() <= size[0] / 2.0
                                    && (pos[t2] - center[1]).abs() <= size[1] / 2.0
                            }
                        };
                        if inside {
                            b[stag.dof(c, i, j, k)] = scale * p[c];
                        }
                    }
                }
            }
        }
        Ok(b)
    }
}
