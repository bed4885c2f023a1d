//! Port extraction: normalized overlap of the tangential electric field with
//! a polarized uniform aperture profile.

use super::grid::Staggering;
use super::source::{transverse_axes, validate_polarization};
use super::{FieldSolution, SolverError};
use num_complex::Complex64;

/// A rectangular measurement aperture on the plane `axis = plane_index`.
#[derive(Debug, Clone, Copy)]
pub struct ApertureSpec {
    /// Propagation axis (normal of the aperture plane).
    pub axis: usize,
    /// Plane position as a primal grid index along `axis`.
    pub plane_index: usize,
    /// Aperture center in the two transverse axes, m (grid coordinates).
    pub center: [f64; 2],
    /// Aperture edge lengths in the two transverse axes, m.
    pub size: [f64; 2],
    /// Measurement polarization; must be orthogonal to `axis`.
    pub polarization: [f64; 3],
}

/// Normalized overlap `<P, E> / <P, P>` of the tangential field over the
/// aperture with the aperture's uniform polarization profile. A field equal
/// to the profile gives exactly 1.
pub fn port_overlap(sol: &FieldSolution, ap: &ApertureSpec) -> Result<Complex64, SolverError> {
    let p = validate_polarization(ap.polarization, ap.axis)?;
    let stag = &sol.stag;
    if ap.plane_index == 0 || ap.plane_index >= stag.extents[ap.axis] {
        return Err(SolverError::Geometry(format!(
            "aperture plane {} outside the grid interior (axis {} has {} cells)",
            ap.plane_index, ap.axis, stag.extents[ap.axis]
        )));
    }
    let [t1, t2] = transverse_axes(ap.axis);
    let mut numerator = Complex64::new(0.0, 0.0);
    let mut denominator = 0.0;
    let mut points = 0usize;
    for &c in &[t1, t2] {
        if p[c] == 0.0 {
            continue;
        }
        for k in 0..stag.extents[2] {
            for j in 0..stag.extents[1] {
                for i in 0..stag.extents[0] {
                    let idx = [i, j, k];
                    if idx[ap.axis] != ap.plane_index {
                        continue;
                    }
                    let pos = stag.edge_position(c, i, j, k);
                    if (pos[t1] - ap.center[0]).abs() <= ap.size[0] / 2.0
                        && (pos[t2] - ap.center[1]).abs() <= ap.size[1] / 2.0
                    {
                        numerator += p[c] * sol.e[stag.dof(c, i, j, k)];
                        denominator += p[c] * p[c];
                        points += 1;
                    }
                }
            }
        }
    }
    if points == 0 {
        return Err(SolverError::Geometry(format!(
            "aperture at {:?} size {:?} contains no field samples",
            ap.center, ap.size
        )));
    }
    Ok(numerator / denominator)
}

/// Splits the aperture definition out of a [`Staggering`]-independent
/// context: helper for building matching source/probe pairs in tests.
pub fn aperture_from_source(
    stag: &Staggering,
    axis: usize,
    plane_index: usize,
    polarization: [f64; 3],
) -> ApertureSpec {
    let [t1, t2] = transverse_axes(axis);
    let full = [
        stag.extents[t1] as f64 * stag.cell_size * 2.0,
        stag.extents[t2] as f64 * stag.cell_size * 2.0,
    ];
    ApertureSpec { axis, plane_index, center: [0.0, 0.0], size: full, polarization }
}
