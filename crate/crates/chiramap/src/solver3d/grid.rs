//! Staggered-grid geometry, boundary conditions and the complex coordinate
//! stretching that implements the absorbing layers.
//!
//! Electric field components live on cell edges: `Ex` at `((i+1/2)h, jh, kh)`,
//! `Ey` at `(ih, (j+1/2)h, kh)`, `Ez` at `(ih, jh, (k+1/2)h)`. The curl of E
//! lives on the dual (face) locations. Along each axis, grid positions are
//! either "primal" (integer multiples of `h`) or "dual" (offset by `h/2`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Boundary treatment of one axis (applied to both ends).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Complex-coordinate-stretched absorbing layers backed by a zero field.
    Absorbing,
    Periodic,
    /// Tangential E forced to zero on the axis walls.
    PerfectConductor,
}

/// Uniform Cartesian grid specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Uniform cell size for all axes, m.
    pub cell_size: f64,
    /// Cell counts (nx, ny, nz).
    pub extents: [usize; 3],
    /// Boundary per axis.
    pub boundaries: [Boundary; 3],
    /// Absorbing-layer thickness in cells (>= 8 when any axis is absorbing).
    pub absorber_thickness: usize,
}

/// Absorbing-layer grading order.
pub const PML_ORDER: i32 = 3;
/// Normal-incidence reflection targeted by the absorbing-layer grading.
pub const PML_TARGET_REFLECTION: f64 = 1e-4;
/// Minimum absorber thickness in cells.
pub const MIN_ABSORBER_CELLS: usize = 8;

impl GridSpec {
    pub fn cell_count(&self) -> usize {
        self.extents[0] * self.extents[1] * self.extents[2]
    }

    pub fn dof_count(&self) -> usize {
        3 * self.cell_count()
    }

    /// Grid corner coordinate; the grid is centered on the origin.
    pub fn origin(&self) -> [f64; 3] {
        [
            -(self.extents[0] as f64) * self.cell_size / 2.0,
            -(self.extents[1] as f64) * self.cell_size / 2.0,
            -(self.extents[2] as f64) * self.cell_size / 2.0,
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.cell_size > 0.0) || !self.cell_size.is_finite() {
            return Err(format!("cell size {} must be positive", self.cell_size));
        }
        if self.extents.iter().any(|&n| n == 0) {
            return Err(format!("extents {:?} must be nonzero", self.extents));
        }
        let absorbing = self.boundaries.iter().any(|&b| b == Boundary::Absorbing);
        if absorbing && self.absorber_thickness < MIN_ABSORBER_CELLS {
            return Err(format!(
                "absorber thickness {} cells < minimum {}",
                self.absorber_thickness, MIN_ABSORBER_CELLS
            ));
        }
        for a in 0..3 {
            if self.boundaries[a] == Boundary::Absorbing
                && self.extents[a] <= 2 * self.absorber_thickness
            {
                return Err(format!(
                    "axis {a}: {} cells leave no interior inside 2 x {} absorber cells",
                    self.extents[a], self.absorber_thickness
                ));
            }
        }
        Ok(())
    }

    /// Checks the cell size against the shortest wavelength in the scene.
    /// Errors above lambda/5; returns a warning string above lambda/10.
    pub fn check_resolution(&self, lambda_min: f64) -> Result<Option<String>, String> {
        if self.cell_size > lambda_min / 5.0 {
            return Err(format!(
                "cell size {:.4e} m exceeds lambda_min/5 = {:.4e} m",
                self.cell_size,
                lambda_min / 5.0
            ));
        }
        if self.cell_size > lambda_min / 10.0 {
            return Ok(Some(format!(
                "cell size {:.4e} m exceeds lambda_min/10 = {:.4e} m; accuracy degraded",
                self.cell_size,
                lambda_min / 10.0
            )));
        }
        Ok(None)
    }
}

/// Complex stretch factors `s(x) = 1 - j*sigma(x)` sampled at primal and dual
/// positions along one axis. Unity outside the absorbing layers.
#[derive(Debug, Clone)]
pub struct AxisStretch {
    /// At integer positions `i*h`, index 0..n.
    pub primal: Vec<Complex64>,
    /// At half positions `(i+1/2)*h`, index 0..n.
    pub dual: Vec<Complex64>,
}

impl AxisStretch {
    pub fn unity(n: usize) -> Self {
        Self {
            primal: vec![Complex64::new(1.0, 0.0); n],
            dual: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Polynomial-graded absorber over the outermost `thickness` cells of an
    /// axis with `n` cells. `k_background` is the real wavenumber used to set
    /// the grading amplitude for the target round-trip reflection.
    pub fn absorbing(n: usize, h: f64, thickness: usize, k_background: f64) -> Self {
        let t = thickness as f64 * h;
        let length = n as f64 * h;
        let m = PML_ORDER;
        // Round-trip attenuation exp(-2 k int sigma dl) = target reflection.
        let sigma_max =
            -(m as f64 + 1.0) * PML_TARGET_REFLECTION.ln() / (2.0 * k_background * t);
        let profile = |x: f64| -> Complex64 {
            let depth = if x < t {
                (t - x) / t
            } else if x > length - t {
                (x - (length - t)) / t
            } else {
                return Complex64::new(1.0, 0.0);
            };
            Complex64::new(1.0, -sigma_max * depth.powi(m))
        };
        Self {
            primal: (0..n).map(|i| profile(i as f64 * h)).collect(),
            dual: (0..n).map(|i| profile((i as f64 + 0.5) * h)).collect(),
        }
    }
}

/// Stretch factors for all axes of a grid.
pub fn grid_stretches(gs: &GridSpec, k_background: f64) -> [AxisStretch; 3] {
    let mut out = [
        AxisStretch::unity(gs.extents[0]),
        AxisStretch::unity(gs.extents[1]),
        AxisStretch::unity(gs.extents[2]),
    ];
    for a in 0..3 {
        if gs.boundaries[a] == Boundary::Absorbing {
            out[a] = AxisStretch::absorbing(
                gs.extents[a],
                gs.cell_size,
                gs.absorber_thickness,
                k_background,
            );
        }
    }
    out
}

/// Index arithmetic for the three staggered component lattices.
#[derive(Debug, Clone, Copy)]
pub struct Staggering {
    pub extents: [usize; 3],
    pub cell_size: f64,
    pub origin: [f64; 3],
}

impl Staggering {
    pub fn new(gs: &GridSpec) -> Self {
        Self { extents: gs.extents, cell_size: gs.cell_size, origin: gs.origin() }
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.extents[0] * self.extents[1] * self.extents[2]
    }

    /// Degree-of-freedom index of component `c` at cell (i, j, k).
    #[inline]
    pub fn dof(&self, c: usize, i: usize, j: usize, k: usize) -> usize {
        c * self.cells() + (k * self.extents[1] + j) * self.extents[0] + i
    }

    /// Position of the E component `c` of cell (i, j, k): offset by h/2 along
    /// its own axis.
    pub fn edge_position(&self, c: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        let mut p = [
            self.origin[0] + i as f64 * self.cell_size,
            self.origin[1] + j as f64 * self.cell_size,
            self.origin[2] + k as f64 * self.cell_size,
        ];
        p[c] += self.cell_size / 2.0;
        p
    }

    /// Position of the face (curl) component `c` of cell (i, j, k): offset by
    /// h/2 along both transverse axes.
    pub fn face_position(&self, c: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        let mut p = [
            self.origin[0] + i as f64 * self.cell_size,
            self.origin[1] + j as f64 * self.cell_size,
            self.origin[2] + k as f64 * self.cell_size,
        ];
        for a in 0..3 {
            if a != c {
                p[a] += self.cell_size / 2.0;
            }
        }
        p
    }

    /// Neighbor index along `axis` with the boundary rule applied. Returns
    /// `None` where the field is taken as zero (beyond absorbing/PEC walls).
    #[inline]
    pub fn shift(
        &self,
        boundary: Boundary,
        axis: usize,
        idx: [usize; 3],
        step: isize,
    ) -> Option<[usize; 3]> {
        let n = self.extents[axis] as isize;
        let raw = idx[axis] as isize + step;
        let wrapped = match boundary {
            Boundary::Periodic => raw.rem_euclid(n),
            _ => {
                if raw < 0 || raw >= n {
                    return None;
                }
                raw
            }
        };
        let mut out = idx;
        out[axis] = wrapped as usize;
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GridSpec {
        GridSpec {
            cell_size: 1e-3,
            extents: [4, 30, 5],
            boundaries: [Boundary::Periodic, Boundary::Absorbing, Boundary::PerfectConductor],
            absorber_thickness: 8,
        }
    }

    #[test]
    fn validation_rules() {
        assert!(spec().validate().is_ok());
        let mut bad = spec();
        bad.absorber_thickness = 4;
        assert!(bad.validate().is_err());
        let mut bad = spec();
        bad.extents[1] = 16;
        assert!(bad.validate().is_err());
        let mut bad = spec();
        bad.cell_size = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn resolution_thresholds() {
        let gs = spec();
        assert!(gs.check_resolution(20e-3).unwrap().is_none());
        assert!(gs.check_resolution(8e-3).unwrap().is_some());
        assert!(gs.check_resolution(4e-3).is_err());
    }

    #[test]
    fn stretch_is_unity_in_interior_and_graded_at_walls() {
        let s = AxisStretch::absorbing(30, 1e-3, 8, 300.0);
        assert_eq!(s.primal[15], Complex64::new(1.0, 0.0));
        assert_eq!(s.dual[15], Complex64::new(1.0, 0.0));
        // Maximal damping at the wall, decreasing inward.
        assert!(s.primal[0].im < s.primal[4].im && s.primal[4].im < 0.0);
        assert_eq!(s.primal[8], Complex64::new(1.0, 0.0));
        assert!(s.dual[29].im < s.dual[22].im && s.dual[29].im < 0.0);
        // Symmetric profile: dual[i] at (i+1/2)h mirrors dual[n-1-i].
        assert!((s.dual[1].im - s.dual[28].im).abs() < 1e-12);
        assert!((s.primal[2].im - s.primal[28].im).abs() < 1e-12);
    }

    #[test]
    fn shift_rules() {
        let st = Staggering::new(&spec());
        assert_eq!(st.shift(Boundary::Periodic, 0, [0, 0, 0], -1), Some([3, 0, 0]));
        assert_eq!(st.shift(Boundary::Absorbing, 1, [0, 0, 0], -1), None);
        assert_eq!(st.shift(Boundary::PerfectConductor, 2, [0, 0, 4], 1), None);
        assert_eq!(st.shift(Boundary::Absorbing, 1, [0, 5, 0], 1), Some([0, 6, 0]));
    }

    #[test]
    fn positions_are_staggered() {
        let st = Staggering::new(&spec());
        let ex = st.edge_position(0, 0, 0, 0);
        let fx = st.face_position(0, 0, 0, 0);
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(ex[0] - st.origin[0], 0.5e-3));
        assert!(close(ex[1] - st.origin[1], 0.0));
        assert!(close(fx[0] - st.origin[0], 0.0));
        assert!(close(fx[1] - st.origin[1], 0.5e-3));
        assert!(close(fx[2] - st.origin[2], 0.5e-3));
    }
}
