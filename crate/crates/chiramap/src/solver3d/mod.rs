//! Frequency-domain finite-difference solver for bi-isotropic media on a
//! staggered Cartesian grid.

mod fieldio;
mod grid;
mod operator;
mod port;
mod solve;
mod source;
pub(crate) mod sparse;

pub use fieldio::{read_snapshot, write_snapshot};
pub use grid::{Boundary, GridSpec, Staggering, MIN_ABSORBER_CELLS};
pub use operator::{assemble, assemble_standard, AssembleOptions, LinearOperator};
pub use port::{aperture_from_source, port_overlap, ApertureSpec};
pub use solve::{prepare, solve, solve_prepared, PreparedSolver, SolveOptions};
pub use source::{transverse_axes, SourceKind, SourceSpec};

use crate::media::MediaError;
use crate::phantom::PhantomError;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("tolerance {0} outside [1e-10, 1e-3]")]
    InvalidTolerance(f64),
    #[error("no convergence: relative residual {residual:.3e} after {iterations} iterations")]
    Convergence { residual: f64, iterations: usize, history: Vec<f64> },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Phantom(#[from] PhantomError),
}

/// Complex electric field on the staggered edges plus solve diagnostics.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    /// Edge samples, component-major (all Ex, then Ey, then Ez), x-fastest.
    pub e: Vec<Complex64>,
    /// Relative residual actually achieved.
    pub residual: f64,
    /// Krylov iterations (0 for the direct path).
    pub iterations: usize,
    pub stag: Staggering,
    pub frequency: f64,
}
