//! Electromagnetic modelling of bi-isotropic (chiral) media and simulation of
//! cross-polarization transmission imaging.
//!
//! The crate is organised around the pipeline used by the `chiramap` binary:
//!
//! - [`media`] — constitutive parameters and dispersion constants of
//!   bi-isotropic materials (chirality `kappa`, Tellegen `chi`).
//! - [`slab1d`] — exact transfer-matrix solution for plane waves at normal
//!   incidence through layered bi-isotropic stacks; the analytic reference for
//!   the 3-D solver.
//! - [`solver3d`] — frequency-domain finite differences on a staggered grid
//!   with absorbing/periodic/PEC boundaries, sources, and port extraction.
//! - [`phantom`] — declarative scenes (matching medium, head, chiral
//!   inclusion) and their voxelization onto material grids.
//! - [`scan`] — sweeps a cross-polarized aperture pair over a scene and
//!   assembles the cross-polarization transmission map, either full-wave or
//!   with a fast ray-tube estimate.
//! - [`config`] / [`render`] — JSON run configuration and map rendering used
//!   by the command-line interface.

pub mod config;
pub mod media;
pub mod phantom;
pub mod render;
pub mod scan;
pub mod slab1d;
pub mod solver3d;
