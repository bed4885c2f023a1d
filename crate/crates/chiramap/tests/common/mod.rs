//! Shared test machinery: the periodic-column experiment that sends a plane
//! wave along y through a laterally-uniform slab and extracts calibrated
//! transmission and reflection coefficients, for comparison against the
//! transfer-matrix solver.

use chiramap::media::BiIsotropicMaterial;
use chiramap::phantom::{voxelize, Scene, Shape};
use chiramap::solver3d::{
    assemble, port_overlap, prepare, solve_prepared, ApertureSpec, AssembleOptions, Boundary,
    GridSpec, SolveOptions, SourceKind, SourceSpec,
};
use num_complex::Complex64;

pub const F0: f64 = 2.45e9;

pub struct ColumnResult {
    pub t_co: Complex64,
    pub t_cross: Complex64,
    pub r_co: Complex64,
    pub r_cross: Complex64,
    pub iterations: usize,
}

pub struct ColumnSetup {
    pub slab: BiIsotropicMaterial,
    pub embedding: BiIsotropicMaterial,
    pub thickness: f64,
    pub cell_size: f64,
    pub tx_polarization: [f64; 3],
    pub swap_ports: bool,
}

impl ColumnSetup {
    pub fn new(slab: BiIsotropicMaterial, thickness: f64, cell_size: f64) -> Self {
        Self {
            slab,
            embedding: BiIsotropicMaterial::vacuum(),
            thickness,
            cell_size,
            tx_polarization: [1.0, 0.0, 0.0],
            swap_ports: false,
        }
    }
}

/// Runs the column experiment with an empty calibration run. Cross components
/// are referenced to the co-polarized empty-column transmission.
pub fn column_transmission(setup: &ColumnSetup) -> ColumnResult {
    let h = setup.cell_size;
    let pml = 10usize;
    let gap = ((0.35 * crate::common::F0.recip() * chiramap::media::C0 / h) as usize).max(8);
    let slab_cells = (setup.thickness / h).round().max(1.0) as usize;
    let ny = 2 * (pml + gap) + slab_cells;
    let gs = GridSpec {
        cell_size: h,
        extents: [1, ny, 1],
        boundaries: [Boundary::Periodic, Boundary::Absorbing, Boundary::Periodic],
        absorber_thickness: pml,
    };
    let length = ny as f64 * h;
    // Slab centered in physical coordinates, aligned to cell boundaries when
    // slab_cells is even (harmless half-cell shift otherwise).
    let y_lo = -(slab_cells as f64) * h / 2.0;
    let scene = Scene {
        background: setup.embedding,
        shapes: vec![(
            Shape::Box { corner: [-h, y_lo, -h], size: [2.0 * h, slab_cells as f64 * h, 2.0 * h] },
            setup.slab,
        )],
        domain_size: [2.0 * h, length, 2.0 * h],
        frequency: F0,
    };
    let empty = Scene { shapes: vec![], ..scene.clone() };

    let opts = AssembleOptions::default();
    let solve_opts = SolveOptions::default();
    let grid = voxelize(&scene, h, gs.extents, 1).unwrap();
    let grid_empty = voxelize(&empty, h, gs.extents, 1).unwrap();
    let op = assemble(&grid, F0, &gs, &opts).unwrap();
    let op_empty = assemble(&grid_empty, F0, &gs, &opts).unwrap();

    let (src_idx, rx_idx) = if setup.swap_ports {
        (ny - pml - 3, pml + 3)
    } else {
        (pml + 3, ny - pml - 3)
    };
    let refl_idx = if setup.swap_ports {
        (src_idx + (ny - pml - gap)) / 2
    } else {
        (src_idx + pml + gap) / 2 + 1
    };
    let src = SourceSpec {
        kind: SourceKind::PlaneWave,
        axis: 1,
        plane_index: src_idx,
        polarization: setup.tx_polarization,
        amplitude: 1.0,
    };
    let b = src.rhs(&op).unwrap();
    let sol = solve_prepared(&prepare(&op, &solve_opts).unwrap(), &b, &solve_opts).unwrap();
    let b_empty = src.rhs(&op_empty).unwrap();
    let sol_empty =
        solve_prepared(&prepare(&op_empty, &solve_opts).unwrap(), &b_empty, &solve_opts).unwrap();

    let full = [h * 4.0, h * 4.0];
    let co_pol = setup.tx_polarization;
    let cross_pol = cross_polarization(setup.tx_polarization);
    let probe = |pol: [f64; 3], plane: usize, field: &chiramap::solver3d::FieldSolution| {
        let ap = ApertureSpec { axis: 1, plane_index: plane, center: [0.0, 0.0], size: full, polarization: pol };
        port_overlap(field, &ap).unwrap()
    };
    let incident_rx = probe(co_pol, rx_idx, &sol_empty);
    let t_co = probe(co_pol, rx_idx, &sol) / incident_rx;
    let t_cross = probe(cross_pol, rx_idx, &sol) / incident_rx;

    // Scattered field = total - incident; isolates the backward wave on the
    // source side of the slab.
    let mut scat = sol.clone();
    for (s, e) in scat.e.iter_mut().zip(&sol_empty.e) {
        *s -= e;
    }
    let incident_refl = probe(co_pol, refl_idx, &sol_empty);
    let r_co = probe(co_pol, refl_idx, &scat) / incident_refl;
    let r_cross = probe(cross_pol, refl_idx, &scat) / incident_refl;

    ColumnResult { t_co, t_cross, r_co, r_cross, iterations: sol.iterations }
}

/// The transverse direction orthogonal to `pol` for propagation along y.
pub fn cross_polarization(pol: [f64; 3]) -> [f64; 3] {
    // pol x y_hat rotated: for pol = x this is z, for pol = z this is x.
    [pol[2], 0.0, pol[0]]
}

/// Jones transmission of the same slab from the transfer-matrix path.
pub fn oracle_jones(
    slab: BiIsotropicMaterial,
    embedding: BiIsotropicMaterial,
    thickness: f64,
) -> chiramap::slab1d::JonesMatrix {
    let stack = chiramap::slab1d::LayerStack {
        embedding_in: embedding,
        layers: vec![chiramap::slab1d::Layer { material: slab, thickness }],
        embedding_out: embedding,
        frequency: F0,
    };
    chiramap::slab1d::stack_jones(&stack).unwrap().0
}
