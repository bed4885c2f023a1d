//! Assembly of the frequency-domain operator over the staggered grid.
//!
//! The assembled system acts on the three edge-located E components and, in
//! homogeneous regions, reproduces
//!
//! ```text
//! k0^2 (eps_r~ - (chi^2 + kappa^2)/mu_r) E
//!     + 2 (kappa k0 / mu_r) <curl E>  -  curl (mu_r^-1 curl E)  = j omega mu0 J
//! ```
//!
//! where `<curl E>` is the face-located curl averaged back onto the edge
//! locations and `eps_r~ = eps_r - j sigma/(omega eps0)`. With
//! `kappa = chi = 0` the operator is the standard curl-curl Helmholtz
//! operator, entry for entry.
//!
//! Two structural choices keep the discrete system exactly reciprocal for
//! `chi = 0`:
//! - the chiral coupling is assembled as `B + B^T` with
//!   `B = diag(kappa k0 / mu_r) * Avg * C_E`, which matches the lumped
//!   `2 alpha~ <curl E>` stencil wherever the material is homogeneous while
//!   staying symmetric across material interfaces;
//! - every row is scaled by the product of the complex stretch factors at its
//!   component location, which symmetrizes the stretched curl-curl part
//!   (the weights are unity outside the absorbing layers, so sources and
//!   detectors never see them).
//!
//! A nonzero Tellegen parameter adds the commutator
//! `-j k0 (G diag(chi/mu_r) - diag(chi/mu_r) G)`, which vanishes in
//! homogeneous regions (its effect there is already inside `k_tilde0`) and is
//! intentionally non-symmetric: Tellegen media are non-reciprocal.

use super::grid::{grid_stretches, Boundary, GridSpec, Staggering};
use super::sparse::CsrMatrix;
use super::SolverError;
use crate::media::{self, EPS0};
use crate::phantom::MaterialGrid;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Assembly knobs. `supersample = 2` averages material coefficients over an
/// eight-point sub-sample around each component location.
#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    pub supersample: u8,
    /// Upper bound on the estimated assembly memory, bytes.
    pub memory_cap_bytes: usize,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { supersample: 1, memory_cap_bytes: 8 * 1024 * 1024 * 1024 }
    }
}

/// Assembled sparse operator plus everything needed to build sources, extract
/// ports and recover H.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub matrix: CsrMatrix,
    pub stag: Staggering,
    pub boundaries: [Boundary; 3],
    pub frequency: f64,
    pub warnings: Vec<String>,
    diag: Vec<Complex64>,
    curl_e: CsrMatrix,
    avg: CsrMatrix,
    face_inv_mu: Vec<f64>,
    face_zeta: Vec<Complex64>,
}

impl LinearOperator {
    pub fn dof_count(&self) -> usize {
        self.matrix.n_rows
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(x)
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matrix.matvec_into(x, y);
    }

    pub fn diagonal(&self) -> &[Complex64] {
        &self.diag
    }

    /// Magnetic field on the face lattice:
    /// `H = mu^-1 (-(1/j omega) curl E - zeta E)`, with E averaged onto the
    /// face locations for the zeta term.
    pub fn magnetic_field(&self, e: &[Complex64]) -> Vec<Complex64> {
        let omega = 2.0 * PI * self.frequency;
        let inv_jw = Complex64::new(0.0, 1.0) / omega; // -1/(j w) = j/w
        let curl = self.curl_e.matvec(e);
        let e_on_faces = self.avg.transpose().matvec(e);
        let mut h = vec![Complex64::new(0.0, 0.0); e.len()];
        for f in 0..h.len() {
            h[f] = self.face_inv_mu[f] / media::MU0
                * (inv_jw * curl[f] - self.face_zeta[f] * e_on_faces[f]);
        }
        h
    }
}

fn cyclic(c: usize) -> (usize, usize) {
    match c {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    }
}

/// Edge -> face curl with dual-position stretch factors.
fn build_curl_e(
    stag: &Staggering,
    boundaries: [Boundary; 3],
    stretch: &[super::grid::AxisStretch; 3],
) -> CsrMatrix {
    let n = stag.cells();
    let h = stag.cell_size;
    let mut trips = Vec::with_capacity(4 * 3 * n);
    for c in 0..3 {
        let (a1, a2) = cyclic(c);
        for k in 0..stag.extents[2] {
            for j in 0..stag.extents[1] {
                for i in 0..stag.extents[0] {
                    let idx = [i, j, k];
                    let row = stag.dof(c, i, j, k) as u32;
                    // +d/d_a1 of E_a2
                    let inv = 1.0 / (h * stretch[a1].dual[idx[a1]]);
                    trips.push((row, stag.dof(a2, i, j, k) as u32, -inv));
                    if let Some(p) = stag.shift(boundaries[a1], a1, idx, 1) {
                        trips.push((row, stag.dof(a2, p[0], p[1], p[2]) as u32, inv));
                    }
                    // -d/d_a2 of E_a1
                    let inv = 1.0 / (h * stretch[a2].dual[idx[a2]]);
                    trips.push((row, stag.dof(a1, i, j, k) as u32, inv));
                    if let Some(p) = stag.shift(boundaries[a2], a2, idx, 1) {
                        trips.push((row, stag.dof(a1, p[0], p[1], p[2]) as u32, -inv));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(3 * n, 3 * n, &mut trips)
}

/// Face -> edge curl with primal-position stretch factors.
fn build_curl_h(
    stag: &Staggering,
    boundaries: [Boundary; 3],
    stretch: &[super::grid::AxisStretch; 3],
) -> CsrMatrix {
    let n = stag.cells();
    let h = stag.cell_size;
    let mut trips = Vec::with_capacity(4 * 3 * n);
    for c in 0..3 {
        let (a1, a2) = cyclic(c);
        for k in 0..stag.extents[2] {
            for j in 0..stag.extents[1] {
                for i in 0..stag.extents[0] {
                    let idx = [i, j, k];
                    let row = stag.dof(c, i, j, k) as u32;
                    // +d/d_a1 of F_a2: backward difference at the edge point.
                    let inv = 1.0 / (h * stretch[a1].primal[idx[a1]]);
                    trips.push((row, stag.dof(a2, i, j, k) as u32, inv));
                    if let Some(p) = stag.shift(boundaries[a1], a1, idx, -1) {
                        trips.push((row, stag.dof(a2, p[0], p[1], p[2]) as u32, -inv));
                    }
                    // -d/d_a2 of F_a1
                    let inv = 1.0 / (h * stretch[a2].primal[idx[a2]]);
                    trips.push((row, stag.dof(a1, i, j, k) as u32, -inv));
                    if let Some(p) = stag.shift(boundaries[a2], a2, idx, -1) {
                        trips.push((row, stag.dof(a1, p[0], p[1], p[2]) as u32, inv));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(3 * n, 3 * n, &mut trips)
}

/// Eight-point face -> edge co-location average (component-wise).
fn build_avg_face_to_edge(stag: &Staggering, boundaries: [Boundary; 3]) -> CsrMatrix {
    let n = stag.cells();
    let w = Complex64::new(0.125, 0.0);
    let mut trips = Vec::with_capacity(8 * 3 * n);
    for c in 0..3 {
        let (a1, a2) = cyclic(c);
        for k in 0..stag.extents[2] {
            for j in 0..stag.extents[1] {
                for i in 0..stag.extents[0] {
                    let idx = [i, j, k];
                    let row = stag.dof(c, i, j, k) as u32;
                    for sc in [0isize, 1] {
                        let Some(p1) = stag.shift(boundaries[c], c, idx, sc) else { continue };
                        for s1 in [-1isize, 0] {
                            let Some(p2) = stag.shift(boundaries[a1], a1, p1, s1) else {
                                continue;
                            };
                            for s2 in [-1isize, 0] {
                                let Some(p3) = stag.shift(boundaries[a2], a2, p2, s2) else {
                                    continue;
                                };
                                trips.push((row, stag.dof(c, p3[0], p3[1], p3[2]) as u32, w));
                            }
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(3 * n, 3 * n, &mut trips)
}

/// Material coefficients sampled per staggered location.
struct SampledCoeffs {
    /// k0^2 (eps_r~ - (chi^2+kappa^2)/mu_r) at edges.
    k_term: Vec<Complex64>,
    /// k0^2 eps_r~ at edges (standard Helmholtz diagonal).
    k_eps: Vec<Complex64>,
    /// kappa k0 / mu_r at edges.
    c_alpha: Vec<f64>,
    /// chi k0 / mu_r at edges.
    c_chi: Vec<f64>,
    /// 1/mu_r at faces.
    face_inv_mu: Vec<f64>,
    /// zeta at faces (H recovery).
    face_zeta: Vec<Complex64>,
    any_tellegen: bool,
}

fn sample_coeffs(
    grid: &MaterialGrid,
    stag: &Staggering,
    frequency: f64,
    supersample: u8,
) -> SampledCoeffs {
    let n = stag.cells();
    let omega = 2.0 * PI * frequency;
    let k0 = media::free_space_wavenumber(frequency);
    let k0sq = k0 * k0;
    let mut out = SampledCoeffs {
        k_term: vec![Complex64::new(0.0, 0.0); 3 * n],
        k_eps: vec![Complex64::new(0.0, 0.0); 3 * n],
        c_alpha: vec![0.0; 3 * n],
        c_chi: vec![0.0; 3 * n],
        face_inv_mu: vec![0.0; 3 * n],
        face_zeta: vec![Complex64::new(0.0, 0.0); 3 * n],
        any_tellegen: false,
    };
    let offsets: Vec<[f64; 3]> = if supersample == 2 {
        let q = stag.cell_size / 4.0;
        let mut v = Vec::with_capacity(8);
        for dz in [-q, q] {
            for dy in [-q, q] {
                for dx in [-q, q] {
                    v.push([dx, dy, dz]);
                }
            }
        }
        v
    } else {
        vec![[0.0, 0.0, 0.0]]
    };
    let inv_count = 1.0 / offsets.len() as f64;

    for c in 0..3 {
        for k in 0..stag.extents[2] {
            for j in 0..stag.extents[1] {
                for i in 0..stag.extents[0] {
                    let dof = stag.dof(c, i, j, k);
                    let ep = stag.edge_position(c, i, j, k);
                    let fp = stag.face_position(c, i, j, k);
                    let mut k_term = Complex64::new(0.0, 0.0);
                    let mut k_eps = Complex64::new(0.0, 0.0);
                    let mut c_alpha = 0.0;
                    let mut c_chi = 0.0;
                    let mut inv_mu = 0.0;
                    let mut zeta = Complex64::new(0.0, 0.0);
                    for off in &offsets {
                        let m =
                            grid.material_at([ep[0] + off[0], ep[1] + off[1], ep[2] + off[2]]);
                        let eps_rel = Complex64::new(m.eps_r, -m.sigma / (omega * EPS0));
                        k_eps += k0sq * eps_rel;
                        k_term +=
                            k0sq * (eps_rel - (m.chi * m.chi + m.kappa * m.kappa) / m.mu_r);
                        c_alpha += m.kappa * k0 / m.mu_r;
                        c_chi += m.chi * k0 / m.mu_r;
                        let mf =
                            grid.material_at([fp[0] + off[0], fp[1] + off[1], fp[2] + off[2]]);
                        inv_mu += 1.0 / mf.mu_r;
                        zeta += Complex64::new(mf.chi, mf.kappa) / media::C0;
                    }
                    out.k_term[dof] = k_term * inv_count;
                    out.k_eps[dof] = k_eps * inv_count;
                    out.c_alpha[dof] = c_alpha * inv_count;
                    out.c_chi[dof] = c_chi * inv_count;
                    out.face_inv_mu[dof] = inv_mu * inv_count;
                    out.face_zeta[dof] = zeta * inv_count;
                    if out.c_chi[dof] != 0.0 {
                        out.any_tellegen = true;
                    }
                }
            }
        }
    }
    out
}

/// Symmetrizing row weights: product of the stretch factors at each
/// component's staggered position (unity outside the absorbing layers).
fn edge_weights(
    stag: &Staggering,
    stretch: &[super::grid::AxisStretch; 3],
) -> Vec<Complex64> {
    let n = stag.cells();
    let mut w = vec![Complex64::new(1.0, 0.0); 3 * n];
    for c in 0..3 {
        for k in 0..stag.extents[2] {
            for j in 0..stag.extents[1] {
                for i in 0..stag.extents[0] {
                    let idx = [i, j, k];
                    let mut prod = Complex64::new(1.0, 0.0);
                    for a in 0..3 {
                        prod *= if a == c {
                            stretch[a].dual[idx[a]]
                        } else {
                            stretch[a].primal[idx[a]]
                        };
                    }
                    w[stag.dof(c, i, j, k)] = prod;
                }
            }
        }
    }
    w
}

/// Tangential-component dofs on perfect-conductor walls.
fn pec_mask(stag: &Staggering, boundaries: [Boundary; 3]) -> Option<Vec<bool>> {
    if !boundaries.contains(&Boundary::PerfectConductor) {
        return None;
    }
    let mut mask = vec![false; 3 * stag.cells()];
    for c in 0..3 {
        for k in 0..stag.extents[2] {
            for j in 0..stag.extents[1] {
                for i in 0..stag.extents[0] {
                    let idx = [i, j, k];
                    for a in 0..3 {
                        if a != c && boundaries[a] == Boundary::PerfectConductor && idx[a] == 0 {
                            mask[stag.dof(c, i, j, k)] = true;
                        }
                    }
                }
            }
        }
    }
    Some(mask)
}

fn apply_constraints(m: &CsrMatrix, mask: &[bool]) -> CsrMatrix {
    let mut trips = Vec::with_capacity(m.nnz());
    for r in 0..m.n_rows {
        if mask[r] {
            trips.push((r as u32, r as u32, Complex64::new(1.0, 0.0)));
            continue;
        }
        for idx in m.row_ptr[r]..m.row_ptr[r + 1] {
            if !mask[m.col_idx[idx] as usize] {
                trips.push((r as u32, m.col_idx[idx], m.values[idx]));
            }
        }
    }
    CsrMatrix::from_triplets(m.n_rows, m.n_cols, &mut trips)
}

fn validate_inputs(
    grid: &MaterialGrid,
    frequency: f64,
    gs: &GridSpec,
    opts: &AssembleOptions,
) -> Result<(f64, Vec<String>), SolverError> {
    gs.validate().map_err(SolverError::Assembly)?;
    if grid.extents != gs.extents {
        return Err(SolverError::Assembly(format!(
            "material grid extents {:?} do not match grid spec {:?}",
            grid.extents, gs.extents
        )));
    }
    if (grid.cell_size - gs.cell_size).abs() > 1e-12 * gs.cell_size {
        return Err(SolverError::Assembly(format!(
            "material grid cell size {} does not match grid spec {}",
            grid.cell_size, gs.cell_size
        )));
    }
    if !matches!(opts.supersample, 1 | 2) {
        return Err(SolverError::Assembly(format!("supersample {}", opts.supersample)));
    }
    // Every material must have a propagating branch; the shortest wavelength
    // sets the resolution constraint.
    let mut max_re_k: f64 = 0.0;
    for m in &grid.materials {
        let wc = media::wave_constants(m, frequency)?;
        max_re_k = max_re_k.max(wc.k_plus.re.abs()).max(wc.k_minus.re.abs());
    }
    let lambda_min = 2.0 * PI / max_re_k;
    let mut warnings = Vec::new();
    if let Some(w) = gs.check_resolution(lambda_min).map_err(SolverError::Assembly)? {
        warnings.push(w);
    }
    let estimate = gs.dof_count() * 61 * 20 * 3;
    if estimate > opts.memory_cap_bytes {
        return Err(SolverError::Capacity(format!(
            "estimated assembly memory {estimate} B exceeds cap {} B",
            opts.memory_cap_bytes
        )));
    }
    Ok((lambda_min, warnings))
}

/// Wavenumber used to grade the absorbing layers: the most common material in
/// the outermost cell layer.
fn boundary_wavenumber(grid: &MaterialGrid, frequency: f64) -> Result<f64, SolverError> {
    let [nx, ny, nz] = grid.extents;
    let mut counts = vec![0usize; grid.materials.len()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                    counts[grid.indices[grid.cell_index(i, j, k)] as usize] += 1;
                }
            }
        }
    }
    let best = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let wc = media::wave_constants(&grid.materials[best], frequency)?;
    Ok(((wc.k_plus + wc.k_minus) / 2.0).re)
}

fn assemble_inner(
    grid: &MaterialGrid,
    frequency: f64,
    gs: &GridSpec,
    opts: &AssembleOptions,
    include_coupling: bool,
) -> Result<LinearOperator, SolverError> {
    let (_, warnings) = validate_inputs(grid, frequency, gs, opts)?;
    let stag = Staggering::new(gs);
    let k_bg = boundary_wavenumber(grid, frequency)?;
    let stretch = grid_stretches(gs, k_bg);

    let curl_e = build_curl_e(&stag, gs.boundaries, &stretch);
    let curl_h = build_curl_h(&stag, gs.boundaries, &stretch);
    let avg = build_avg_face_to_edge(&stag, gs.boundaries);
    let coeffs = sample_coeffs(grid, &stag, frequency, opts.supersample);

    // curl (mu_r^-1 curl E)
    let mut scaled_curl = curl_e.clone();
    scaled_curl
        .scale_rows(&coeffs.face_inv_mu.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
    let curl_curl = curl_h.matmul(&scaled_curl);

    // Standard Helmholtz diagonal is k0^2 eps_r~; for kappa = chi = 0 the
    // coupling correction is exactly zero, so the two paths coincide bitwise.
    let k_diag = if include_coupling { &coeffs.k_term } else { &coeffs.k_eps };
    let mut a = CsrMatrix::diagonal_from(k_diag).add_scaled(&curl_curl, Complex64::new(-1.0, 0.0));

    if include_coupling {
        // Co-located curl G = Avg * C_E.
        let g = avg.matmul(&curl_e);
        // Chiral part: B + B^T with B = diag(kappa k0/mu_r) G. Interior action
        // is 2 alpha~/mu_r <curl E>; the symmetric form keeps reciprocity
        // exact across interfaces.
        let mut b = g.clone();
        b.scale_rows(&coeffs.c_alpha.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        let chiral = b.add_scaled(&b.transpose(), Complex64::new(1.0, 0.0));
        a = a.add_scaled(&chiral, Complex64::new(1.0, 0.0));
        // Tellegen commutator: -j k0 (G M_chi - M_chi G).
        if coeffs.any_tellegen {
            let cchi: Vec<Complex64> =
                coeffs.c_chi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let mut gm = g.transpose();
            gm.scale_rows(&cchi); // (G M)^T = M G^T, so transpose back below
            let g_m = gm.transpose();
            let mut m_g = g;
            m_g.scale_rows(&cchi);
            let comm = g_m.add_scaled(&m_g, Complex64::new(-1.0, 0.0));
            a = a.add_scaled(&comm, Complex64::new(0.0, -1.0));
        }
    }

    // Symmetrizing row weights.
    let w = edge_weights(&stag, &stretch);
    let mut warnings = warnings;
    if include_coupling {
        let one = Complex64::new(1.0, 0.0);
        let coupled_in_absorber = w
            .iter()
            .enumerate()
            .any(|(e, &we)| we != one && (coeffs.c_alpha[e] != 0.0 || coeffs.c_chi[e] != 0.0));
        if coupled_in_absorber {
            warnings.push(
                "magnetoelectric material overlaps the absorbing layers; \
                 reciprocity of the discrete system degrades there"
                    .to_string(),
            );
        }
    }
    a.scale_rows(&w);

    if let Some(mask) = pec_mask(&stag, gs.boundaries) {
        a = apply_constraints(&a, &mask);
    }

    let diag = a.diagonal();
    Ok(LinearOperator {
        matrix: a,
        stag,
        boundaries: gs.boundaries,
        frequency,
        warnings,
        diag,
        curl_e,
        avg,
        face_inv_mu: coeffs.face_inv_mu,
        face_zeta: coeffs.face_zeta,
    })
}

/// Assembles the bi-isotropic operator for a voxelized scene.
pub fn assemble(
    grid: &MaterialGrid,
    frequency: f64,
    gs: &GridSpec,
    opts: &AssembleOptions,
) -> Result<LinearOperator, SolverError> {
    assemble_inner(grid, frequency, gs, opts, true)
}

/// Assembles the standard curl-curl Helmholtz operator (no magnetoelectric
/// coupling terms at all). Reference path for reduction checks.
pub fn assemble_standard(
    grid: &MaterialGrid,
    frequency: f64,
    gs: &GridSpec,
    opts: &AssembleOptions,
) -> Result<LinearOperator, SolverError> {
    assemble_inner(grid, frequency, gs, opts, false)
}
