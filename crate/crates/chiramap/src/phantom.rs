//! Declarative scenes (matching medium, head, chiral inclusion) and their
//! voxelization onto uniform material grids.
//!
//! Scenes are shape lists painted over a background medium in order: the last
//! shape containing a point wins. All coordinates are in meters with the
//! origin at the domain center.

use crate::media::BiIsotropicMaterial;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhantomError {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Media(#[from] crate::media::MediaError),
}

/// Analytic shape primitive.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Ellipsoid {
        /// Center, m.
        center: [f64; 3],
        /// Semiaxes along the (rotated) principal directions, m.
        semiaxes: [f64; 3],
        /// Intrinsic Euler angles (about z, then y, then x), rad.
        rotation: [f64; 3],
    },
    Box {
        /// Minimum corner, m.
        corner: [f64; 3],
        /// Edge lengths, m.
        size: [f64; 3],
    },
}

impl Shape {
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match *self {
            Shape::Ellipsoid { center, semiaxes, rotation } => {
                let d = [p[0] - center[0], p[1] - center[1], p[2] - center[2]];
                let q = rotate_inverse(d, rotation);
                let s = (q[0] / semiaxes[0]).powi(2)
                    + (q[1] / semiaxes[1]).powi(2)
                    + (q[2] / semiaxes[2]).powi(2);
                s <= 1.0
            }
            Shape::Box { corner, size } => {
                (0..3).all(|a| p[a] >= corner[a] && p[a] < corner[a] + size[a])
            }
        }
    }

    /// Half-extents of an axis-aligned bounding box around the shape center.
    fn bounding_half_extents(&self) -> [f64; 3] {
        match *self {
            Shape::Ellipsoid { semiaxes, rotation, .. } => {
                // Conservative: rows of |R| applied to the semiaxes.
                let r = rotation_matrix(rotation);
                let mut h = [0.0; 3];
                for (a, h_a) in h.iter_mut().enumerate() {
                    *h_a = (0..3).map(|b| r[a][b].abs() * semiaxes[b]).sum();
                }
                h
            }
            Shape::Box { size, .. } => [size[0] / 2.0, size[1] / 2.0, size[2] / 2.0],
        }
    }

    fn center(&self) -> [f64; 3] {
        match *self {
            Shape::Ellipsoid { center, .. } => center,
            Shape::Box { corner, size } => [
                corner[0] + size[0] / 2.0,
                corner[1] + size[1] / 2.0,
                corner[2] + size[2] / 2.0,
            ],
        }
    }
}

/// Rotation matrix for intrinsic Euler angles (z, then y, then x).
fn rotation_matrix(angles: [f64; 3]) -> [[f64; 3]; 3] {
    let (sz, cz) = angles[0].sin_cos();
    let (sy, cy) = angles[1].sin_cos();
    let (sx, cx) = angles[2].sin_cos();
    // R = Rz * Ry * Rx
    [
        [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
        [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
        [-sy, cy * sx, cy * cx],
    ]
}

/// Applies the inverse (transpose) rotation to a vector.
fn rotate_inverse(v: [f64; 3], angles: [f64; 3]) -> [f64; 3] {
    let r = rotation_matrix(angles);
    let mut out = [0.0; 3];
    for (a, out_a) in out.iter_mut().enumerate() {
        *out_a = (0..3).map(|b| r[b][a] * v[b]).sum();
    }
    out
}

/// A background medium plus an ordered list of painted shapes.
#[derive(Debug, Clone)]
pub struct Scene {
    pub background: BiIsotropicMaterial,
    pub shapes: Vec<(Shape, BiIsotropicMaterial)>,
    /// Edge lengths of the domain box, m; the domain is centered at the origin.
    pub domain_size: [f64; 3],
    /// Operating frequency, Hz.
    pub frequency: f64,
}

impl Scene {
    /// Material at a point (painter's order: the last containing shape wins).
    pub fn material_at(&self, p: [f64; 3]) -> &BiIsotropicMaterial {
        self.shapes
            .iter()
            .rev()
            .find(|(shape, _)| shape.contains(p))
            .map(|(_, m)| m)
            .unwrap_or(&self.background)
    }

    /// Index into the compact material table built by [`Scene::material_table`].
    fn material_index_at(&self, p: [f64; 3], index_of_shape: &[u16]) -> u16 {
        for (s, (shape, _)) in self.shapes.iter().enumerate().rev() {
            if shape.contains(p) {
                return index_of_shape[s];
            }
        }
        0
    }

    /// Deduplicated material table; entry 0 is the background. Returns the
    /// table and the table index of each shape.
    fn material_table(&self) -> (Vec<BiIsotropicMaterial>, Vec<u16>) {
        let mut table = vec![self.background];
        let mut index_of_shape = Vec::with_capacity(self.shapes.len());
        for (_, m) in &self.shapes {
            let idx = match table.iter().position(|t| t == m) {
                Some(i) => i,
                None => {
                    table.push(*m);
                    table.len() - 1
                }
            };
            index_of_shape.push(idx as u16);
        }
        (table, index_of_shape)
    }

    pub fn validate(&self) -> Result<(), PhantomError> {
        self.background.validate()?;
        if self.domain_size.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(PhantomError::InvalidParameter(format!(
                "domain size {:?} must be positive",
                self.domain_size
            )));
        }
        if !self.frequency.is_finite() || self.frequency <= 0.0 {
            return Err(PhantomError::InvalidParameter(format!(
                "frequency {} Hz",
                self.frequency
            )));
        }
        for (i, (shape, m)) in self.shapes.iter().enumerate() {
            m.validate()?;
            let c = shape.center();
            let h = shape.bounding_half_extents();
            for a in 0..3 {
                if c[a] - h[a] < -self.domain_size[a] / 2.0 - 1e-12
                    || c[a] + h[a] > self.domain_size[a] / 2.0 + 1e-12
                {
                    return Err(PhantomError::Geometry(format!(
                        "shape {i} extends outside the domain along axis {a}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parameters of the head scene. Defaults reproduce the full-scale phantom:
/// a lossless eps_r = 53 matching medium, a homogenized head ellipsoid
/// (90 x 115 x 100 mm semiaxes, eps_r = 53, sigma = 1.1 S/m) and a chiral
/// inclusion ellipsoid (semiaxes 30, 20, 10 mm, kappa = 0.5) with its longest
/// axis along the propagation direction (y).
#[derive(Debug, Clone)]
pub struct PhantomParams {
    pub domain_size: [f64; 3],
    pub frequency: f64,
    pub background: BiIsotropicMaterial,
    pub head_semiaxes: [f64; 3],
    pub head_material: BiIsotropicMaterial,
    /// Inclusion semiaxes along (x, y, z), m.
    pub inclusion_semiaxes: [f64; 3],
    /// Inclusion center offset from the head center, m.
    pub inclusion_offset: [f64; 3],
    pub inclusion_kappa: f64,
}

impl Default for PhantomParams {
    fn default() -> Self {
        Self {
            domain_size: [0.3, 0.3, 0.3],
            frequency: 2.45e9,
            background: BiIsotropicMaterial::dielectric(53.0, 0.0),
            head_semiaxes: [90e-3, 115e-3, 100e-3],
            head_material: BiIsotropicMaterial::dielectric(53.0, 1.1),
            // 30 mm semiaxis along y: longest chord along propagation.
            inclusion_semiaxes: [20e-3, 30e-3, 10e-3],
            inclusion_offset: [0.0, 0.0, 0.0],
            inclusion_kappa: 0.5,
        }
    }
}

impl PhantomParams {
    /// Desk-scale preset: 80 mm cube domain, eps_r = 10 lossless background,
    /// spherical head (r = 30 mm, sigma = 0.2 S/m) and a 15 x 10 x 5 mm
    /// inclusion. The inclusion is offset so that its projection lands on a
    /// cell center of the 6 x 6 / 10 mm scan grid.
    pub fn mini() -> Self {
        Self {
            domain_size: [0.08, 0.08, 0.08],
            frequency: 2.45e9,
            background: BiIsotropicMaterial::dielectric(10.0, 0.0),
            head_semiaxes: [30e-3, 30e-3, 30e-3],
            head_material: BiIsotropicMaterial::dielectric(10.0, 0.2),
            inclusion_semiaxes: [10e-3, 15e-3, 5e-3],
            inclusion_offset: [5e-3, 0.0, 5e-3],
            inclusion_kappa: 0.5,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.inclusion_kappa = kappa;
        self
    }
}

/// Builds the three-region head scene: matching-medium background, lossy
/// head ellipsoid, chiral inclusion ellipsoid.
pub fn build_head_scene(p: &PhantomParams) -> Result<Scene, PhantomError> {
    for v in [&p.head_semiaxes, &p.inclusion_semiaxes] {
        if v.iter().any(|&a| !(a > 0.0)) {
            return Err(PhantomError::InvalidParameter(format!("semiaxes {v:?} must be > 0")));
        }
    }
    let head = Shape::Ellipsoid {
        center: [0.0; 3],
        semiaxes: p.head_semiaxes,
        rotation: [0.0; 3],
    };
    let inclusion = Shape::Ellipsoid {
        center: p.inclusion_offset,
        semiaxes: p.inclusion_semiaxes,
        rotation: [0.0; 3],
    };
    // The inclusion must sit inside the head: sample its surface.
    for dir in fibonacci_sphere(256) {
        let surface = [
            p.inclusion_offset[0] + dir[0] * p.inclusion_semiaxes[0],
            p.inclusion_offset[1] + dir[1] * p.inclusion_semiaxes[1],
            p.inclusion_offset[2] + dir[2] * p.inclusion_semiaxes[2],
        ];
        if !head.contains(surface) {
            return Err(PhantomError::Geometry(format!(
                "inclusion escapes the head at {surface:?}"
            )));
        }
    }
    let mut inclusion_material = p.head_material;
    inclusion_material.kappa = p.inclusion_kappa;
    let scene = Scene {
        background: p.background,
        shapes: vec![(head, p.head_material), (inclusion, inclusion_material)],
        domain_size: p.domain_size,
        frequency: p.frequency,
    };
    scene.validate()?;
    Ok(scene)
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let theta = golden * i as f64;
            [r * theta.cos(), y, r * theta.sin()]
        })
        .collect()
}

/// Per-cell material indices over a uniform grid, with a compact material
/// table and the grid geometry.
#[derive(Debug, Clone)]
pub struct MaterialGrid {
    pub indices: Vec<u16>,
    pub materials: Vec<BiIsotropicMaterial>,
    /// Coordinate of the grid corner (node 0,0,0), m.
    pub origin: [f64; 3],
    /// Uniform cell size, m.
    pub cell_size: f64,
    /// Cell counts per axis.
    pub extents: [usize; 3],
}

impl MaterialGrid {
    pub fn cell_count(&self) -> usize {
        self.extents[0] * self.extents[1] * self.extents[2]
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.extents[1] + j) * self.extents[0] + i
    }

    /// Material at an arbitrary point; coordinates are clamped onto the grid.
    #[inline]
    pub fn material_at(&self, p: [f64; 3]) -> &BiIsotropicMaterial {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let t = ((p[a] - self.origin[a]) / self.cell_size).floor();
            c[a] = (t.max(0.0) as usize).min(self.extents[a] - 1);
        }
        &self.materials[self.indices[self.cell_index(c[0], c[1], c[2])] as usize]
    }

    /// Fraction of cells carrying each material index.
    pub fn volume_fractions(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.materials.len()];
        for &i in &self.indices {
            counts[i as usize] += 1;
        }
        counts.iter().map(|&c| c as f64 / self.indices.len() as f64).collect()
    }
}

/// Voxelizes a scene onto a grid of `extents` cells of size `cell_size`,
/// centered on the scene origin. `supersample` 1 tests cell centroids;
/// 2 takes the majority over an eight-point sub-sample (ties fall back to
/// the centroid).
pub fn voxelize(
    scene: &Scene,
    cell_size: f64,
    extents: [usize; 3],
    supersample: u8,
) -> Result<MaterialGrid, PhantomError> {
    scene.validate()?;
    if !(cell_size > 0.0) || !cell_size.is_finite() {
        return Err(PhantomError::InvalidParameter(format!("cell size {cell_size}")));
    }
    if extents.iter().any(|&n| n == 0) {
        return Err(PhantomError::InvalidParameter(format!("extents {extents:?}")));
    }
    if !matches!(supersample, 1 | 2) {
        return Err(PhantomError::InvalidParameter(format!(
            "supersample {supersample} (must be 1 or 2)"
        )));
    }
    let (materials, index_of_shape) = scene.material_table();
    let origin = [
        -(extents[0] as f64) * cell_size / 2.0,
        -(extents[1] as f64) * cell_size / 2.0,
        -(extents[2] as f64) * cell_size / 2.0,
    ];
    let mut indices = vec![0u16; extents[0] * extents[1] * extents[2]];
    let h = cell_size;
    let mut cursor = 0;
    for k in 0..extents[2] {
        for j in 0..extents[1] {
            for i in 0..extents[0] {
                let center = [
                    origin[0] + (i as f64 + 0.5) * h,
                    origin[1] + (j as f64 + 0.5) * h,
                    origin[2] + (k as f64 + 0.5) * h,
                ];
                indices[cursor] = if supersample == 1 {
                    scene.material_index_at(center, &index_of_shape)
                } else {
                    majority_sample(scene, center, h, &index_of_shape, materials.len())
                };
                cursor += 1;
            }
        }
    }
    Ok(MaterialGrid { indices, materials, origin, cell_size, extents })
}

fn majority_sample(
    scene: &Scene,
    center: [f64; 3],
    h: f64,
    index_of_shape: &[u16],
    n_materials: usize,
) -> u16 {
    let q = h / 4.0;
    let mut counts = vec![0u8; n_materials];
    for dz in [-q, q] {
        for dy in [-q, q] {
            for dx in [-q, q] {
                let p = [center[0] + dx, center[1] + dy, center[2] + dz];
                counts[scene.material_index_at(p, index_of_shape) as usize] += 1;
            }
        }
    }
    let best = counts.iter().max().copied().unwrap_or(0);
    let winners: Vec<u16> =
        (0..n_materials as u16).filter(|&m| counts[m as usize] == best).collect();
    if winners.len() == 1 {
        winners[0]
    } else {
        scene.material_index_at(center, index_of_shape)
    }
}
