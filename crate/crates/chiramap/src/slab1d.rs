//! Exact transfer-matrix solver for normal-incidence plane waves through
//! layered bi-isotropic stacks.
//!
//! In the circular basis `e+- = (x -+ j*y)/sqrt(2)` the tangential fields of
//! every plane wave in a bi-isotropic medium stay proportional to a single
//! basis vector, so the boundary-value problem splits into two independent
//! scalar channels. Within a channel, the forward and backward waves carry
//! *different* wavenumbers (`k_plus` forward and `k_minus` backward in the "+"
//! channel, swapped in the "-" channel), which is what produces optical
//! rotation. Each channel is solved with 2x2 interface/propagation matrices;
//! the linear-basis Jones matrices are recombined at the end.

use crate::media::{self, BiIsotropicMaterial, MediaError, WaveConstants};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SlabError {
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error("invalid stack: {0}")]
    InvalidStack(String),
    #[error("unsupported port: {0}")]
    UnsupportedPort(String),
    #[error("rotation undefined: total extinction (|t_xx| + |t_yx| < 1e-12)")]
    UndefinedRotation,
}

/// One homogeneous layer of a stack.
#[derive(Debug, Clone, Copy)]
pub struct Layer {
    pub material: BiIsotropicMaterial,
    /// Thickness, m (> 0).
    pub thickness: f64,
}

/// A layered stack between two achiral, lossless embedding half-spaces.
#[derive(Debug, Clone)]
pub struct LayerStack {
    pub embedding_in: BiIsotropicMaterial,
    pub layers: Vec<Layer>,
    pub embedding_out: BiIsotropicMaterial,
    /// Operating frequency, Hz.
    pub frequency: f64,
}

impl LayerStack {
    /// Single layer embedded in vacuum.
    pub fn single_in_vacuum(material: BiIsotropicMaterial, thickness: f64, frequency: f64) -> Self {
        Self {
            embedding_in: BiIsotropicMaterial::vacuum(),
            layers: vec![Layer { material, thickness }],
            embedding_out: BiIsotropicMaterial::vacuum(),
            frequency,
        }
    }

    fn validate(&self) -> Result<(), SlabError> {
        if !self.frequency.is_finite() || self.frequency <= 0.0 {
            return Err(SlabError::InvalidStack(format!("frequency {} Hz", self.frequency)));
        }
        for (name, emb) in [("input", &self.embedding_in), ("output", &self.embedding_out)] {
            emb.validate()?;
            if !emb.is_achiral() {
                return Err(SlabError::InvalidStack(format!(
                    "{name} embedding must be achiral (kappa = chi = 0)"
                )));
            }
            if emb.sigma != 0.0 {
                return Err(SlabError::UnsupportedPort(format!(
                    "{name} embedding is lossy (sigma = {}); port wavenumber must be real",
                    emb.sigma
                )));
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer.material.validate()?;
            if !(layer.thickness > 0.0 && layer.thickness.is_finite()) {
                return Err(SlabError::InvalidStack(format!(
                    "layer {i} thickness {} m must be > 0",
                    layer.thickness
                )));
            }
        }
        Ok(())
    }

    /// Accumulated `alpha_tilde * d` over the layers; used to unwrap the
    /// mod-pi rotation extracted from the Jones matrix.
    pub fn rotation_hint(&self) -> Result<f64, SlabError> {
        let mut total = 0.0;
        for layer in &self.layers {
            let wc = media::wave_constants(&layer.material, self.frequency)?;
            total += wc.alpha_tilde * layer.thickness;
        }
        Ok(total)
    }
}

/// 2x2 complex field transmission (or reflection) matrix in the linear
/// polarization basis: columns act on the incident (x, y) components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub t_xx: Complex64,
    pub t_xy: Complex64,
    pub t_yx: Complex64,
    pub t_yy: Complex64,
}

impl JonesMatrix {
    pub fn identity() -> Self {
        Self {
            t_xx: Complex64::new(1.0, 0.0),
            t_xy: Complex64::new(0.0, 0.0),
            t_yx: Complex64::new(0.0, 0.0),
            t_yy: Complex64::new(1.0, 0.0),
        }
    }

    pub fn zero() -> Self {
        Self {
            t_xx: Complex64::new(0.0, 0.0),
            t_xy: Complex64::new(0.0, 0.0),
            t_yx: Complex64::new(0.0, 0.0),
            t_yy: Complex64::new(0.0, 0.0),
        }
    }

    /// The matrix produced by a positive-kappa slab accumulating rotation
    /// `angle` (counterclockwise viewed toward the source).
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            t_xx: Complex64::new(c, 0.0),
            t_xy: Complex64::new(s, 0.0),
            t_yx: Complex64::new(-s, 0.0),
            t_yy: Complex64::new(c, 0.0),
        }
    }

    /// Power carried by the x-polarized input into (co, cross) outputs.
    pub fn power_split(&self) -> (f64, f64) {
        (self.t_xx.norm_sqr(), self.t_yx.norm_sqr())
    }

    pub fn transpose(&self) -> Self {
        Self { t_xx: self.t_xx, t_xy: self.t_yx, t_yx: self.t_xy, t_yy: self.t_yy }
    }

    /// Assemble from the two circular-channel amplitudes.
    fn from_channels(plus: Complex64, minus: Complex64) -> Self {
        let half = Complex64::new(0.5, 0.0);
        let jhalf = Complex64::new(0.0, 0.5);
        let t_xx = half * (plus + minus);
        let t_yx = -jhalf * (plus - minus);
        Self { t_xx, t_xy: -t_yx, t_yx, t_yy: t_xx }
    }
}

/// Polarimetric reduction of a transmission Jones matrix.
#[derive(Debug, Clone, Copy)]
pub struct Polarimetry {
    /// Polarization rotation, rad.
    pub rotation: f64,
    /// Ellipticity angle, rad, in [-pi/4, pi/4].
    pub ellipticity: f64,
    /// |t_xx|^2.
    pub co_power: f64,
    /// |t_yx|^2.
    pub cross_power: f64,
}

/// Wave description of one circular channel inside one medium.
#[derive(Debug, Clone, Copy)]
struct ChannelMedium {
    k_fwd: Complex64,
    k_bwd: Complex64,
    /// H = y_fwd * E for the forward wave, y_bwd * E for the backward wave.
    y_fwd: Complex64,
    y_bwd: Complex64,
}

impl ChannelMedium {
    fn new(wc: &WaveConstants, m: &BiIsotropicMaterial, frequency: f64, plus: bool) -> Self {
        let omega = 2.0 * PI * frequency;
        let gamma = (wc.k_plus + wc.k_minus) / 2.0;
        let chi_k0 = m.chi * media::free_space_wavenumber(frequency);
        let om_mu = omega * m.mu();
        let j = Complex64::new(0.0, 1.0);
        // Forward "+": H = (j*gamma - chi*k0)/(omega*mu) E; backward flips the
        // sign of the j*gamma part. The "-" channel mirrors both.
        if plus {
            Self {
                k_fwd: wc.k_plus,
                k_bwd: wc.k_minus,
                y_fwd: (j * gamma - chi_k0) / om_mu,
                y_bwd: (-j * gamma - chi_k0) / om_mu,
            }
        } else {
            Self {
                k_fwd: wc.k_minus,
                k_bwd: wc.k_plus,
                y_fwd: (-j * gamma - chi_k0) / om_mu,
                y_bwd: (j * gamma - chi_k0) / om_mu,
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Mat2 {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl Mat2 {
    fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// Relates (A, B) just left of an interface to (A, B) just right of it.
fn interface(left: &ChannelMedium, right: &ChannelMedium) -> Mat2 {
    let det = left.y_bwd - left.y_fwd;
    Mat2 {
        a: (left.y_bwd - right.y_fwd) / det,
        b: (left.y_bwd - right.y_bwd) / det,
        c: (right.y_fwd - left.y_fwd) / det,
        d: (right.y_bwd - left.y_fwd) / det,
    }
}

/// Relates (A, B) at the left face of a layer to (A, B) at its right face.
fn propagation(m: &ChannelMedium, thickness: f64) -> Mat2 {
    let j = Complex64::new(0.0, 1.0);
    Mat2 {
        a: (j * m.k_fwd * thickness).exp(),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: (-j * m.k_bwd * thickness).exp(),
    }
}

fn channel_amplitudes(s: &LayerStack, plus: bool) -> Result<(Complex64, Complex64), SlabError> {
    let emb_in = ChannelMedium::new(
        &media::wave_constants(&s.embedding_in, s.frequency)?,
        &s.embedding_in,
        s.frequency,
        plus,
    );
    let emb_out = ChannelMedium::new(
        &media::wave_constants(&s.embedding_out, s.frequency)?,
        &s.embedding_out,
        s.frequency,
        plus,
    );

    let mut media_chain = Vec::with_capacity(s.layers.len() + 2);
    media_chain.push((emb_in, 0.0));
    for layer in &s.layers {
        let wc = media::wave_constants(&layer.material, s.frequency)?;
        media_chain.push((ChannelMedium::new(&wc, &layer.material, s.frequency, plus), layer.thickness));
    }
    media_chain.push((emb_out, 0.0));

    let mut m = Mat2 {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };
    for w in media_chain.windows(2) {
        let (left, _) = w[0];
        let (right, d_right) = w[1];
        m = m.mul(&interface(&left, &right));
        if d_right > 0.0 {
            m = m.mul(&propagation(&right, d_right));
        }
    }

    let t = Complex64::new(1.0, 0.0) / m.a;
    let r = m.c / m.a;
    Ok((t, r))
}

/// Transmission and reflection Jones matrices of a stack.
pub fn stack_jones(s: &LayerStack) -> Result<(JonesMatrix, JonesMatrix), SlabError> {
    s.validate()?;
    let (t_plus, r_plus) = channel_amplitudes(s, true)?;
    let (t_minus, r_minus) = channel_amplitudes(s, false)?;
    Ok((
        JonesMatrix::from_channels(t_plus, t_minus),
        JonesMatrix::from_channels(r_plus, r_minus),
    ))
}

/// Power transmittance and reflectance for x-polarized incidence, accounting
/// for unequal (real) port impedances.
pub fn power_balance(s: &LayerStack) -> Result<(f64, f64), SlabError> {
    let (t, r) = stack_jones(s)?;
    let eta_in = media::wave_constants(&s.embedding_in, s.frequency)?.eta.re;
    let eta_out = media::wave_constants(&s.embedding_out, s.frequency)?.eta.re;
    let transmitted = (t.t_xx.norm_sqr() + t.t_yx.norm_sqr()) * eta_in / eta_out;
    let reflected = r.t_xx.norm_sqr() + r.t_yx.norm_sqr();
    Ok((transmitted, reflected))
}

/// Rotation, ellipticity and power split of a transmission Jones matrix.
/// The rotation is resolved to (-pi/2, pi/2]; use [`stack_polarimetry`] when
/// the stack is available so the angle can be unwrapped.
pub fn polarimetry(t: &JonesMatrix) -> Result<Polarimetry, SlabError> {
    if t.t_xx.norm() + t.t_yx.norm() < 1e-12 {
        return Err(SlabError::UndefinedRotation);
    }
    let j = Complex64::new(0.0, 1.0);
    // Circular components of the transmitted state for x-polarized input.
    let c_plus = (t.t_xx + j * t.t_yx) / 2.0f64.sqrt();
    let c_minus = (t.t_xx - j * t.t_yx) / 2.0f64.sqrt();
    // Common phase cancels in the ratio; the result is the rotation mod pi.
    let mut rotation = 0.5 * (c_minus / c_plus).arg();
    if rotation <= -PI / 2.0 {
        rotation += PI;
    }
    let np = c_plus.norm();
    let nm = c_minus.norm();
    let ellipticity = ((np - nm) / (np + nm)).atan();
    Ok(Polarimetry {
        rotation,
        ellipticity,
        co_power: t.t_xx.norm_sqr(),
        cross_power: t.t_yx.norm_sqr(),
    })
}

/// Polarimetry of the stack's transmission with the rotation unwrapped using
/// the accumulated per-layer `alpha_tilde * d`.
pub fn stack_polarimetry(s: &LayerStack) -> Result<Polarimetry, SlabError> {
    let (t, _) = stack_jones(s)?;
    let mut p = polarimetry(&t)?;
    let hint = s.rotation_hint()?;
    let turns = ((hint - p.rotation) / PI).round();
    p.rotation += turns * PI;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{free_space_wavenumber, C0};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    const F0: f64 = 2.45e9;

    fn matched_slab(kappa: f64, d: f64) -> LayerStack {
        LayerStack::single_in_vacuum(BiIsotropicMaterial::chiral(1.0, 0.0, kappa), d, F0)
    }

    #[test]
    fn empty_stack_is_identity() {
        let s = LayerStack {
            embedding_in: BiIsotropicMaterial::vacuum(),
            layers: vec![],
            embedding_out: BiIsotropicMaterial::vacuum(),
            frequency: F0,
        };
        let (t, r) = stack_jones(&s).unwrap();
        assert_eq!(t, JonesMatrix::identity());
        assert_eq!(r, JonesMatrix::zero());
    }

    #[test]
    fn matched_half_wavelength_slab_rotates_quarter_turn() {
        // kappa * k0 * d = pi/2 when d = lambda0/2 and kappa = 0.5.
        let d = C0 / (2.0 * F0);
        assert_relative_eq!(d, 61.18e-3, max_relative = 1e-3);
        let s = matched_slab(0.5, d);
        let (t, _) = stack_jones(&s).unwrap();
        assert!(t.t_xx.norm() <= 1e-12, "|t_xx| = {}", t.t_xx.norm());
        assert_relative_eq!(t.t_yx.norm(), 1.0, max_relative = 1e-12);
        let p = stack_polarimetry(&s).unwrap();
        assert_relative_eq!(p.rotation, PI / 2.0, max_relative = 1e-12);
        assert_relative_eq!(p.cross_power, 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(p.ellipticity, 0.0, epsilon = 1e-12);
    }

    /// Standard achiral Fabry-Perot transmission, written independently of
    /// the transfer-matrix path.
    fn fabry_perot_oracle(eps_r: f64, d: f64, f: f64) -> Complex64 {
        let n = eps_r.sqrt();
        let k0 = free_space_wavenumber(f);
        let j = Complex64::new(0.0, 1.0);
        let r12 = (1.0 - n) / (1.0 + n); // vacuum -> slab, impedance 1/n
        let t12 = 1.0 + r12;
        let r23 = -r12;
        let t23 = 1.0 + r23;
        let phase = (-j * n * k0 * d).exp();
        t12 * t23 * phase / (1.0 + r12 * r23 * phase * phase)
    }

    #[test]
    fn achiral_slab_has_no_cross_polarization() {
        let d = 17.0e-3;
        let s = LayerStack::single_in_vacuum(BiIsotropicMaterial::dielectric(4.0, 0.0), d, F0);
        let (t, _) = stack_jones(&s).unwrap();
        assert_eq!(t.t_yx, Complex64::new(0.0, 0.0));
        assert_eq!(t.t_xy, Complex64::new(0.0, 0.0));
        let oracle = fabry_perot_oracle(4.0, d, F0);
        assert_relative_eq!(t.t_xx.re, oracle.re, max_relative = 1e-12);
        assert_relative_eq!(t.t_xx.im, oracle.im, max_relative = 1e-12);
    }

    #[test]
    fn polarimetry_of_identity_and_rotation() {
        let p = polarimetry(&JonesMatrix::identity()).unwrap();
        assert_eq!(p.rotation, 0.0);
        assert_eq!(p.ellipticity, 0.0);
        assert_eq!(p.co_power, 1.0);
        assert_eq!(p.cross_power, 0.0);

        let p = polarimetry(&JonesMatrix::rotation(PI / 6.0)).unwrap();
        assert_relative_eq!(p.rotation, PI / 6.0, max_relative = 1e-12);
        assert_abs_diff_eq!(p.ellipticity, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn polarimetry_rejects_total_extinction() {
        assert!(matches!(polarimetry(&JonesMatrix::zero()), Err(SlabError::UndefinedRotation)));
    }

    #[test]
    fn lossy_embedding_is_rejected() {
        let mut s = matched_slab(0.5, 0.01);
        s.embedding_in = BiIsotropicMaterial::dielectric(1.0, 0.1);
        assert!(matches!(stack_jones(&s), Err(SlabError::UnsupportedPort(_))));
    }

    #[test]
    fn chiral_embedding_is_rejected() {
        let mut s = matched_slab(0.5, 0.01);
        s.embedding_out = BiIsotropicMaterial::chiral(1.0, 0.0, 0.2);
        assert!(matches!(stack_jones(&s), Err(SlabError::InvalidStack(_))));
    }

    #[test]
    fn negative_thickness_is_rejected() {
        let s = matched_slab(0.5, -0.01);
        assert!(matches!(stack_jones(&s), Err(SlabError::InvalidStack(_))));
    }

    #[test]
    fn sigma_strictly_dissipates() {
        let lossless =
            LayerStack::single_in_vacuum(BiIsotropicMaterial::chiral(4.0, 0.0, 0.3), 0.02, F0);
        let lossy =
            LayerStack::single_in_vacuum(BiIsotropicMaterial::chiral(4.0, 0.5, 0.3), 0.02, F0);
        let (t0, r0) = power_balance(&lossless).unwrap();
        let (t1, r1) = power_balance(&lossy).unwrap();
        assert_relative_eq!(t0 + r0, 1.0, max_relative = 1e-10);
        assert!(t1 + r1 < 1.0 - 1e-6, "lossy stack must absorb: {}", t1 + r1);
        assert!(t1 < t0);
    }

    #[test]
    fn unequal_ports_conserve_power() {
        let s = LayerStack {
            embedding_in: BiIsotropicMaterial::vacuum(),
            layers: vec![Layer {
                material: BiIsotropicMaterial::chiral(6.0, 0.0, 0.4),
                thickness: 0.013,
            }],
            embedding_out: BiIsotropicMaterial::dielectric(9.0, 0.0),
            frequency: F0,
        };
        let (t, r) = power_balance(&s).unwrap();
        assert_relative_eq!(t + r, 1.0, max_relative = 1e-10);
    }

    proptest! {
        /// Matched-slab oracle: rotation = kappa*k0*d exactly, energy split
        /// cos^2 / sin^2, no reflection.
        #[test]
        fn matched_slab_rotation_law(kappa in -1.0f64..1.0, d_mm in 1.0f64..200.0) {
            let d = d_mm * 1e-3;
            let s = matched_slab(kappa, d);
            let expected = kappa * free_space_wavenumber(F0) * d;
            let p = stack_polarimetry(&s).unwrap();
            prop_assert!((p.rotation - expected).abs() < 1e-10,
                "rotation {} vs {}", p.rotation, expected);
            prop_assert!((p.co_power - expected.cos().powi(2)).abs() < 1e-10);
            prop_assert!((p.cross_power - expected.sin().powi(2)).abs() < 1e-10);
            prop_assert!((p.co_power + p.cross_power - 1.0).abs() < 1e-10);
        }

        /// kappa -> -kappa flips the sign of t_yx and keeps |t_yx|.
        #[test]
        fn kappa_parity(kappa in 0.05f64..0.9, eps_r in 1.0f64..20.0, d_mm in 1.0f64..60.0) {
            let d = d_mm * 1e-3;
            let a = LayerStack::single_in_vacuum(
                BiIsotropicMaterial::chiral(eps_r, 0.0, kappa), d, F0);
            let b = LayerStack::single_in_vacuum(
                BiIsotropicMaterial::chiral(eps_r, 0.0, -kappa), d, F0);
            let (ta, _) = stack_jones(&a).unwrap();
            let (tb, _) = stack_jones(&b).unwrap();
            prop_assert!((ta.t_yx + tb.t_yx).norm() < 1e-12);
            prop_assert!((ta.t_yx.norm() - tb.t_yx.norm()).abs() < 1e-12);
        }

        /// Reciprocity for chi = 0: propagating backward through the mirrored
        /// stack equals the transpose of the forward transmission. In the lab
        /// frame the reversed propagation direction swaps the circular
        /// channels, which is the same as negating kappa in every layer.
        #[test]
        fn reciprocity(
            kappa in -0.8f64..0.8,
            eps1 in 1.0f64..12.0,
            eps2 in 1.0f64..12.0,
            d1_mm in 1.0f64..40.0,
            d2_mm in 1.0f64..40.0,
        ) {
            let fwd = LayerStack {
                embedding_in: BiIsotropicMaterial::vacuum(),
                layers: vec![
                    Layer { material: BiIsotropicMaterial::chiral(eps1, 0.0, kappa), thickness: d1_mm * 1e-3 },
                    Layer { material: BiIsotropicMaterial::dielectric(eps2, 0.0), thickness: d2_mm * 1e-3 },
                ],
                embedding_out: BiIsotropicMaterial::vacuum(),
                frequency: F0,
            };
            let mut rev = fwd.clone();
            rev.layers.reverse();
            for layer in &mut rev.layers {
                layer.material.kappa = -layer.material.kappa;
            }
            let (tf, _) = stack_jones(&fwd).unwrap();
            let (tr, _) = stack_jones(&rev).unwrap();
            let tt = tf.transpose();
            for (a, b) in [(tr.t_xx, tt.t_xx), (tr.t_xy, tt.t_xy), (tr.t_yx, tt.t_yx), (tr.t_yy, tt.t_yy)] {
                prop_assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
        }

        /// Lossless stacks conserve power.
        #[test]
        fn lossless_energy_conservation(
            kappa in -0.8f64..0.8,
            eps_r in 1.0f64..30.0,
            d_mm in 0.5f64..80.0,
        ) {
            let s = LayerStack::single_in_vacuum(
                BiIsotropicMaterial::chiral(eps_r, 0.0, kappa), d_mm * 1e-3, F0);
            let (t, r) = power_balance(&s).unwrap();
            prop_assert!((t + r - 1.0).abs() < 1e-10, "t + r = {}", t + r);
        }

        /// Splitting a layer in two changes nothing.
        #[test]
        fn composition(
            kappa in -0.8f64..0.8,
            eps_r in 1.0f64..20.0,
            d_mm in 2.0f64..60.0,
            split in 0.1f64..0.9,
        ) {
            let m = BiIsotropicMaterial::chiral(eps_r, 0.1, kappa);
            let d = d_mm * 1e-3;
            let whole = LayerStack::single_in_vacuum(m, d, F0);
            let halves = LayerStack {
                embedding_in: BiIsotropicMaterial::vacuum(),
                layers: vec![
                    Layer { material: m, thickness: d * split },
                    Layer { material: m, thickness: d * (1.0 - split) },
                ],
                embedding_out: BiIsotropicMaterial::vacuum(),
                frequency: F0,
            };
            let (ta, ra) = stack_jones(&whole).unwrap();
            let (tb, rb) = stack_jones(&halves).unwrap();
            prop_assert!((ta.t_xx - tb.t_xx).norm() < 1e-10);
            prop_assert!((ta.t_yx - tb.t_yx).norm() < 1e-10);
            prop_assert!((ra.t_xx - rb.t_xx).norm() < 1e-10);
            prop_assert!((ra.t_yx - rb.t_yx).norm() < 1e-10);
        }
    }
}
