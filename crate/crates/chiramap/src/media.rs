//! Constitutive and dispersion math for bi-isotropic materials.
//!
//! A bi-isotropic medium couples `D` and `B` to both `E` and `H` through the
//! scalar coefficients `xi` and `zeta`:
//!
//! ```text
//! D = eps * E + xi * H        xi   = (chi - j*kappa) * sqrt(eps0*mu0)
//! B = zeta * E + mu * H       zeta = (chi + j*kappa) * sqrt(eps0*mu0)
//! ```
//!
//! The time convention is `exp(+j*omega*t)`, so loss enters the complex
//! permittivity as `eps = eps0*eps_r - j*sigma/omega` and decaying forward
//! waves have `Im(k) <= 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * PI;
/// Vacuum permittivity, F/m. Defined through `C0` and `MU0` so that
/// `sqrt(EPS0*MU0) == 1/C0` holds to machine precision.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid frequency {0} Hz (must be finite and > 0)")]
    InvalidFrequency(f64),
    #[error("degenerate material: {0}")]
    Degenerate(String),
}

/// Non-dispersive bi-isotropic material parameters.
///
/// `kappa = chi = 0` recovers a simple isotropic medium. A nonzero Tellegen
/// parameter `chi` makes the medium non-reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiIsotropicMaterial {
    /// Relative permittivity (real part), dimensionless.
    pub eps_r: f64,
    /// Conductivity, S/m.
    pub sigma: f64,
    /// Relative permeability, dimensionless.
    pub mu_r: f64,
    /// Chirality parameter, dimensionless.
    pub kappa: f64,
    /// Tellegen parameter, dimensionless.
    pub chi: f64,
}

impl BiIsotropicMaterial {
    pub const fn vacuum() -> Self {
        Self { eps_r: 1.0, sigma: 0.0, mu_r: 1.0, kappa: 0.0, chi: 0.0 }
    }

    pub const fn dielectric(eps_r: f64, sigma: f64) -> Self {
        Self { eps_r, sigma, mu_r: 1.0, kappa: 0.0, chi: 0.0 }
    }

    pub const fn chiral(eps_r: f64, sigma: f64, kappa: f64) -> Self {
        Self { eps_r, sigma, mu_r: 1.0, kappa, chi: 0.0 }
    }

    pub fn is_achiral(&self) -> bool {
        self.kappa == 0.0 && self.chi == 0.0
    }

    pub fn is_lossless(&self) -> bool {
        self.sigma == 0.0
    }

    /// Complex absolute permittivity `eps0*eps_r - j*sigma/omega`, F/m.
    pub fn complex_eps(&self, frequency: f64) -> Complex64 {
        let omega = 2.0 * PI * frequency;
        Complex64::new(EPS0 * self.eps_r, -self.sigma / omega)
    }

    /// Absolute permeability `mu0*mu_r`, H/m (real; magnetic loss is out of scope).
    pub fn mu(&self) -> f64 {
        MU0 * self.mu_r
    }

    pub fn validate(&self) -> Result<(), MediaError> {
        let all = [self.eps_r, self.sigma, self.mu_r, self.kappa, self.chi];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(MediaError::InvalidMaterial(format!("non-finite parameter in {self:?}")));
        }
        if self.eps_r <= 0.0 {
            return Err(MediaError::InvalidMaterial(format!("eps_r = {} must be > 0", self.eps_r)));
        }
        if self.mu_r <= 0.0 {
            return Err(MediaError::InvalidMaterial(format!("mu_r = {} must be > 0", self.mu_r)));
        }
        if self.sigma < 0.0 {
            return Err(MediaError::InvalidMaterial(format!("sigma = {} must be >= 0", self.sigma)));
        }
        Ok(())
    }
}

/// Plane-wave constants of a bi-isotropic medium at a fixed frequency.
///
/// `k_plus`/`k_minus` are the wavenumbers of the two circular eigenwaves; the
/// "+" wave is the Beltrami field satisfying `curl E = +k E`. Positive `kappa`
/// rotates linear polarization by `alpha_tilde * d` over a thickness `d`
/// (counterclockwise viewed toward the source).
#[derive(Debug, Clone, Copy)]
pub struct WaveConstants {
    /// Rotation rate `omega*kappa*sqrt(eps0*mu0)`, rad/m.
    pub alpha_tilde: f64,
    /// Modified wavenumber `omega*sqrt(eps*mu - eps0*mu0*(chi^2+kappa^2))`, rad/m.
    pub k_tilde0: Complex64,
    /// `+alpha_tilde + sqrt(alpha_tilde^2 + k_tilde0^2)`, rad/m.
    pub k_plus: Complex64,
    /// `-alpha_tilde + sqrt(alpha_tilde^2 + k_tilde0^2)`, rad/m.
    pub k_minus: Complex64,
    /// Wave impedance `omega*mu/sqrt(alpha_tilde^2 + k_tilde0^2)`, Ohm.
    pub eta: Complex64,
    /// Magnetoelectric coupling `(chi - j*kappa)/c0`, s/m.
    pub xi: Complex64,
    /// Magnetoelectric coupling `(chi + j*kappa)/c0`, s/m.
    pub zeta: Complex64,
}

impl WaveConstants {
    /// Common attenuation constant of both eigenwaves, Np/m (>= 0 for passive
    /// media with real `kappa`).
    pub fn attenuation(&self) -> f64 {
        // Both k+ and k- share the imaginary part of sqrt(alpha^2 + k0~^2).
        -(self.k_plus.im + self.k_minus.im) / 2.0
    }
}

fn check_frequency(frequency: f64) -> Result<(), MediaError> {
    if !frequency.is_finite() || frequency <= 0.0 {
        return Err(MediaError::InvalidFrequency(frequency));
    }
    Ok(())
}

/// Square root with the branch `Im(w) <= 0` (decaying forward wave under the
/// `exp(+j*omega*t)` convention).
fn sqrt_decaying(z: Complex64) -> Complex64 {
    let w = z.sqrt();
    if w.im > 0.0 {
        -w
    } else {
        w
    }
}

/// Magnetoelectric coupling coefficients `(xi, zeta)` of a material.
///
/// Frequency-independent under this non-dispersive model; the frequency
/// argument is accepted for interface uniformity.
pub fn derive_coupling(
    m: &BiIsotropicMaterial,
    frequency: f64,
) -> Result<(Complex64, Complex64), MediaError> {
    m.validate()?;
    check_frequency(frequency)?;
    let root = (EPS0 * MU0).sqrt();
    let xi = Complex64::new(m.chi, -m.kappa) * root;
    let zeta = Complex64::new(m.chi, m.kappa) * root;
    Ok((xi, zeta))
}

/// All plane-wave constants of a material at `frequency`.
pub fn wave_constants(
    m: &BiIsotropicMaterial,
    frequency: f64,
) -> Result<WaveConstants, MediaError> {
    m.validate()?;
    check_frequency(frequency)?;
    let omega = 2.0 * PI * frequency;
    let (xi, zeta) = derive_coupling(m, frequency)?;

    let alpha_tilde = omega * m.kappa * (EPS0 * MU0).sqrt();
    let eps = m.complex_eps(frequency);
    let mu = m.mu();
    let coupling_sq = EPS0 * MU0 * (m.chi * m.chi + m.kappa * m.kappa);
    let k_tilde0 = sqrt_decaying((eps * mu - coupling_sq) * omega * omega);

    // gamma^2 = alpha~^2 + k0~^2 is the squared mean wavenumber of the two
    // eigenwaves; a non-positive real part has no propagating branch.
    let gamma_sq = k_tilde0 * k_tilde0 + alpha_tilde * alpha_tilde;
    if gamma_sq.norm() == 0.0 {
        return Err(MediaError::Degenerate(format!(
            "k_tilde0^2 + alpha_tilde^2 = 0 exactly for {m:?}: branch of sqrt undefined"
        )));
    }
    if gamma_sq.re <= 0.0 {
        return Err(MediaError::Degenerate(format!(
            "k_tilde0^2 + alpha_tilde^2 = {gamma_sq} has non-positive real part for {m:?}"
        )));
    }
    // For achiral media gamma is k_tilde0 itself; reuse it so the reduction
    // is exact rather than a sqrt(k^2) round trip.
    let gamma = if alpha_tilde == 0.0 { k_tilde0 } else { sqrt_decaying(gamma_sq) };
    let k_plus = gamma + alpha_tilde;
    let k_minus = gamma - alpha_tilde;
    let eta = Complex64::from(omega * mu) / gamma;

    Ok(WaveConstants { alpha_tilde, k_tilde0, k_plus, k_minus, eta, xi, zeta })
}

/// Free-space wavenumber `2*pi*f/c0`, rad/m.
pub fn free_space_wavenumber(frequency: f64) -> f64 {
    2.0 * PI * frequency / C0
}
