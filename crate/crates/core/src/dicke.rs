//! Diffusion-limit (Dicke) susceptibility and the spatial-frequency filter.
//!
//! `K` is evaluated once at the one-photon detuning and kept complex, so the
//! window is `L = -K|Omega_2|^2 / (i(Delta + omega) - Gamma_21 - K|Omega_2|^2 - D|dq + k|^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField2D;
use crate::params::{BeamParams, MediumParams, Vec3};
use crate::velocity::one_photon_k;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Fraction of spectral energy beyond 90% of Nyquist that triggers an aliasing warning.
pub const ALIASING_ENERGY_FRACTION: f64 = 0.01;

fn diffusion(medium: &MediumParams) -> Result<f64> {
    if medium.gamma > 0.0 {
        Ok(medium.diffusion())
    } else {
        Err(Error::invalid("gamma", "the diffusion limit needs gamma > 0"))
    }
}

/// `K |Omega_2|^2`, complex.
pub fn power_term(medium: &MediumParams, beams: &BeamParams) -> Result<Complex64> {
    Ok(one_photon_k(beams.delta_1, medium, beams.q1)? * beams.pump_power())
}

/// Homogeneous EIT width `Gamma_21 + Re K |Omega_2|^2`.
pub fn gamma_hom(medium: &MediumParams, beams: &BeamParams) -> Result<f64> {
    Ok(medium.gamma_21 + power_term(medium, beams)?.re)
}

fn window(kw: Complex64, detuning: f64, gamma_21: f64, dk2: f64) -> Complex64 {
    -kw / (I * detuning - gamma_21 - kw - dk2)
}

/// Transparency window `L(k, omega)`.
pub fn window_l(k: Vec3, omega: f64, medium: &MediumParams, beams: &BeamParams) -> Result<Complex64> {
    let d = diffusion(medium)?;
    let kw = power_term(medium, beams)?;
    Ok(window(kw, beams.delta + omega, medium.gamma_21, d * (beams.delta_q + k).norm_sqr()))
}

/// Diffusion-limit susceptibility `i c K (1 - L)`.
pub fn chi31_dicke(k: Vec3, omega: f64, medium: &MediumParams, beams: &BeamParams) -> Result<Complex64> {
    let kk = one_photon_k(beams.delta_1, medium, beams.q1)?;
    let l = window_l(k, omega, medium, beams)?;
    Ok(I * medium.coupling * kk * (1.0 - l))
}

/// Transmission of a plane-wave probe tilted by `theta`: `Re L` with `|dq + k| = q theta`.
pub fn angular_transmission(theta: f64, q: f64, medium: &MediumParams, beams: &BeamParams) -> Result<f64> {
    let d = diffusion(medium)?;
    let kw = power_term(medium, beams)?;
    Ok((kw / (medium.gamma_21 + kw + d * (q * theta).powi(2))).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowShape {
    /// Full Lorentzian window.
    #[default]
    Exact,
    /// Expansion to first order in `i Delta - D k^2` around the plane-wave width.
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterParams {
    pub medium: MediumParams,
    pub beams: BeamParams,
    #[serde(default)]
    pub include_diffraction: bool,
    pub propagation_length: f64,
    #[serde(default)]
    pub window: WindowShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub field: ComplexField2D,
    pub warnings: Vec<String>,
}

/// Propagates a stationary probe image through `propagation_length` of medium.
///
/// Each transverse mode is multiplied by `exp(i p dz)` with
/// `p = -k^2/(2 q1) [diffraction] + chi_dicke(k, 0)`.
pub fn apply_filter(field: &ComplexField2D, params: &FilterParams) -> Result<FilterOutput> {
    let FilterParams { medium, beams, include_diffraction, propagation_length: dz, window: shape } = *params;
    medium.validate()?;
    beams.validate()?;
    if !(dz.is_finite() && dz >= 0.0) {
        return Err(Error::invalid("propagation_length", format!("must be >= 0, got {dz}")));
    }
    let d = diffusion(&medium)?;
    let kk = one_photon_k(beams.delta_1, &medium, beams.q1)?;
    let kw = kk * beams.pump_power();
    let c = medium.coupling;
    let dq = beams.delta_q;
    let gamma_p = medium.gamma_21 + kw + d * dq.norm_sqr();
    let l_of = |kx: f64, ky: f64| match shape {
        WindowShape::Exact => window(kw, beams.delta, medium.gamma_21, d * (dq + Vec3::new(kx, ky, 0.0)).norm_sqr()),
        WindowShape::Quadratic => {
            let l0 = kw / gamma_p;
            l0 * (1.0 + (I * beams.delta - d * (kx * kx + ky * ky)) / gamma_p)
        }
    };
    let out = field.apply_spectral(|kx, ky| {
        let k2 = kx * kx + ky * ky;
        let mut p = I * c * kk * (1.0 - l_of(kx, ky));
        if include_diffraction {
            p -= k2 / (2.0 * beams.q1);
        }
        (I * p * dz).exp()
    });

    let mut warnings = Vec::new();
    let (total, outer) = field.spectral_energy_outside(0.9);
    if total > 0.0 && outer > ALIASING_ENERGY_FRACTION * total {
        warnings.push(format!(
            "aliasing risk: {:.2}% of spectral energy lies in the outer 10% of k-space",
            100.0 * outer / total
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(FilterOutput { field: out, warnings })
}
