//! General probe susceptibility, transmission scans and EIT linewidths.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{BeamParams, MediumParams, Vec3};
use crate::special::brownian_h;
use crate::velocity::{g_set, one_photon_k};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `a^2` of the Brownian-motion width interpolation.
pub const A_SQUARED: f64 = 2.0 / std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    UnitPeak,
}

/// Sampled response on a strictly increasing axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub axis: Vec<f64>,
    pub values: Vec<Complex64>,
    pub normalization: Normalization,
}

impl Spectrum {
    pub fn new(axis: Vec<f64>, values: Vec<Complex64>, normalization: Normalization) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::invalid("values", "length differs from axis"));
        }
        if axis.len() < 3 {
            return Err(Error::invalid("axis", "needs at least 3 samples"));
        }
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("axis", "must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("values", "must be finite"));
        }
        Ok(Spectrum { axis, values, normalization })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FwhmMethod {
    InterpolatedHalfCrossings,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwhmResult {
    pub width: f64,
    pub peak_height: f64,
    pub peak_position: f64,
    pub method: FwhmMethod,
}

/// `chi_31` from the velocity integrals, in the cancellation-free form
/// `i c [i G1 (1 - i gamma G2) - gamma |Omega_2|^2 G^2] / G_d`.
pub fn chi_from_gset(g: Complex64, g1: Complex64, g2: Complex64, medium: &MediumParams, pump: f64) -> Complex64 {
    let gamma = medium.gamma;
    let one_2 = 1.0 - I * gamma * g2;
    let gd = (1.0 - I * gamma * g1) * one_2 + gamma * gamma * pump * g * g;
    I * medium.coupling * (I * g1 * one_2 - gamma * pump * g * g) / gd
}

/// General probe susceptibility at transverse wave vector `k_perp`, frequency `omega`.
pub fn chi31_general(k_perp: Vec3, omega: f64, medium: &MediumParams, beams: &BeamParams) -> Result<Complex64> {
    let set = g_set(k_perp, omega, medium, beams)?;
    Ok(chi_from_gset(set.g, set.g1, set.g2, medium, beams.pump_power()))
}

/// `chi_31(Delta)` on a Raman-detuning grid, one-photon detuning held fixed.
pub fn chi_scan(delta_grid: &[f64], k_perp: Vec3, medium: &MediumParams, beams: &BeamParams) -> Result<Vec<Complex64>> {
    delta_grid
        .par_iter()
        .map(|&d| chi31_general(k_perp, 0.0, medium, &beams.with_delta(d)))
        .collect()
}

/// Normalised transmission from absorption: base minus `Im chi`, scaled to a unit peak.
///
/// The base is the mean of the two endpoint values. A spectrum with no dip
/// (relative depth below 1e-12) maps to zeros.
pub fn transmission_from_chi(axis: &[f64], chi: &[Complex64]) -> Result<Spectrum> {
    let n = chi.len();
    if n < 3 {
        return Err(Error::invalid("delta_grid", "needs at least 3 points"));
    }
    let base = 0.5 * (chi[0].im + chi[n - 1].im);
    let (imin, min) = chi
        .iter()
        .map(|c| c.im)
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let depth = base - min;
    let scale = chi.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let values = if depth <= 1e-12 * scale || depth == 0.0 {
        vec![Complex64::default(); n]
    } else {
        if imin == 0 || imin == n - 1 {
            return Err(Error::GridTooNarrow);
        }
        chi.iter().map(|c| Complex64::new((base - c.im) / depth, 0.0)).collect()
    };
    Spectrum::new(axis.to_vec(), values, Normalization::UnitPeak)
}

/// Normalised EIT transmission spectrum on `delta_grid`.
pub fn transmission_scan(delta_grid: &[f64], k_perp: Vec3, medium: &MediumParams, beams: &BeamParams) -> Result<Spectrum> {
    let chi = chi_scan(delta_grid, k_perp, medium, beams)?;
    transmission_from_chi(delta_grid, &chi)
}

/// Full width at half maximum by linear interpolation of the two crossings
/// of half the global peak value (real part).
pub fn fwhm(spectrum: &Spectrum) -> Result<FwhmResult> {
    let y: Vec<f64> = spectrum.values.iter().map(|v| v.re).collect();
    let x = &spectrum.axis;
    let (ipk, peak) = y
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if !(peak > 0.0) {
        return Err(Error::NoCrossing("both"));
    }
    let half = 0.5 * peak;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (1..=ipk).rev().find(|&i| y[i - 1] < half).map(|i| cross(i - 1, i));
    let right = (ipk..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| cross(i, i + 1));
    match (left, right) {
        (Some(l), Some(r)) => Ok(FwhmResult {
            width: r - l,
            peak_height: peak,
            peak_position: x[ipk],
            method: FwhmMethod::InterpolatedHalfCrossings,
        }),
        (None, _) => Err(Error::NoCrossing("low")),
        (_, None) => Err(Error::NoCrossing("high")),
    }
}

/// Motional EIT width `2 (2/a^2) gamma H(a v_th k / gamma)` with `a^2 = 2/ln 2`.
pub fn fwhm_analytic(k: f64, medium: &MediumParams) -> f64 {
    let a = A_SQUARED.sqrt();
    let doppler = medium.v_th * k.abs();
    if medium.gamma == 0.0 {
        return 4.0 / a * doppler;
    }
    let x = a * doppler / medium.gamma;
    4.0 / A_SQUARED * medium.gamma * brownian_h(Complex64::new(x, 0.0)).re
}

/// Homogeneous width floor `2 (Gamma_21 + Re K |Omega_2|^2)` of the measured FWHM.
pub fn fwhm_floor(medium: &MediumParams, beams: &BeamParams) -> Result<f64> {
    let k = one_photon_k(beams.delta_1, medium, beams.q1)?;
    Ok(2.0 * (medium.gamma_21 + k.re * beams.pump_power()))
}

/// Detuning grid of `n` points on `[-half_span, half_span]`, clustered at the
/// centre by `x = half_span sinh(c s) / sinh(c)`.
pub fn stretched_grid(half_span: f64, n: usize, stretch: f64) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let s = 2.0 * i as f64 / m - 1.0;
            if stretch == 0.0 { half_span * s } else { half_span * (stretch * s).sinh() / stretch.sinh() }
        })
        .collect()
}

/// Grid controls for [`measured_fwhm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FwhmGrid {
    /// Number of detuning samples (odd keeps `Delta = 0` on the grid).
    pub points: usize,
    /// Half-span in units of the expected width.
    pub span_widths: f64,
    /// sinh clustering strength.
    pub stretch: f64,
}

impl Default for FwhmGrid {
    fn default() -> Self {
        FwhmGrid { points: 401, span_widths: 40.0, stretch: 5.0 }
    }
}

/// Measured EIT FWHM at transverse wave vector `k_perp`, on a grid scaled to
/// the expected width (floor plus motional estimate).
pub fn measured_fwhm(k_perp: Vec3, medium: &MediumParams, beams: &BeamParams, grid: FwhmGrid) -> Result<FwhmResult> {
    let expected = fwhm_floor(medium, beams)? + fwhm_analytic((beams.delta_q + k_perp).norm(), medium);
    let axis: Vec<f64> = stretched_grid(grid.span_widths * expected, grid.points, grid.stretch)
        .into_iter()
        .map(|d| d + beams.delta)
        .collect();
    fwhm(&transmission_scan(&axis, k_perp, medium, beams)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz(x: f64, hw: f64) -> f64 {
        hw * hw / (x * x + hw * hw)
    }

    #[test]
    fn fwhm_of_lorentzian_and_gaussian() {
        let axis = stretched_grid(200.0, 4001, 0.0);
        let l: Vec<_> = axis.iter().map(|&x| Complex64::new(lorentz(x, 3.0), 0.0)).collect();
        let s = Spectrum::new(axis.clone(), l, Normalization::UnitPeak).unwrap();
        assert!((fwhm(&s).unwrap().width - 6.0).abs() / 6.0 < 1e-3);
        let sigma = 4.0;
        let g: Vec<_> = axis.iter().map(|&x| Complex64::new((-x * x / (2.0 * sigma * sigma)).exp(), 0.0)).collect();
        let s = Spectrum::new(axis, g, Normalization::UnitPeak).unwrap();
        let expect = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * sigma;
        assert!((fwhm(&s).unwrap().width - expect).abs() / expect < 1e-3);
    }

    #[test]
    fn fwhm_reports_missing_crossing() {
        let axis = vec![-1.0, 0.0, 1.0, 2.0];
        let v = vec![0.9, 1.0, 0.8, 0.2].into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        let s = Spectrum::new(axis, v, Normalization::UnitPeak).unwrap();
        assert!(matches!(fwhm(&s), Err(Error::NoCrossing("low"))));
    }

    fn medium(gamma: f64) -> MediumParams {
        MediumParams { v_th: 170.0, gamma, gamma_d: 1e8, gamma_21: 1e3, omega_21: 0.0, coupling: 1.0 }
    }

    #[test]
    fn analytic_width_limits() {
        let m = medium(1.6e5);
        let k = 1e-3 * m.gamma / m.v_th;
        let small = fwhm_analytic(k, &m);
        let dicke = 2.0 * m.diffusion() * k * k;
        assert!((small - dicke).abs() / dicke < 1e-3);
        let a = A_SQUARED.sqrt();
        let k = 1e3 * m.gamma / (a * m.v_th);
        let large = fwhm_analytic(k, &m);
        let doppler = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * m.v_th * k;
        assert!((large - doppler).abs() / doppler < 5e-3);
        let k = m.gamma / (a * m.v_th);
        let mid = fwhm_analytic(k, &m);
        assert!((mid - 4.0 / A_SQUARED * m.gamma * (-1f64).exp()).abs() / mid < 1e-14);
    }

    #[test]
    fn zero_gamma_chi_is_doppler() {
        let m = MediumParams { gamma: 0.0, ..medium(0.0) };
        let g1 = Complex64::new(0.3, -0.7);
        let chi = chi_from_gset(Complex64::new(0.1, 0.2), g1, Complex64::new(1.0, 1.0), &m, 0.0);
        assert!((chi + g1).norm() < 1e-15);
    }

    #[test]
    fn flat_spectrum_maps_to_zero() {
        let axis = vec![-1.0, 0.0, 1.0];
        let chi = vec![Complex64::new(0.0, 2.0); 3];
        let t = transmission_from_chi(&axis, &chi).unwrap();
        assert!(t.values.iter().all(|v| *v == Complex64::default()));
        let chi = vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(0.0, 3.0)];
        assert!(matches!(transmission_from_chi(&axis, &chi), Err(Error::GridTooNarrow)));
    }

    #[test]
    fn stretched_grid_is_symmetric_and_increasing() {
        let g = stretched_grid(10.0, 11, 5.0);
        assert_eq!(g[5], 0.0);
        assert!((g[0] + 10.0).abs() < 1e-12 && (g[10] - 10.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        for i in 0..11 {
            assert!((g[i] + g[10 - i]).abs() < 1e-12);
        }
    }
}
