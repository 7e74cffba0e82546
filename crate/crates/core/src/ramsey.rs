//! Steady-state spectra of finite stepwise beams (a sheet of half-width `a`
//! or a cylinder of radius `a`): time-of-flight broadening and Ramsey
//! narrowing from atoms that diffuse out of the beam and return.
//!
//! The correction `S_D` enters the absorbed power as
//! `P/P0 = Re{K - K K_pow / (Gamma + K_pow - i Delta) (1 - S_D)}`.
//! [`fd_oracle`] recomputes `S_D` by solving the boundary-value problem on a
//! mapped mesh, independently of the closed forms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bessel_i_scaled, bessel_k_scaled, BesselOrder};
use crate::susceptibility::{Normalization, Spectrum};


/// Beyond this `|k a|` the Bessel ratios use their large-argument expansions.
const BESSEL_RATIO_RADIUS: f64 = 1e3;
/// Cells per region (inside the beam, outside the beam) on the coarse oracle mesh.
pub const FD_CELLS: usize = 4096;
/// Far boundary at `a + FD_FAR_DECAY_LENGTHS / Re k2`.
pub const FD_FAR_DECAY_LENGTHS: f64 = 20.0;
/// Largest accepted gap between the fine-mesh and extrapolated oracle values.
pub const FD_RICHARDSON_LIMIT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamShape {
    Sheet1d,
    Cylinder2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseyGeometry {
    /// Half-width (sheet) or radius (cylinder), m.
    pub a: f64,
    pub dim: BeamShape,
}

impl RamseyGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.a.is_finite() && self.a > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("a", format!("must be > 0, got {}", self.a)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseyParams {
    /// Non-power-broadened width `Gamma_21 + D dq^2`.
    pub gamma: f64,
    /// Power term `K |Omega_2|^2`.
    pub k_pow: f64,
    /// Diffusion coefficient, m^2/s.
    pub d: f64,
}

impl RamseyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if !(self.k_pow.is_finite() && self.k_pow >= 0.0) {
            return Err(Error::invalid("k_pow", format!("must be >= 0, got {}", self.k_pow)));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::invalid("d", format!("must be > 0, got {}", self.d)));
        }
        Ok(())
    }
}

fn sqrt_right(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.re < 0.0 {
        -s
    } else {
        s
    }
}

/// Inside and outside decay constants, both with `Re k >= 0`.
pub fn k1_k2(delta: f64, p: &RamseyParams) -> (Complex64, Complex64) {
    let k1 = sqrt_right(Complex64::new(p.gamma + p.k_pow, -delta) / p.d);
    let k2 = sqrt_right(Complex64::new(p.gamma, -delta) / p.d);
    (k1, k2)
}

/// `tanh z` for `Re z >= 0` without overflow.
fn tanh_right(z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        z.tanh()
    } else {
        let e = (-2.0 * z).exp();
        (1.0 - e) / (1.0 + e)
    }
}

fn i0_over_i1(z: Complex64) -> Result<Complex64> {
    if z.norm() > BESSEL_RATIO_RADIUS {
        let r = 1.0 / z;
        return Ok(1.0 + r * (0.5 + r * (0.375 + r * 0.375)));
    }
    Ok(bessel_i_scaled(BesselOrder::Zero, z)? / bessel_i_scaled(BesselOrder::One, z)?)
}

fn k0_over_k1(z: Complex64) -> Result<Complex64> {
    if z.norm() > BESSEL_RATIO_RADIUS {
        let r = 1.0 / z;
        return Ok(1.0 + r * (-0.5 + r * (0.375 - r * 0.375)));
    }
    Ok(bessel_k_scaled(BesselOrder::Zero, z)? / bessel_k_scaled(BesselOrder::One, z)?)
}

/// Finite-beam correction `S_D(Delta)`.
pub fn s_correction(delta: f64, geom: &RamseyGeometry, p: &RamseyParams) -> Result<Complex64> {
    geom.validate()?;
    p.validate()?;
    let (k1, k2) = k1_k2(delta, p);
    if k2.norm() == 0.0 {
        // no decay outside the beam: the outer region absorbs all coherence
        return Ok(Complex64::default());
    }
    let z1 = k1 * geom.a;
    match geom.dim {
        BeamShape::Sheet1d => {
            let t = tanh_right(z1);
            let ratio = if z1.norm() < 1e-8 { 1.0 - z1 * z1 / 3.0 } else { t / z1 };
            Ok(ratio / (1.0 + k1 / k2 * t))
        }
        BeamShape::Cylinder2d => {
            if z1.norm() < 1e-8 {
                return Ok(Complex64::new(1.0, 0.0));
            }
            let bracket = i0_over_i1(z1)? + k1 / k2 * k0_over_k1(k2 * geom.a)?;
            Ok(2.0 / (z1 * bracket))
        }
    }
}

/// Complex absorption bracket `K - K K_pow/(Gamma + K_pow - i Delta) (1 - S_D)`.
fn absorption(delta: f64, s_d: Complex64, p: &RamseyParams, k: f64) -> Complex64 {
    k - k * p.k_pow / Complex64::new(p.gamma + p.k_pow, -delta) * (1.0 - s_d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseySpectrum {
    /// Absorption bracket; the real part is `P/P0`, the imaginary part the dispersive response.
    pub power: Spectrum,
    /// Transmission `K - P/P0` scaled to unit peak.
    pub transmission: Spectrum,
    pub s_d: Vec<Complex64>,
}

fn spectra(delta_grid: &[f64], s_d: Vec<Complex64>, p: &RamseyParams, k: f64) -> Result<RamseySpectrum> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid("k", format!("must be > 0, got {k}")));
    }
    let power: Vec<Complex64> = delta_grid
        .iter()
        .zip(&s_d)
        .map(|(&d, &s)| absorption(d, s, p, k))
        .collect();
    let dip: Vec<f64> = power.iter().map(|v| k - v.re).collect();
    let peak = dip.iter().copied().fold(0.0, f64::max);
    let transmission = if peak > 0.0 {
        dip.iter().map(|&t| Complex64::new(t / peak, 0.0)).collect()
    } else {
        vec![Complex64::default(); dip.len()]
    };
    Ok(RamseySpectrum {
        power: Spectrum::new(delta_grid.to_vec(), power, Normalization::Raw)?,
        transmission: Spectrum::new(delta_grid.to_vec(), transmission, Normalization::UnitPeak)?,
        s_d,
    })
}

/// Absorbed power and unit-peak transmission on `delta_grid`; `k` is the one-photon `K` in seconds.
pub fn power_spectrum(delta_grid: &[f64], geom: &RamseyGeometry, p: &RamseyParams, k: f64) -> Result<RamseySpectrum> {
    let s_d = delta_grid.iter().map(|&d| s_correction(d, geom, p)).collect::<Result<Vec<_>>>()?;
    spectra(delta_grid, s_d, p, k)
}

/// Infinite-beam spectrum (`S_D = 0`): a power-broadened Lorentzian.
pub fn plane_wave_spectrum(delta_grid: &[f64], p: &RamseyParams, k: f64) -> Result<RamseySpectrum> {
    p.validate()?;
    spectra(delta_grid, vec![Complex64::default(); delta_grid.len()], p, k)
}

/// Coherence `R21(x)` across a sheet beam for source strength `drive` (`n0 K Omega_2^* Omega_1`).
pub fn coherence_profile_1d(
    x_grid: &[f64],
    delta: f64,
    geom: &RamseyGeometry,
    p: &RamseyParams,
    drive: Complex64,
) -> Result<Vec<Complex64>> {
    geom.validate()?;
    p.validate()?;
    if geom.dim != BeamShape::Sheet1d {
        return Err(Error::invalid("dim", "the coherence profile is defined for the sheet beam"));
    }
    let (k1, k2) = k1_k2(delta, p);
    if k2.norm() == 0.0 {
        return Err(Error::invalid("gamma", "profile needs gamma > 0 or delta != 0"));
    }
    let a = geom.a;
    let bulk = drive / (k1 * k1 * p.d);
    let denom = 1.0 + k1 / k2 * tanh_right(k1 * a);
    let b = bulk * (1.0 / denom - 1.0);
    Ok(x_grid
        .iter()
        .map(|&x| {
            let ax = x.abs();
            if ax <= a {
                // cosh(k1 x)/cosh(k1 a) in overflow-free form
                let ratio = (k1 * (ax - a)).exp() * (1.0 + (-2.0 * k1 * ax).exp()) / (1.0 + (-2.0 * k1 * a).exp());
                bulk * ratio / denom - bulk
            } else {
                b * (-k2 * (ax - a)).exp()
            }
        })
        .collect())
}

/// Solves `k^2(x) v - L v = k1^2 w(x)` (with `L` the sheet or radial Laplacian)
/// on `[0, a + 20/Re k2]` by second-order finite volumes, returning `S_D = 1 - <v>_beam`
/// Richardson-extrapolated from `FD_CELLS` and `2 FD_CELLS` cells per region.
pub fn fd_oracle(delta: f64, geom: &RamseyGeometry, p: &RamseyParams) -> Result<Complex64> {
    geom.validate()?;
    p.validate()?;
    let (k1, k2) = k1_k2(delta, p);
    if k2.re <= 0.0 {
        return Err(Error::invalid("gamma", "the oracle needs a decaying outer solution"));
    }
    let coarse = fd_solve(geom, k1, k2, FD_CELLS);
    let fine = fd_solve(geom, k1, k2, 2 * FD_CELLS);
    let extrapolated = fine + (fine - coarse) / 3.0;
    let gap = (extrapolated - fine).norm() / extrapolated.norm().max(1e-300);
    if gap > FD_RICHARDSON_LIMIT {
        return Err(Error::Resolution { estimate: gap, limit: FD_RICHARDSON_LIMIT });
    }
    Ok(extrapolated)
}

/// Mesh: uniform on `[0, a]`, then `x = a + (a/beta)(e^{beta s} - 1)` for `s` in `[0, 1]`,
/// with `beta` chosen to reach the far boundary and match spacing at `a`.
fn fd_mesh(a: f64, far: f64, n: usize) -> Vec<f64> {
    let target = (far - a) / a;
    // (e^beta - 1)/beta = target, solved by Newton in log form
    let mut beta = target.ln().max(1.0) + 1.0;
    for _ in 0..60 {
        let f = (beta.exp_m1() / beta).ln() - target.ln();
        let df = beta.exp() / beta.exp_m1() - 1.0 / beta;
        let step = f / df;
        beta -= step;
        if step.abs() < 1e-15 * beta {
            break;
        }
    }
    let mut x: Vec<f64> = (0..=n).map(|i| a * i as f64 / n as f64).collect();
    x.extend((1..=n).map(|i| a + a / beta * (beta * i as f64 / n as f64).exp_m1()));
    x
}

fn fd_solve(geom: &RamseyGeometry, k1: Complex64, k2: Complex64, n: usize) -> Complex64 {
    let a = geom.a;
    let x = fd_mesh(a, a + FD_FAR_DECAY_LENGTHS / k2.re, n);
    let m = x.len() - 1;
    // measure of [l, r] under the geometric weight
    let measure = |l: f64, r: f64| match geom.dim {
        BeamShape::Sheet1d => r - l,
        BeamShape::Cylinder2d => 0.5 * (r * r - l * l),
    };
    let face_weight = |f: f64| match geom.dim {
        BeamShape::Sheet1d => 1.0,
        BeamShape::Cylinder2d => f,
    };
    let (k1s, k2s) = (k1 * k1, k2 * k2);

    // unknowns v_0..v_{m-1}; v_m = 0
    let mut lower = vec![Complex64::default(); m];
    let mut diag = vec![Complex64::default(); m];
    let mut upper = vec![Complex64::default(); m];
    let mut rhs = vec![Complex64::default(); m];
    let mut inside_measure = vec![0.0; m];
    for i in 0..m {
        let left = if i == 0 { 0.0 } else { 0.5 * (x[i - 1] + x[i]) };
        let right = 0.5 * (x[i] + x[i + 1]);
        let inner = measure(left.min(a), right.min(a));
        let outer = measure(left.max(a), right.max(a));
        inside_measure[i] = inner;
        let cr = face_weight(right) / (x[i + 1] - x[i]);
        let mut d = k1s * inner + k2s * outer + cr;
        upper[i] = Complex64::new(-cr, 0.0);
        if i > 0 {
            let cl = face_weight(left) / (x[i] - x[i - 1]);
            d += cl;
            lower[i] = Complex64::new(-cl, 0.0);
        }
        diag[i] = d;
        rhs[i] = k1s * inner;
    }
    let v = thomas(&lower, &diag, &upper, &rhs);
    let beam = measure(0.0, a);
    let mean: Complex64 = v.iter().zip(&inside_measure).map(|(v, w)| v * w).sum::<Complex64>() / beam;
    1.0 - mean
}

/// Tridiagonal solve; `lower[0]` and `upper[n-1]` are ignored.
fn thomas(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![Complex64::default(); n];
    let mut d = vec![Complex64::default(); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / den;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    d
}
