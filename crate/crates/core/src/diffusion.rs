//! Storage diffusion of the ground-state coherence and slow-light envelope
//! evolution under the complex diffusion coefficient `D + i V_g / (2 q1)`.
//!
//! Both evolutions are exact in time: every transverse mode is multiplied by
//! its closed-form propagator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField2D;
use crate::params::{BeamParams, MediumParams, SPEED_OF_LIGHT};
use crate::velocity::one_photon_k;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Ground-state coherence envelope `R21` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredCoherence {
    pub field: ComplexField2D,
    pub t: f64,
}

fn check_time(name: &'static str, t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {t}")))
    }
}

/// Evolves stored coherence in the dark for `dt`: each mode decays as
/// `exp(-D k^2 dt)`, the whole field as `exp(-(Gamma_21 + i omega_21) dt)`.
pub fn evolve_stored(state: &StoredCoherence, dt: f64, medium: &MediumParams) -> Result<StoredCoherence> {
    check_time("dt", dt)?;
    medium.validate()?;
    if medium.gamma == 0.0 {
        return Err(Error::invalid("gamma", "storage diffusion needs gamma > 0"));
    }
    let d = medium.diffusion();
    let global = (-(medium.gamma_21 + I * medium.omega_21) * dt).exp();
    let field = state
        .field
        .apply_spectral(|kx, ky| global * (-d * (kx * kx + ky * ky) * dt).exp());
    Ok(StoredCoherence { field, t: state.t + dt })
}

/// Slow-light propagation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowLightParams {
    /// Group velocity, m/s.
    pub v_g: f64,
    /// On-resonance decay rate.
    pub gamma_0: f64,
    /// Diffusion coefficient.
    pub d: f64,
    /// Probe wave number.
    pub q1: f64,
    /// Raman detuning.
    pub delta: f64,
}

impl SlowLightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_g > 0.0 && self.v_g <= SPEED_OF_LIGHT) {
            return Err(Error::invalid("v_g", format!("must lie in (0, c], got {}", self.v_g)));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::invalid("d", format!("must be >= 0, got {}", self.d)));
        }
        if !(self.q1.is_finite() && self.q1 > 0.0) {
            return Err(Error::invalid("q1", format!("must be > 0, got {}", self.q1)));
        }
        if !(self.gamma_0.is_finite() && self.delta.is_finite()) {
            return Err(Error::invalid("gamma_0", "rates must be finite"));
        }
        Ok(())
    }

    /// Complex diffusion coefficient `D + i V_g / (2 q1)`.
    pub fn complex_diffusion(&self) -> Complex64 {
        Complex64::new(self.d, self.v_g / (2.0 * self.q1))
    }
}

/// Group velocity and on-resonance decay for a plane-wave pump, with `K` taken real.
pub fn group_velocity(medium: &MediumParams, beams: &BeamParams) -> Result<SlowLightParams> {
    medium.validate()?;
    beams.validate()?;
    if medium.gamma == 0.0 {
        return Err(Error::invalid("gamma", "slow-light diffusion needs gamma > 0"));
    }
    let d = medium.diffusion();
    let k = one_photon_k(beams.delta_1, medium, beams.q1)?.re;
    let width = medium.gamma_21 + k * beams.pump_power() + d * beams.delta_q.norm_sqr();
    let c = SPEED_OF_LIGHT;
    let slowdown = medium.coupling * c * k * k * beams.pump_power() / (width * width);
    let v_g = c / (1.0 + slowdown);
    Ok(SlowLightParams { v_g, gamma_0: v_g * medium.coupling * k - width, d, q1: beams.q1, delta: beams.delta })
}

/// Travelling envelope after time `t` plus the carrier factor `exp((i Delta - Gamma_0) t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowLightOutput {
    pub field: ComplexField2D,
    pub carrier: Complex64,
}

pub fn evolve_slow_light(envelope: &ComplexField2D, t: f64, slp: &SlowLightParams) -> Result<SlowLightOutput> {
    check_time("t", t)?;
    slp.validate()?;
    let dc = slp.complex_diffusion();
    let field = envelope.apply_spectral(|kx, ky| (-dc * (kx * kx + ky * ky) * t).exp());
    let carrier = ((I * slp.delta - slp.gamma_0) * t).exp();
    Ok(SlowLightOutput { field, carrier })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn medium() -> MediumParams {
        MediumParams { v_th: 170.0, gamma: 1e7, gamma_d: 1e8, gamma_21: 0.0, omega_21: 0.0, coupling: 10.0 }
    }

    fn gaussian(sigma: f64) -> ComplexField2D {
        ComplexField2D::from_fn(64, 64, 5e-5, 5e-5, |x, y| {
            Complex64::new((-(x * x + y * y) / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn global_decay_and_rotation() {
        let m = MediumParams { gamma_21: 100.0, omega_21: 2.0e3, ..medium() };
        let f = ComplexField2D::from_fn(32, 32, 1e-4, 1e-4, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let s = StoredCoherence { field: f, t: 0.5 };
        let out = evolve_stored(&s, 1e-3, &m).unwrap();
        assert_eq!(out.t, 0.5 + 1e-3);
        let expect = (-(Complex64::new(100.0, 2.0e3)) * 1e-3).exp();
        assert!((out.field.get(3, 7) - expect).norm() < 1e-14);
    }

    #[test]
    fn semigroup_and_linearity() {
        let m = medium();
        let f = gaussian(3e-4);
        let g = f.apply_spectral(|kx, _| Complex64::new(0.0, kx * 1e-5).exp());
        let s = |field: &ComplexField2D, dt| {
            evolve_stored(&StoredCoherence { field: field.clone(), t: 0.0 }, dt, &m).unwrap().field
        };
        let two = s(&s(&f, 2e-4), 3e-4);
        let one = s(&f, 5e-4);
        for (a, b) in two.values().iter().zip(one.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let (ca, cb) = (Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5));
        let combo = ComplexField2D::new(64, 64, 5e-5, 5e-5, f.values().iter().zip(g.values()).map(|(x, y)| ca * x + cb * y).collect()).unwrap();
        let lhs = s(&combo, 4e-4);
        let (ef, eg) = (s(&f, 4e-4), s(&g, 4e-4));
        for i in 0..lhs.values().len() {
            let rhs = ca * ef.values()[i] + cb * eg.values()[i];
            assert!((lhs.values()[i] - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn group_velocity_limits() {
        let m = medium();
        let b = BeamParams {
            q1: 7.9e6,
            delta_q: crate::params::Vec3::ZERO,
            omega_2: Complex64::default(),
            delta_1: 0.0,
            delta: 0.0,
        };
        let m_decay = MediumParams { gamma_21: 10.0, ..m };
        let slp = group_velocity(&m_decay, &b).unwrap();
        assert_eq!(slp.v_g, SPEED_OF_LIGHT);
        assert_eq!(slp.d, m.diffusion());
        assert!(group_velocity(&MediumParams { gamma: 0.0, ..m }, &b).is_err());
    }

    #[test]
    fn slow_light_without_diffraction_is_storage() {
        let m = medium();
        let f = gaussian(2e-4);
        let slp = SlowLightParams { v_g: 1e-300, gamma_0: 0.0, d: m.diffusion(), q1: 1.0, delta: 0.0 };
        let a = evolve_slow_light(&f, 1e-3, &slp).unwrap();
        let b = evolve_stored(&StoredCoherence { field: f, t: 0.0 }, 1e-3, &m).unwrap();
        assert_eq!(a.carrier, Complex64::new(1.0, 0.0));
        for (x, y) in a.field.values().iter().zip(b.field.values()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_negative_time() {
        let m = medium();
        let s = StoredCoherence { field: gaussian(1e-4), t: 0.0 };
        assert!(evolve_stored(&s, -1.0, &m).is_err());
    }

    // second moment along x of the amplitude profile
    fn variance_x(f: &ComplexField2D) -> f64 {
        let (mut m0, mut m2) = (0.0, 0.0);
        for iy in 0..f.ny() {
            for ix in 0..f.nx() {
                let a = f.get(ix, iy).re;
                m0 += a;
                m2 += a * f.x(ix).powi(2);
            }
        }
        m2 / m0
    }

    #[test]
    fn gaussian_variance_grows_by_2dt() {
        let m = medium();
        let sigma0 = 3e-4;
        let f = ComplexField2D::from_fn(128, 128, 3e-5, 3e-5, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * sigma0 * sigma0)).exp(), 0.0)
        })
        .unwrap();
        let v0 = variance_x(&f);
        assert!((v0 / (sigma0 * sigma0) - 1.0).abs() < 1e-7, "{v0}");
        let dt = 1e-5;
        let out = evolve_stored(&StoredCoherence { field: f, t: 0.0 }, dt, &m).unwrap();
        let expect = sigma0 * sigma0 + 2.0 * m.diffusion() * dt;
        let v1 = variance_x(&out.field);
        assert!((v1 / expect - 1.0).abs() < 1e-5, "{v1} vs {expect}");
    }

    #[test]
    fn energy_decreases_and_odd_plane_stays_dark() {
        let m = medium();
        let s = 2e-4;
        let f = ComplexField2D::from_fn(64, 64, 5e-5, 5e-5, |x, y| {
            let g = |c: f64| (-((x - c).powi(2) + y * y) / (2.0 * s * s)).exp();
            Complex64::new(g(4e-4) - g(-4e-4), 0.0)
        })
        .unwrap();
        let mut state = StoredCoherence { field: f, t: 0.0 };
        let mut e = state.field.energy();
        for _ in 0..5 {
            state = evolve_stored(&state, 2e-6, &m).unwrap();
            let e1 = state.field.energy();
            assert!(e1 < e);
            e = e1;
            for iy in 0..64 {
                assert!(state.field.get(32, iy).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn quadrupled_pump_follows_closed_form() {
        let m = MediumParams { gamma_21: 1.0, ..medium() };
        let b = BeamParams {
            q1: 7.9e6,
            delta_q: crate::params::Vec3::ZERO,
            omega_2: Complex64::new(1e3, 0.0),
            delta_1: 0.0,
            delta: 0.0,
        };
        let k = one_photon_k(0.0, &m, b.q1).unwrap().re;
        let b4 = BeamParams { omega_2: b.omega_2 * 2.0, ..b };
        let excess = |slp: SlowLightParams| SPEED_OF_LIGHT / slp.v_g - 1.0;
        let (e1, e4) = (excess(group_velocity(&m, &b).unwrap()), excess(group_velocity(&m, &b4).unwrap()));
        let (g1, g4) = (m.gamma_21 + k * 1e6, m.gamma_21 + k * 4e6);
        let ratio = 4.0 * g1 * g1 / (g4 * g4);
        assert!((e4 / e1 / ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optically_thick_medium_has_positive_gamma_0() {
        // K ~ 1e-8 s, so coupling K V_g far exceeds Gamma_hom
        let m = MediumParams { gamma_21: 10.0, coupling: 1e12, ..medium() };
        let b = BeamParams {
            q1: 7.9e6,
            delta_q: crate::params::Vec3::ZERO,
            omega_2: Complex64::new(3e4, 0.0),
            delta_1: 0.0,
            delta: 0.0,
        };
        let slp = group_velocity(&m, &b).unwrap();
        assert!(slp.v_g < 1e-2 * SPEED_OF_LIGHT);
        assert!(slp.gamma_0 > 0.0, "{slp:?}");
    }

    #[test]
    fn diffraction_only_follows_rayleigh_law() {
        let w0 = 2e-4;
        let f = ComplexField2D::from_fn(128, 128, 2e-5, 2e-5, |x, y| {
            Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)
        })
        .unwrap();
        let q1 = 7.9e6;
        let slp = SlowLightParams { v_g: 100.0, gamma_0: 0.0, d: 0.0, q1, delta: 0.0 };
        let t = 1e-4;
        let out = evolve_slow_light(&f, t, &slp).unwrap();
        let z = slp.v_g * t;
        let zr = q1 * w0 * w0 / 2.0;
        let peak = out.field.get(64, 64).norm();
        let expect = 1.0 / (1.0 + (z / zr).powi(2)).sqrt();
        assert!((peak / expect - 1.0).abs() < 1e-9, "{peak} vs {expect}");
        assert!((out.field.energy() / f.energy() - 1.0).abs() < 1e-12);
    }
}
