//! Medium and beam parameter sets shared by every engine.
//!
//! All rates are angular rates in s^-1, lengths in m, velocities in m/s.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Cartesian 3-vector. `z` is the probe propagation axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vec3 {
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Atomic vapour and buffer-gas constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Thermal velocity (standard deviation of one Cartesian component).
    pub v_th: f64,
    /// Velocity relaxation rate.
    pub gamma: f64,
    /// Optical decoherence rate.
    pub gamma_d: f64,
    /// Ground-state decoherence rate.
    pub gamma_21: f64,
    /// Ground-state splitting, only used as a rotation of stored coherence.
    #[serde(default)]
    pub omega_21: f64,
    /// Susceptibility prefactor `g n0 / c`, 1/(m s).
    pub coupling: f64,
}

impl MediumParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma", self.gamma),
            ("gamma_d", self.gamma_d),
            ("gamma_21", self.gamma_21),
            ("coupling", self.coupling),
        ];
        for (field, v) in rates {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.omega_21.is_finite() {
            return Err(Error::invalid("omega_21", "must be finite"));
        }
        if !(self.v_th.is_finite() && self.v_th > 0.0) {
            return Err(Error::invalid("v_th", format!("must be > 0, got {}", self.v_th)));
        }
        Ok(())
    }

    /// Spatial diffusion coefficient `D = v_th^2 / gamma` (infinite when gamma = 0).
    pub fn diffusion(&self) -> f64 {
        self.v_th * self.v_th / self.gamma
    }
}

/// Probe and pump geometry and detunings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamParams {
    /// Probe wave number along z.
    pub q1: f64,
    /// Residual wave vector `q1 - q2`.
    #[serde(default)]
    pub delta_q: Vec3,
    /// Pump Rabi amplitude, serialized as `[re, im]`.
    pub omega_2: Complex64,
    /// One-photon detuning.
    #[serde(default)]
    pub delta_1: f64,
    /// Two-photon Raman detuning.
    #[serde(default)]
    pub delta: f64,
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.q1.is_finite() && self.q1 > 0.0) {
            return Err(Error::invalid("q1", format!("must be > 0, got {}", self.q1)));
        }
        if !self.delta_q.is_finite() {
            return Err(Error::invalid("delta_q", "must be finite"));
        }
        if !(self.omega_2.re.is_finite() && self.omega_2.im.is_finite()) {
            return Err(Error::invalid("omega_2", "must be finite"));
        }
        if !self.delta_1.is_finite() {
            return Err(Error::invalid("delta_1", "must be finite"));
        }
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        Ok(())
    }

    /// `|Omega_2|^2`.
    pub fn pump_power(&self) -> f64 {
        self.omega_2.norm_sqr()
    }

    pub fn with_delta(self, delta: f64) -> Self {
        BeamParams { delta, ..self }
    }
}
