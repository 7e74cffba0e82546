//! TOML run configuration. Every block rejects unknown keys; each command
//! checks that the blocks it needs are present.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dicke::WindowShape;
use crate::error::Error;
use crate::kinetic::McConfig;
use crate::params::{BeamParams, MediumParams, Vec3};
use crate::ramsey::RamseyParams;
use crate::susceptibility::FwhmGrid;

/// A configuration problem, reported with the dotted path of the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config: {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }

    /// Wraps a parameter-validation error from block `block`.
    pub fn from_validation(block: &str, err: Error) -> Self {
        match err {
            Error::InvalidParameter { field, reason } => ConfigError::new(format!("{block}.{field}"), reason),
            other => ConfigError::new(block, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Logarithmic spacing (both ends must be positive).
    #[serde(default)]
    pub log: bool,
}

impl AxisGrid {
    pub fn values(&self, path: &str) -> Result<Vec<f64>, ConfigError> {
        if self.points < 2 {
            return Err(ConfigError::new(format!("{path}.points"), "need at least 2 points"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(ConfigError::new(path, "bounds must be finite"));
        }
        if self.log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(ConfigError::new(path, "log grids need positive bounds"));
        }
        let m = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                let s = i as f64 / m;
                if self.log {
                    self.start * (self.stop / self.start).powf(s)
                } else {
                    self.start + (self.stop - self.start) * s
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    General,
    Dicke,
    #[serde(rename = "ramsey-1d")]
    Ramsey1d,
    #[serde(rename = "ramsey-2d")]
    Ramsey2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub engine: Engine,
    /// Raman-detuning grid.
    pub delta: AxisGrid,
    #[serde(default)]
    pub k_perp: Vec3,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseyConfig {
    /// Beam half-width or radius, m.
    pub a: f64,
    pub gamma: f64,
    pub k_pow: f64,
    pub d: f64,
    /// One-photon `K`, s.
    #[serde(default = "unit_k")]
    pub k: f64,
}

fn unit_k() -> f64 {
    1.0
}

impl RamseyConfig {
    pub fn params(&self) -> RamseyParams {
        RamseyParams { gamma: self.gamma, k_pow: self.k_pow, d: self.d }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FwhmScanConfig {
    pub gammas: Vec<f64>,
    /// Transverse wave-number grid, applied along x.
    pub k: AxisGrid,
    #[serde(default)]
    pub grid: FwhmGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default)]
    pub include_diffraction: bool,
    pub propagation_length: f64,
    #[serde(default)]
    pub window: WindowShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMode {
    Store,
    Slowlight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub mode: EvolveMode,
    pub t: f64,
}

/// Tolerances and sizes for the cross-oracle suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Relative tolerance of the general vs diffusion-limit susceptibility.
    pub dicke_tolerance: f64,
    pub dicke_draws: usize,
    /// Relative tolerance of the closed-form vs finite-difference beam correction.
    pub ramsey_tolerance: f64,
    /// Allowed Monte-Carlo deviation in standard errors.
    pub mc_sigmas: f64,
    pub mc_atoms: usize,
    pub mc_seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            dicke_tolerance: 0.05,
            dicke_draws: 10,
            ramsey_tolerance: 1e-4,
            mc_sigmas: 3.0,
            mc_atoms: 10_000,
            mc_seed: 20_240_917,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub medium: Option<MediumParams>,
    pub beams: Option<BeamParams>,
    pub spectrum: Option<SpectrumConfig>,
    pub ramsey: Option<RamseyConfig>,
    pub fwhm_scan: Option<FwhmScanConfig>,
    pub filter: Option<FilterConfig>,
    pub evolve: Option<EvolveConfig>,
    pub mc: Option<McConfig>,
    pub verify: Option<VerifyConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let path = match e.span() {
                Some(span) => format!("line {}", text[..span.start].lines().count().max(1)),
                None => String::new(),
            };
            ConfigError::new(path, message)
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn medium(&self) -> Result<MediumParams, ConfigError> {
        let m = self.medium.ok_or_else(|| ConfigError::new("medium", "missing block"))?;
        m.validate().map_err(|e| ConfigError::from_validation("medium", e))?;
        Ok(m)
    }

    pub fn beams(&self) -> Result<BeamParams, ConfigError> {
        let b = self.beams.ok_or_else(|| ConfigError::new("beams", "missing block"))?;
        b.validate().map_err(|e| ConfigError::from_validation("beams", e))?;
        Ok(b)
    }

    pub fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
        block.as_ref().ok_or_else(|| ConfigError::new(name, "missing block"))
    }
}
