//! Cross-oracle suites run by `verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::VerifyConfig;
use crate::dicke::{chi31_dicke, gamma_hom};
use crate::kinetic::{averaging_window, ks_normal, simulate_chi, McConfig};
use crate::params::{BeamParams, MediumParams, Vec3};
use crate::ramsey::{fd_oracle, s_correction, BeamShape, RamseyGeometry, RamseyParams};
use crate::susceptibility::chi31_general;
use crate::Result;

pub const SUITES: [&str; 3] = ["general-dicke", "ramsey-fd", "mc-general"];

/// Minimum ratio `gamma / (v_th |dq + k|)` of the diffusion-limit draws.
pub const DICKE_MIN_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    /// Worst error in the suite's own unit (relative error or standard errors).
    pub measured: f64,
    pub tolerance: f64,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// A random diffusion-limit operating point with `gamma` between 100 and 1000
/// times `v_th |k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeDraw {
    pub medium: MediumParams,
    pub beams: BeamParams,
    pub k: Vec3,
    /// `Gamma_hom + D k^2`.
    pub linewidth: f64,
}

pub fn dicke_draw(rng: &mut impl Rng) -> Result<DickeDraw> {
    let v_th = rng.random_range(100.0..300.0);
    let kappa = 10f64.powf(rng.random_range(1.0..3.5));
    let gamma = v_th * kappa * DICKE_MIN_RATIO * 10f64.powf(rng.random_range(0.0..1.0));
    let gamma_d = 10f64.powf(rng.random_range(7.5..9.0));
    let medium = MediumParams {
        v_th,
        gamma,
        gamma_d,
        gamma_21: 10f64.powf(rng.random_range(1.0..3.0)),
        omega_21: 0.0,
        coupling: 1.0,
    };
    let pump = 10f64.powf(rng.random_range(0.5..2.5)) * gamma_d;
    let beams = BeamParams {
        q1: 7.903e6,
        delta_q: Vec3::ZERO,
        omega_2: Complex64::new(pump.sqrt(), 0.0),
        delta_1: 0.0,
        delta: 0.0,
    };
    let linewidth = gamma_hom(&medium, &beams)? + medium.diffusion() * kappa * kappa;
    Ok(DickeDraw { medium, beams, k: Vec3::new(kappa, 0.0, 0.0), linewidth })
}

/// Worst relative deviation of the general susceptibility from the diffusion
/// limit over `points` detunings spanning five linewidths on either side.
/// Returns `(relative to chi, relative to the pump-induced part of chi)`.
pub fn dicke_deviation(d: &DickeDraw, points: usize) -> Result<(f64, f64)> {
    let mut worst = (0.0f64, 0.0f64);
    for j in 0..points {
        let delta = d.linewidth * (-5.0 + 10.0 * j as f64 / (points - 1) as f64);
        let b = d.beams.with_delta(delta);
        let g = chi31_general(d.k, 0.0, &d.medium, &b)?;
        let dk = chi31_dicke(d.k, 0.0, &d.medium, &b)?;
        let bare = chi31_dicke(d.k, 0.0, &d.medium, &BeamParams { omega_2: Complex64::default(), ..b })?;
        worst.0 = worst.0.max((g - dk).norm() / dk.norm());
        worst.1 = worst.1.max((g - dk).norm() / (dk - bare).norm());
    }
    Ok(worst)
}

/// Beam-correction parameters of the narrowing example: `Gamma = 100`,
/// `K|Omega_2|^2 = 2e3`, `D = 1e-3`, `a = 1e-4`.
pub fn ramsey_example() -> (RamseyParams, f64) {
    (RamseyParams { gamma: 100.0, k_pow: 2e3, d: 1e-3 }, 1e-4)
}

/// Worst relative error of the closed-form `S_D` against the finite-difference solve.
pub fn ramsey_deviation(dim: BeamShape, deltas: &[f64]) -> Result<f64> {
    let (p, a) = ramsey_example();
    let geom = RamseyGeometry { a, dim };
    let mut worst = 0.0f64;
    for &d in deltas {
        let s = s_correction(d, &geom, &p)?;
        let f = fd_oracle(d, &geom, &p)?;
        worst = worst.max((s - f).norm() / f.norm());
    }
    Ok(worst)
}

/// Compressed Doppler-Dicke operating point (`eta = 1.6` at `|k| = 1`).
pub fn mc_example() -> (MediumParams, BeamParams, Vec3) {
    let medium = MediumParams { v_th: 1.0, gamma: 0.625, gamma_d: 2500.0, gamma_21: 0.025, omega_21: 0.0, coupling: 1.0 };
    let beams = BeamParams {
        q1: 5270.0,
        delta_q: Vec3::ZERO,
        omega_2: Complex64::new(2.5f64.sqrt(), 0.0),
        delta_1: 0.0,
        delta: 0.0,
    };
    (medium, beams, Vec3::new(1.0, 0.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub delta: f64,
    pub chi: Complex64,
    pub reference: Complex64,
    /// Deviations of the real and imaginary parts in jackknife standard errors.
    pub sigmas: (f64, f64),
    pub ks_statistic: f64,
    pub ks_critical: f64,
}

/// Simulates the example at `delta` for six averaging windows.
pub fn mc_point(delta: f64, n_atoms: usize, seed: u64) -> Result<McPoint> {
    let (m, b0, k) = mc_example();
    let b = b0.with_delta(delta);
    let w = averaging_window(&m, &b)?;
    let r = simulate_chi(k, 0.0, &m, &b, &McConfig { n_atoms, t_total: 6.0 * w, seed, control_variate: true })?;
    let e = chi31_general(k, 0.0, &m, &b)?;
    let vx: Vec<f64> = r.final_states.iter().map(|s| s.v.x).collect();
    let ks = ks_normal(&vx, m.v_th);
    Ok(McPoint {
        delta,
        chi: r.chi,
        reference: e,
        sigmas: ((r.chi.re - e.re) / r.stderr_re, (r.chi.im - e.im) / r.stderr_im),
        ks_statistic: ks.statistic,
        ks_critical: ks.critical_1pct,
    })
}

fn general_dicke(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.mc_seed);
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for i in 0..cfg.dicke_draws {
        let d = dicke_draw(&mut rng)?;
        let (rel, rel_eit) = dicke_deviation(&d, 11)?;
        worst = worst.max(rel);
        details.push(format!(
            "draw {i}: gamma={:.3e} k={:.3e} relative={rel:.3e} relative_to_pump_part={rel_eit:.3e}",
            d.medium.gamma, d.k.x
        ));
    }
    Ok(SuiteReport {
        name: SUITES[0].into(),
        passed: worst <= cfg.dicke_tolerance,
        measured: worst,
        tolerance: cfg.dicke_tolerance,
        details,
    })
}

fn ramsey_fd(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let deltas: Vec<f64> = (0..21).map(|i| -1e4 + 1e3 * i as f64).collect();
    let sheet = ramsey_deviation(BeamShape::Sheet1d, &deltas)?;
    let cyl = ramsey_deviation(BeamShape::Cylinder2d, &deltas)?;
    let worst = sheet.max(cyl);
    Ok(SuiteReport {
        name: SUITES[1].into(),
        passed: worst <= cfg.ramsey_tolerance,
        measured: worst,
        tolerance: cfg.ramsey_tolerance,
        details: vec![format!("sheet relative={sheet:.3e}"), format!("cylinder relative={cyl:.3e}")],
    })
}

fn mc_general(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut worst = 0.0f64;
    let mut ks_ok = true;
    let mut details = Vec::new();
    for delta in [-1.0, 0.0, 1.0] {
        let p = mc_point(delta, cfg.mc_atoms, cfg.mc_seed)?;
        worst = worst.max(p.sigmas.0.abs()).max(p.sigmas.1.abs());
        ks_ok &= p.ks_statistic <= p.ks_critical;
        details.push(format!(
            "delta={delta}: re {:+.2} sigma, im {:+.2} sigma, ks {:.4}/{:.4}",
            p.sigmas.0, p.sigmas.1, p.ks_statistic, p.ks_critical
        ));
    }
    Ok(SuiteReport {
        name: SUITES[2].into(),
        passed: ks_ok && worst <= cfg.mc_sigmas,
        measured: worst,
        tolerance: cfg.mc_sigmas,
        details,
    })
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<SuiteReport> {
    match name {
        "general-dicke" => general_dicke(cfg),
        "ramsey-fd" => ramsey_fd(cfg),
        _ => mc_general(cfg),
    }
}

pub fn run_all(cfg: &VerifyConfig, only: &[String]) -> Result<VerifyReport> {
    let suites = SUITES
        .iter()
        .filter(|s| only.is_empty() || only.iter().any(|o| o == *s))
        .map(|s| {
            log::info!("verify: running {s}");
            run_suite(s, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { passed: suites.iter().all(|s| s.passed), suites })
}
