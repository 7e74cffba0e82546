//! Command implementations. Each returns the bytes to write so the callers
//! (binary and tests) decide where they go.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ConfigError, Engine, EvolveMode, RunConfig};
use super::CliError;
use crate::dicke::{apply_filter, chi31_dicke, FilterParams};
use crate::diffusion::{evolve_slow_light, evolve_stored, group_velocity, StoredCoherence};
use crate::field::Cf64File;
use crate::params::{MediumParams, Vec3};
use crate::ramsey::{power_spectrum, BeamShape, RamseyGeometry};
use crate::susceptibility::{chi31_general, fwhm_analytic, fwhm_floor, measured_fwhm, transmission_from_chi};

/// Fraction of failed points above which `fwhm-scan` exits non-zero.
pub const MAX_FAILED_FRACTION: f64 = 0.05;

/// 17 significant digits, locale independent.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn echo<T: Serialize>(out: &mut String, name: &str, block: &T) {
    let text = serde_json::to_string(block).unwrap_or_else(|e| format!("\"<unserializable: {e}>\""));
    out.push_str(&format!("# {name} = {text}\n"));
}

fn csv_rows(out: &mut String, header: &str, rows: impl IntoIterator<Item = Vec<f64>>) {
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
}

fn preamble(command: &str) -> String {
    format!("# eit-thermal {} {command}\n", env!("CARGO_PKG_VERSION"))
}

pub fn spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let req = *RunConfig::require(&cfg.spectrum, "spectrum")?;
    let grid = req.delta.values("spectrum.delta")?;
    let mut out = preamble("spectrum");
    echo(&mut out, "spectrum", &req);
    match req.engine {
        Engine::General | Engine::Dicke => {
            let (m, b) = (cfg.medium()?, cfg.beams()?);
            echo(&mut out, "medium", &m);
            echo(&mut out, "beams", &b);
            let chi: Vec<Complex64> = grid
                .par_iter()
                .map(|&d| {
                    let bd = b.with_delta(d);
                    match req.engine {
                        Engine::General => chi31_general(req.k_perp, req.omega, &m, &bd),
                        _ => chi31_dicke(req.k_perp, req.omega, &m, &bd),
                    }
                })
                .collect::<crate::Result<_>>()?;
            let t = transmission_from_chi(&grid, &chi)?;
            let rows = (0..grid.len()).map(|i| vec![grid[i], chi[i].re, chi[i].im, t.values[i].re]);
            csv_rows(&mut out, "delta,re_chi,im_chi,transmission_normalized", rows);
        }
        Engine::Ramsey1d | Engine::Ramsey2d => {
            let r = *RunConfig::require(&cfg.ramsey, "ramsey")?;
            echo(&mut out, "ramsey", &r);
            let dim = if req.engine == Engine::Ramsey1d { BeamShape::Sheet1d } else { BeamShape::Cylinder2d };
            let geom = RamseyGeometry { a: r.a, dim };
            geom.validate().map_err(|e| ConfigError::from_validation("ramsey", e))?;
            let p = r.params();
            p.validate().map_err(|e| ConfigError::from_validation("ramsey", e))?;
            let s = power_spectrum(&grid, &geom, &p, r.k)?;
            let rows = (0..grid.len())
                .map(|i| vec![grid[i], s.power.values[i].re, s.power.values[i].im, s.transmission.values[i].re]);
            csv_rows(&mut out, "delta,power,im_chi,transmission_normalized", rows);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub csv: String,
    pub warnings: Vec<String>,
    pub points: usize,
}

impl ScanOutput {
    pub fn failed_fraction(&self) -> f64 {
        self.warnings.len() as f64 / self.points.max(1) as f64
    }
}

pub fn fwhm_scan(cfg: &RunConfig) -> Result<ScanOutput, CliError> {
    let scan = RunConfig::require(&cfg.fwhm_scan, "fwhm_scan")?.clone();
    if scan.gammas.is_empty() {
        return Err(ConfigError::new("fwhm_scan.gammas", "must not be empty").into());
    }
    let ks = scan.k.values("fwhm_scan.k")?;
    let (m0, b) = (cfg.medium()?, cfg.beams()?);
    let media: Vec<MediumParams> = scan
        .gammas
        .iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let m = MediumParams { gamma, ..m0 };
            m.validate().map_err(|e| ConfigError::new(format!("fwhm_scan.gammas[{i}]"), e.to_string()))?;
            Ok(m)
        })
        .collect::<Result<_, ConfigError>>()?;
    let jobs: Vec<(MediumParams, f64)> = media.iter().flat_map(|m| ks.iter().map(move |&k| (*m, k))).collect();
    let results: Vec<(Vec<f64>, Option<String>)> = jobs
        .par_iter()
        .map(|&(m, k)| {
            let floor = fwhm_floor(&m, &b)?;
            let analytic = fwhm_analytic(k, &m);
            Ok(match measured_fwhm(Vec3::new(k, 0.0, 0.0), &m, &b, scan.grid) {
                Ok(r) => (vec![k, m.gamma, r.width, floor, analytic], None),
                Err(e) => (vec![k, m.gamma, f64::NAN, floor, analytic], Some(format!("k={k} gamma={}: {e}", m.gamma))),
            })
        })
        .collect::<crate::Result<_>>()?;
    let mut csv = preamble("fwhm-scan");
    echo(&mut csv, "fwhm_scan", &scan);
    echo(&mut csv, "medium", &m0);
    echo(&mut csv, "beams", &b);
    let warnings: Vec<String> = results.iter().filter_map(|r| r.1.clone()).collect();
    csv_rows(&mut csv, "k,gamma,fwhm_measured,fwhm_floor,fwhm_analytic", results.into_iter().map(|r| r.0));
    Ok(ScanOutput { csv, warnings, points: jobs.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldOutput {
    pub file: Cf64File,
    pub warnings: Vec<String>,
}

pub fn filter_image(cfg: &RunConfig, input: Cf64File) -> Result<FieldOutput, CliError> {
    let f = *RunConfig::require(&cfg.filter, "filter")?;
    let params = FilterParams {
        medium: cfg.medium()?,
        beams: cfg.beams()?,
        include_diffraction: f.include_diffraction,
        propagation_length: f.propagation_length,
        window: f.window,
    };
    let out = apply_filter(&input.field, &params)?;
    let meta = json!({
        "command": "filter-image",
        "filter": serde_json::to_value(params).unwrap_or(Value::Null),
        "warnings": out.warnings,
        "input": input.meta,
    });
    Ok(FieldOutput { file: Cf64File { field: out.field, unit: input.unit, meta: Some(meta) }, warnings: out.warnings })
}

fn previous_time(meta: &Option<Value>) -> f64 {
    meta.as_ref().and_then(|m| m.get("t_total")).and_then(Value::as_f64).unwrap_or(0.0)
}

pub fn evolve(cfg: &RunConfig, input: Cf64File, t_override: Option<f64>) -> Result<FieldOutput, CliError> {
    let e = *RunConfig::require(&cfg.evolve, "evolve")?;
    let t = t_override.unwrap_or(e.t);
    if !(t.is_finite() && t >= 0.0) {
        return Err(ConfigError::new("evolve.t", format!("must be >= 0, got {t}")).into());
    }
    let m = cfg.medium()?;
    let t0 = previous_time(&input.meta);
    let (field, meta) = match e.mode {
        EvolveMode::Store => {
            let state = StoredCoherence { field: input.field, t: t0 };
            let out = evolve_stored(&state, t, &m)?;
            let d = m.diffusion();
            let meta = json!({
                "command": "evolve",
                "mode": "store",
                "t": t,
                "t_total": out.t,
                "carrier": [1.0, 0.0],
                "diffusion": d,
                "variance_growth": 2.0 * d * t,
            });
            (out.field, meta)
        }
        EvolveMode::Slowlight => {
            let slp = group_velocity(&m, &cfg.beams()?)?;
            let out = evolve_slow_light(&input.field, t, &slp)?;
            let meta = json!({
                "command": "evolve",
                "mode": "slowlight",
                "t": t,
                "t_total": t0 + t,
                "carrier": [out.carrier.re, out.carrier.im],
                "slow_light": serde_json::to_value(slp).unwrap_or(Value::Null),
            });
            (out.field, meta)
        }
    };
    Ok(FieldOutput { file: Cf64File { field, unit: input.unit, meta: Some(meta) }, warnings: Vec::new() })
}

/// 8-bit binary portable graymap of `|E|`, scaled to the largest magnitude.
pub fn pgm_preview(file: &Cf64File) -> Vec<u8> {
    let f = &file.field;
    let peak = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", f.nx(), f.ny()).into_bytes();
    out.extend(f.values().iter().map(|v| if peak > 0.0 { (255.0 * v.norm() / peak).round() as u8 } else { 0 }));
    out
}
