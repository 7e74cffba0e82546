//! Complex transverse fields on uniform grids, their spectral transforms and
//! the CF64 file format.
//!
//! Storage is row-major, `values[iy * nx + ix]`. Spatial frequencies follow the
//! DFT ordering `k_j = 2 pi f_j / (n d)` with `f_j = j` for `j < n/2` and
//! `j - n` otherwise.

use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest supported grid dimension.
pub const MIN_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, values: Vec<Complex64>) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < MIN_DIM || !n.is_power_of_two() {
                return Err(Error::invalid(name, format!("must be a power of two >= {MIN_DIM}, got {n}")));
            }
        }
        for (name, d) in [("dx", dx), ("dy", dy)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::invalid(name, format!("must be > 0, got {d}")));
            }
        }
        if values.len() != nx * ny {
            return Err(Error::invalid("values", format!("expected {} samples, got {}", nx * ny, values.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("values", "must be finite"));
        }
        Ok(ComplexField2D { nx, ny, dx, dy, values })
    }

    pub fn zeros(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::new(nx, ny, dx, dy, vec![Complex64::default(); nx * ny])
    }

    /// Samples `f(x, y)` at cell positions centred on the grid middle,
    /// `x = (ix - nx/2) dx`.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(nx: usize, ny: usize, dx: f64, dy: f64, f: F) -> Result<Self> {
        let values = (0..nx * ny)
            .map(|i| {
                let (ix, iy) = (i % nx, i / nx);
                f((ix as f64 - (nx / 2) as f64) * dx, (iy as f64 - (ny / 2) as f64) * dy)
            })
            .collect();
        Self::new(nx, ny, dx, dy, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.nx + ix]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: Complex64) {
        self.values[iy * self.nx + ix] = v;
    }

    /// Coordinates of column `ix` and row `iy`.
    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx / 2) as f64) * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny / 2) as f64) * self.dy
    }

    /// `sum |values|^2 dx dy`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx * self.dy
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexField2D { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx && self.dy == other.dy
    }

    /// Transform, multiply each mode by `multiplier(kx, ky)`, transform back.
    pub fn apply_spectral<F>(&self, multiplier: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let (nx, ny) = (self.nx, self.ny);
        let mut buf = self.values.clone();
        fft2(&mut buf, nx, ny, false);
        let kx = wavenumbers(nx, self.dx);
        let ky = wavenumbers(ny, self.dy);
        buf.par_chunks_mut(nx).zip(ky.par_iter()).for_each(|(row, &ky)| {
            for (v, &kx) in row.iter_mut().zip(&kx) {
                *v *= multiplier(kx, ky);
            }
        });
        fft2(&mut buf, nx, ny, true);
        ComplexField2D { values: buf, ..self.clone() }
    }

    /// Spectral energy `sum |F(k)|^2` and the part beyond `fraction` of the Nyquist radius.
    pub fn spectral_energy_outside(&self, fraction: f64) -> (f64, f64) {
        let mut buf = self.values.clone();
        fft2(&mut buf, self.nx, self.ny, false);
        let kx = wavenumbers(self.nx, self.dx);
        let ky = wavenumbers(self.ny, self.dy);
        let (kx_max, ky_max) = (PI / self.dx, PI / self.dy);
        let mut total = 0.0;
        let mut outer = 0.0;
        for (iy, row) in buf.chunks(self.nx).enumerate() {
            for (ix, v) in row.iter().enumerate() {
                let e = v.norm_sqr();
                total += e;
                if (kx[ix] / kx_max).abs() > fraction || (ky[iy] / ky_max).abs() > fraction {
                    outer += e;
                }
            }
        }
        (total, outer)
    }
}

/// Angular spatial frequencies of an `n`-point DFT with spacing `d`.
pub fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let scale = 2.0 * PI / (n as f64 * d);
    (0..n)
        .map(|j| {
            let f = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            f * scale
        })
        .collect()
}

/// In-place 2D FFT on row-major data. The inverse is normalised by `1/(nx ny)`.
pub fn fft2(buf: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (fx, fy) = if inverse {
        (planner.plan_fft_inverse(nx), planner.plan_fft_inverse(ny))
    } else {
        (planner.plan_fft_forward(nx), planner.plan_fft_forward(ny))
    };
    buf.par_chunks_mut(nx).for_each(|row| fx.process(row));
    let mut t = transpose(buf, nx, ny);
    t.par_chunks_mut(ny).for_each(|col| fy.process(col));
    buf.copy_from_slice(&transpose(&t, ny, nx));
    if inverse {
        let s = 1.0 / (nx * ny) as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }
}

fn transpose(src: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            out[ix * ny + iy] = src[iy * nx + ix];
        }
    }
    out
}

/// CF64 magic bytes.
pub const CF64_MAGIC: &[u8; 4] = b"CF64";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Cf64Header {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

/// A field with the descriptive parts of its CF64 header.
#[derive(Debug, Clone, PartialEq)]
pub struct Cf64File {
    pub field: ComplexField2D,
    pub unit: String,
    pub meta: Option<serde_json::Value>,
}

impl Cf64File {
    pub fn new(field: ComplexField2D, unit: impl Into<String>) -> Self {
        Cf64File { field, unit: unit.into(), meta: None }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let f = &self.field;
        let header = Cf64Header { nx: f.nx, ny: f.ny, dx: f.dx, dy: f.dy, unit: self.unit.clone(), meta: self.meta.clone() };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
        let len = u32::try_from(json.len()).map_err(|_| Error::Format("header too long".into()))?;
        let mut out = Vec::with_capacity(8 + json.len() + 16 * f.values.len());
        out.extend_from_slice(CF64_MAGIC);
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&json);
        for v in &f.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != CF64_MAGIC {
            return Err(Error::Format("missing CF64 magic".into()));
        }
        let len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let body = bytes.get(8..8 + len).ok_or_else(|| Error::Format("truncated header".into()))?;
        let h: Cf64Header = serde_json::from_slice(body).map_err(|e| Error::Format(format!("bad header: {e}")))?;
        let payload = &bytes[8 + len..];
        let expect = h.nx.checked_mul(h.ny).and_then(|n| n.checked_mul(16));
        if expect != Some(payload.len()) {
            return Err(Error::Format(format!(
                "payload has {} bytes, header implies {}",
                payload.len(),
                16 * h.nx * h.ny
            )));
        }
        let values = payload
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        let field = ComplexField2D::new(h.nx, h.ny, h.dx, h.dy, values).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Cf64File { field, unit: h.unit, meta: h.meta })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_bytes()?)
    }
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other(format!("not a file path: {}", path.display()))))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(nx: usize) -> ComplexField2D {
        ComplexField2D::from_fn(nx, nx, 0.1, 0.1, |x, y| Complex64::new((-(x * x + y * y)).exp(), 0.2 * x)).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(ComplexField2D::zeros(48, 32, 1.0, 1.0).is_err());
        assert!(ComplexField2D::zeros(16, 32, 1.0, 1.0).is_err());
        assert!(ComplexField2D::zeros(32, 32, 0.0, 1.0).is_err());
        assert!(ComplexField2D::new(32, 32, 1.0, 1.0, vec![Complex64::default(); 10]).is_err());
    }

    #[test]
    fn wavenumber_ordering() {
        let k = wavenumbers(8, 0.5);
        let s = 2.0 * PI / 4.0;
        assert_eq!(k, vec![0.0, s, 2.0 * s, 3.0 * s, -4.0 * s, -3.0 * s, -2.0 * s, -s]);
    }

    #[test]
    fn fft_round_trip_and_parseval() {
        let f = gaussian(64);
        let mut buf = f.values().to_vec();
        fft2(&mut buf, 64, 64, false);
        let spectral: f64 = buf.iter().map(|v| v.norm_sqr()).sum::<f64>() / (64.0 * 64.0);
        let direct: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
        assert!((spectral - direct).abs() / direct < 1e-13);
        fft2(&mut buf, 64, 64, true);
        for (a, b) in buf.iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn plane_wave_lands_on_its_bin() {
        let (nx, ny) = (32, 64);
        let kx = wavenumbers(nx, 1.0)[3];
        let ky = wavenumbers(ny, 1.0)[ny - 5];
        let f = ComplexField2D::new(nx, ny, 1.0, 1.0, (0..nx * ny)
            .map(|i| Complex64::from_polar(1.0, kx * (i % nx) as f64 + ky * (i / nx) as f64))
            .collect())
        .unwrap();
        let mut buf = f.values().to_vec();
        fft2(&mut buf, nx, ny, false);
        let peak = buf.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
        assert_eq!(peak, (ny - 5) * nx + 3);
    }

    #[test]
    fn identity_multiplier_is_identity() {
        let f = gaussian(32);
        let g = f.apply_spectral(|_, _| Complex64::new(1.0, 0.0));
        for (a, b) in g.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn cf64_round_trip_is_bit_identical() {
        let mut file = Cf64File::new(gaussian(32), "envelope");
        file.meta = Some(serde_json::json!({"t": 1.5}));
        let bytes = file.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"CF64");
        let back = Cf64File::from_bytes(&bytes).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn cf64_rejects_corruption() {
        let bytes = Cf64File::new(gaussian(32), "x").to_bytes().unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Cf64File::from_bytes(&bad), Err(Error::Format(_))));
        assert!(matches!(Cf64File::from_bytes(&bytes[..bytes.len() - 3]), Err(Error::Format(_))));
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.cf64");
        let file = Cf64File::new(gaussian(32), "x");
        file.write(&path).unwrap();
        assert_eq!(Cf64File::read(&path).unwrap(), file);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
