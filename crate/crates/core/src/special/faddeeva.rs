//! Faddeeva function `w(z) = exp(-z^2) erfc(-iz)`.
//!
//! Two evaluation routes cover the upper half-plane:
//!
//! * `|z| >= CF_RADIUS`: the Laplace continued fraction, evaluated backward
//!   from a depth that grows as the argument approaches the switchover circle.
//! * otherwise: Weideman's rational expansion in `Z = (L + iz)/(L - iz)`
//!   with `WEIDEMAN_TERMS` coefficients.
//!
//! The lower half-plane follows from `w(z) = 2 exp(-z^2) - w(-z)`.

use std::f64::consts::PI;
use std::sync::LazyLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of Weideman expansion coefficients.
pub const WEIDEMAN_TERMS: usize = 40;

/// Radius beyond which the continued fraction is used.
pub const CF_RADIUS: f64 = 6.5;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

struct Weideman {
    l: f64,
    // a_1 .. a_N, evaluated as sum a_n Z^(n-1)
    coeffs: Vec<f64>,
}

static WEIDEMAN: LazyLock<Weideman> = LazyLock::new(|| {
    let n = WEIDEMAN_TERMS;
    let m = 2 * n;
    let l = (n as f64 / 2f64.sqrt()).sqrt();
    // samples of exp(-t^2)(L^2 + t^2) at t = L tan(theta/2), theta = k pi / M
    let samples: Vec<(f64, f64)> = (-(m as i64) + 1..m as i64)
        .map(|k| {
            let theta = k as f64 * PI / m as f64;
            let t = l * (theta / 2.0).tan();
            (theta, (-t * t).exp() * (l * l + t * t))
        })
        .collect();
    let coeffs = (1..=n)
        .map(|j| {
            samples.iter().map(|&(theta, f)| f * (j as f64 * theta).cos()).sum::<f64>()
                / (2 * m) as f64
        })
        .collect();
    Weideman { l, coeffs }
});

/// Faddeeva function on the whole complex plane.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("faddeeva argument not finite: {z}")));
    }
    if z.im >= 0.0 {
        Ok(upper(z))
    } else {
        // w(z) = 2 exp(-z^2) - w(-z), -z in the upper half-plane
        let e = (-z * z).exp();
        let v = 2.0 * e - upper(-z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!("faddeeva({z}) exceeds double range")))
        }
    }
}

pub(crate) fn upper(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r >= CF_RADIUS {
        continued_fraction(z, cf_depth(r))
    } else {
        weideman(z)
    }
}

fn cf_depth(r: f64) -> usize {
    // depth needed near the switchover circle drops quickly with |z|
    if r >= 1e3 {
        4
    } else if r >= 100.0 {
        8
    } else if r >= 20.0 {
        20
    } else if r >= 10.0 {
        60
    } else {
        160
    }
}

fn continued_fraction(z: Complex64, depth: usize) -> Complex64 {
    let mut t = Complex64::new(0.0, 0.0);
    for k in (1..=depth).rev() {
        t = (k as f64 * 0.5) / (z - t);
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / (z - t)
}

fn weideman(z: Complex64) -> Complex64 {
    let wd = &*WEIDEMAN;
    let iz = Complex64::new(-z.im, z.re);
    let denom = wd.l - iz;
    let zz = (wd.l + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &a in wd.coeffs.iter().rev() {
        p = p * zz + a;
    }
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

/// Complementary error function of a real argument, routed through `w`.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        (-x * x).exp() * upper(Complex64::new(0.0, x)).re
    } else {
        2.0 - erfc(-x)
    }
}
