//! Thermal-velocity averages over the Maxwellian `F(v)`.
//!
//! The two-photon set `G, G1, G2` is evaluated on a complex-shifted velocity
//! contour. Writing `a = omega - k.v + xi_1`, `b = omega - k.v + xi_2` and
//! `xi_d = a b - |Omega_2|^2`,
//!
//! ```text
//! G1 = <1/a> + |Omega_2|^2 <1/(a xi_d)>,   G2 = <1/b> + |Omega_2|^2 <1/(b xi_d)>
//! ```
//!
//! so the one-photon parts come from the Faddeeva function and only the
//! pump-induced parts are left to the 2D Gauss-Hermite rule.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{BeamParams, MediumParams, Vec3};
use crate::quadrature::GaussHermite;
use crate::special::faddeeva_upper;

/// First Gauss-Hermite order tried by [`g_set`].
pub const GH_START_ORDER: usize = 64;
/// Largest Gauss-Hermite order tried by [`g_set`].
pub const GH_MAX_ORDER: usize = 512;
/// Relative change between successive orders accepted as converged.
pub const GH_TOLERANCE: f64 = 1e-8;
/// Floor on the imaginary part of the resonance denominators, in units of `v_th q1`.
pub const MIN_WIDTH_RATIO: f64 = 1e-12;
/// Contour shift in units of `v_th`.
const CONTOUR_SHIFT: f64 = 1.5;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The velocity integrals entering the general susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSet {
    pub g: Complex64,
    pub g1: Complex64,
    pub g2: Complex64,
    /// Gauss-Hermite order (per axis) of the accepted result.
    pub order: usize,
}

/// `int F(u) / (center - slope u) du` for a 1D Maxwellian of width `v_th`.
pub fn gaussian_resolvent(center: Complex64, slope: f64, v_th: f64) -> Complex64 {
    let s = slope.abs() * v_th;
    if s < 1e-5 * center.norm() {
        let m2 = (s / center).powi(2);
        return (1.0 + m2 + 3.0 * m2 * m2) / center;
    }
    if center.im < 0.0 {
        return gaussian_resolvent(center.conj(), slope, v_th).conj();
    }
    let zeta = center / (SQRT_2 * s);
    -I * PI.sqrt() * faddeeva_upper(zeta) / (SQRT_2 * s)
}

fn min_width(medium: &MediumParams, q1: f64) -> f64 {
    MIN_WIDTH_RATIO * medium.v_th * q1
}

/// One-photon Voigt integral `G1(Delta_1)` for a probe of wave number `q1`.
pub fn voigt_g1(delta_1: f64, medium: &MediumParams, q1: f64) -> Result<Complex64> {
    medium.validate()?;
    if !(q1.is_finite() && q1 > 0.0) {
        return Err(Error::invalid("q1", format!("must be > 0, got {q1}")));
    }
    let width = (medium.gamma_d + medium.gamma).max(min_width(medium, q1));
    Ok(gaussian_resolvent(Complex64::new(delta_1, width), q1, medium.v_th))
}

/// One-photon complex spectrum `K = i G1 / (1 - i gamma G1)`.
pub fn one_photon_k(delta_1: f64, medium: &MediumParams, q1: f64) -> Result<Complex64> {
    let g1 = voigt_g1(delta_1, medium, q1)?;
    Ok(I * g1 / (1.0 - I * medium.gamma * g1))
}

// Orthonormal pair spanning the two wave vectors that enter the denominators.
fn plane_basis(p: Vec3, r: Vec3) -> (Vec3, Vec3) {
    let pick = |v: Vec3| if v.norm() > 0.0 { Some(v.scale(1.0 / v.norm())) } else { None };
    let e1 = pick(p).or_else(|| pick(r)).unwrap_or(Vec3::new(0.0, 0.0, 1.0));
    let rest = r - e1.scale(r.dot(e1));
    let e2 = if rest.norm() > 1e-14 * r.norm() { pick(rest) } else { None };
    let e2 = e2.unwrap_or_else(|| {
        let trial = if e1.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
        let t = trial - e1.scale(trial.dot(e1));
        t.scale(1.0 / t.norm())
    });
    (e1, e2)
}

struct Axis {
    // velocity component along the axis at each node
    u: Vec<f64>,
    // weight times the shifted-Gaussian factor
    w: Vec<Complex64>,
}

fn axis(rule: &GaussHermite, v_th: f64, tau: f64) -> Axis {
    let norm = (tau * tau / (2.0 * v_th * v_th)).exp() / PI.sqrt();
    let u = rule.nodes.iter().map(|x| SQRT_2 * v_th * x).collect();
    let w = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * norm * Complex64::from_polar(1.0, SQRT_2 * x * tau / v_th))
        .collect();
    Axis { u, w }
}

/// The integrals `G, G1, G2` at transverse wave vector `k_perp` and frequency `omega`.
///
/// The idle velocity component is integrated out analytically, leaving a 2D
/// Gauss-Hermite tensor rule whose order doubles from [`GH_START_ORDER`]
/// until successive results agree to [`GH_TOLERANCE`].
pub fn g_set(k_perp: Vec3, omega: f64, medium: &MediumParams, beams: &BeamParams) -> Result<GSet> {
    medium.validate()?;
    beams.validate()?;
    if !(k_perp.is_finite() && omega.is_finite()) {
        return Err(Error::invalid("k_perp", "wave vector and frequency must be finite"));
    }
    let v = medium.v_th;
    let floor = min_width(medium, beams.q1);
    let a0 = Complex64::new(omega + beams.delta_1, (medium.gamma_d + medium.gamma).max(floor));
    let b0 = Complex64::new(omega + beams.delta, (medium.gamma_21 + medium.gamma).max(floor));
    let pump = beams.pump_power();

    let p = Vec3::new(0.0, 0.0, beams.q1) + k_perp;
    let r = beams.delta_q + k_perp;
    let (e1, e2) = plane_basis(p, r);
    let (p1, p2, r1, r2) = (p.dot(e1), p.dot(e2), r.dot(e1), r.dot(e2));

    let va = gaussian_resolvent(a0, p.norm(), v);
    let vb = gaussian_resolvent(b0, r.norm(), v);

    // shift along the bisector of p and r so both Im a and Im b grow
    let unit = |x: f64, y: f64| {
        let n = x.hypot(y);
        if n > 0.0 { (x / n, y / n) } else { (0.0, 0.0) }
    };
    let (ph1, ph2) = unit(p1, p2);
    let (rh1, rh2) = unit(r1, r2);
    let (t1, t2) = unit(ph1 + rh1, ph2 + rh2);
    let (tau1, tau2) = (CONTOUR_SHIFT * v * t1, CONTOUR_SHIFT * v * t2);
    let a_shift = a0 + I * (p1 * tau1 + p2 * tau2);
    let b_shift = b0 + I * (r1 * tau1 + r2 * tau2);

    let eval = |n: usize| {
        let rule = GaussHermite::cached(n);
        let ax1 = axis(&rule, v, tau1);
        let ax2 = axis(&rule, v, tau2);
        let (mut g, mut h1, mut h2) = (Complex64::default(), Complex64::default(), Complex64::default());
        for (u1, w1) in ax1.u.iter().zip(&ax1.w) {
            let a_row = a_shift - p1 * u1;
            let b_row = b_shift - r1 * u1;
            let (mut rg, mut rh1, mut rh2) =
                (Complex64::default(), Complex64::default(), Complex64::default());
            for (u2, w2) in ax2.u.iter().zip(&ax2.w) {
                let a = a_row - p2 * u2;
                let b = b_row - r2 * u2;
                let t = w2 / (a * b - pump);
                rg += t;
                rh1 += t / a;
                rh2 += t / b;
            }
            g += w1 * rg;
            h1 += w1 * rh1;
            h2 += w1 * rh2;
        }
        [g, h1, h2]
    };

    let mut order = GH_START_ORDER;
    let mut prev = eval(order);
    loop {
        let next_order = order * 2;
        let cur = eval(next_order);
        let residual = prev
            .iter()
            .zip(&cur)
            .map(|(a, b)| if b.norm() > 0.0 { (a - b).norm() / b.norm() } else { a.norm() })
            .fold(0.0, f64::max);
        if residual < GH_TOLERANCE {
            let [g, h1, h2] = cur;
            return Ok(GSet { g, g1: va + pump * h1, g2: vb + pump * h2, order: next_order });
        }
        if next_order >= GH_MAX_ORDER {
            return Err(Error::NonConvergence { order: next_order, residual });
        }
        order = next_order;
        prev = cur;
    }
}
