//! Modified Bessel functions `I0, I1, K0, K1` of complex argument in the
//! right half-plane.
//!
//! The scaled forms `I(z) e^{-z}` and `K(z) e^{z}` are the primary routines;
//! callers that only need ratios (the cylinder beam correction) use them to
//! stay finite for large `|z|`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ascending series for `I` below this radius, asymptotic expansion above.
pub const I_SERIES_RADIUS: f64 = 12.0;
/// Ascending (logarithmic) series for `K` below this radius, Steed's
/// continued fraction above.
pub const K_SERIES_RADIUS: f64 = 2.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ARG: f64 = 1e3;
const MAX_EXP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    fn nu(self) -> f64 {
        match self {
            BesselOrder::Zero => 0.0,
            BesselOrder::One => 1.0,
        }
    }
}

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Bessel argument not finite: {z}")))
    }
}

/// `I_nu(z)`, requires `Re z >= 0`, `|z| <= 1e3`.
pub fn bessel_i(order: BesselOrder, z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.re > MAX_EXP {
        return Err(Error::Overflow(format!("I_{}({z}) overflows", order.nu())));
    }
    Ok(bessel_i_scaled(order, z)? * z.exp())
}

/// `I_nu(z) e^{-z}`.
pub fn bessel_i_scaled(order: BesselOrder, z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.re < 0.0 {
        return Err(Error::Domain(format!("I requires Re z >= 0, got {z}")));
    }
    if z.norm() > MAX_ARG {
        return Err(Error::Domain(format!("|z| = {} beyond supported range", z.norm())));
    }
    if z.norm() <= I_SERIES_RADIUS {
        Ok(i_series(order, z) * (-z).exp())
    } else {
        Ok(i_asymptotic_scaled(order.nu(), z))
    }
}

/// `K_nu(z)`, requires `Re z > 0`.
pub fn bessel_k(order: BesselOrder, z: Complex64) -> Result<Complex64> {
    Ok(bessel_k_scaled(order, z)? * (-z).exp())
}

/// `K_nu(z) e^{z}`.
pub fn bessel_k_scaled(order: BesselOrder, z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.norm() == 0.0 {
        return Err(Error::Domain("K has a logarithmic singularity at z = 0".into()));
    }
    if z.re <= 0.0 {
        return Err(Error::Domain(format!("K requires Re z > 0, got {z}")));
    }
    if z.norm() <= K_SERIES_RADIUS {
        let (k0, k1) = k_series(z);
        let v = match order {
            BesselOrder::Zero => k0,
            BesselOrder::One => k1,
        };
        Ok(v * z.exp())
    } else {
        let (k0, k1) = k_steed_scaled(z);
        Ok(match order {
            BesselOrder::Zero => k0,
            BesselOrder::One => k1,
        })
    }
}

fn i_series(order: BesselOrder, z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let (mut term, nu) = match order {
        BesselOrder::Zero => (Complex64::new(1.0, 0.0), 0.0),
        BesselOrder::One => (z * 0.5, 1.0),
    };
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn asymptotic_coeffs(nu: f64, z: Complex64) -> (Complex64, Complex64) {
    // sums of a_k(nu)/z^k with alternating and plain signs
    let mu = 4.0 * nu * nu;
    let mut term = Complex64::new(1.0, 0.0);
    let mut alt = term;
    let mut plain = term;
    let kmax = (2.0 * z.norm()) as usize + 2;
    let mut last = f64::INFINITY;
    for k in 1..kmax.min(200) {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0) / z;
        let mag = term.norm();
        if mag > last {
            break;
        }
        last = mag;
        if k % 2 == 1 {
            alt -= term;
        } else {
            alt += term;
        }
        plain += term;
        if mag < 1e-17 {
            break;
        }
    }
    (alt, plain)
}

fn i_asymptotic_scaled(nu: f64, z: Complex64) -> Complex64 {
    let (alt, plain) = asymptotic_coeffs(nu, z);
    let root = (2.0 * PI * z).sqrt();
    // second exponential, sign picked by the half-plane of z
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let phase = Complex64::new(0.0, sign) * Complex64::from_polar(1.0, sign * nu * PI);
    (alt + phase * (-2.0 * z).exp() * plain) / root
}

fn k_series(z: Complex64) -> (Complex64, Complex64) {
    let q = z * z * 0.25;
    let log_half = (z * 0.5).ln();
    let i0 = i_series(BesselOrder::Zero, z);
    let i1 = i_series(BesselOrder::One, z);

    // K0 = -(ln(z/2) + gamma) I0 + sum_{k>=1} H_k q^k / (k!)^2
    let mut term = Complex64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    let mut sum0 = Complex64::new(0.0, 0.0);
    for k in 1..100 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = term * harmonic;
        sum0 += add;
        if add.norm() <= 1e-17 * sum0.norm() {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + sum0;

    // K1 = 1/z + ln(z/2) I1 - (z/4) sum_{k>=0} (psi(k+1) + psi(k+2)) q^k / (k!(k+1)!)
    let mut term = Complex64::new(1.0, 0.0);
    let mut h_k = 0.0;
    let mut sum1 = Complex64::new(1.0 - 2.0 * EULER_GAMMA, 0.0);
    for k in 1..100 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        h_k += 1.0 / kf;
        let psi_sum = -2.0 * EULER_GAMMA + 2.0 * h_k + 1.0 / (kf + 1.0);
        let add = term * psi_sum;
        sum1 += add;
        if add.norm() <= 1e-17 * sum1.norm() {
            break;
        }
    }
    let k1 = 1.0 / z + log_half * i1 - z * 0.25 * sum1;
    (k0, k1)
}

/// Steed's evaluation of the Temme continued fraction for `K_0, K_1`,
/// returned scaled by `e^{z}`.
fn k_steed_scaled(z: Complex64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let mut b = 2.0 * (one + z);
    let mut d = one / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = Complex64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 2..100_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = one / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * z)).sqrt() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_i(BesselOrder::Zero, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(bessel_i(BesselOrder::One, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(bessel_k(BesselOrder::Zero, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn i0_matches_long_series() {
        // direct 200-term power series in compensated summation
        let z = c(1.0, 1.0);
        let q = z * z * 0.25;
        let mut term = c(1.0, 0.0);
        let mut terms = vec![term];
        for k in 1..200 {
            term *= q / ((k * k) as f64);
            terms.push(term);
        }
        let mut sum = c(0.0, 0.0);
        let mut comp = c(0.0, 0.0);
        for t in terms.iter().rev() {
            let y = *t - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        let got = bessel_i(BesselOrder::Zero, z).unwrap();
        assert!(rel(got, sum) < 1e-13);
    }

    #[test]
    fn k0_of_one_matches_integral() {
        // K0(1) = int_0^inf exp(-cosh t) dt by composite Simpson on [0, 8]
        let n = 20_000;
        let h = 8.0 / n as f64;
        let f = |t: f64| (-t.cosh()).exp();
        let mut s = f(0.0) + f(8.0);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = s * h / 3.0;
        assert!((oracle - 0.421_024_438_240_708_3).abs() < 1e-12);
        let got = bessel_k(BesselOrder::Zero, c(1.0, 0.0)).unwrap();
        assert!((got.re - oracle).abs() / oracle < 1e-10);
        assert!(got.im.abs() < 1e-15);
    }

    #[test]
    fn wronskian_at_reference_point() {
        let z = c(0.7, 0.3);
        let w = bessel_i(BesselOrder::Zero, z).unwrap() * bessel_k(BesselOrder::One, z).unwrap()
            + bessel_i(BesselOrder::One, z).unwrap() * bessel_k(BesselOrder::Zero, z).unwrap();
        assert!(rel(w, 1.0 / z) < 1e-9);
    }

    #[test]
    fn k0_small_argument_logarithm() {
        let z = c(6e-4, 8e-4);
        let k0 = bessel_k(BesselOrder::Zero, z).unwrap();
        let i0 = bessel_i(BesselOrder::Zero, z).unwrap();
        let r = k0 + ((z * 0.5).ln() + EULER_GAMMA) * i0;
        assert!(r.norm() <= 1e-5);
    }

    #[test]
    fn seams_are_continuous() {
        for i in 0..32 {
            let th = -1.5 + 3.0 * i as f64 / 31.0;
            let d = Complex64::from_polar(1.0, th);
            for order in [BesselOrder::Zero, BesselOrder::One] {
                let a = i_series(order, d * I_SERIES_RADIUS) * (-d * I_SERIES_RADIUS).exp();
                let b = i_asymptotic_scaled(order.nu(), d * I_SERIES_RADIUS);
                assert!(rel(a, b) < 1e-9, "I seam theta={th}");
            }
            let zk = d * K_SERIES_RADIUS;
            let (s0, s1) = k_series(zk);
            let (c0, c1) = k_steed_scaled(zk);
            assert!(rel(s0 * zk.exp(), c0) < 1e-12, "K0 seam theta={th}");
            assert!(rel(s1 * zk.exp(), c1) < 1e-12, "K1 seam theta={th}");
        }
    }

    #[test]
    fn overflow_guard() {
        assert!(matches!(bessel_i(BesselOrder::Zero, c(701.0, 0.0)), Err(Error::Overflow(_))));
        assert!(bessel_i_scaled(BesselOrder::Zero, c(701.0, 0.0)).is_ok());
    }
}
