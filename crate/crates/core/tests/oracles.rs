use eit_thermal::dicke::chi31_dicke;
use eit_thermal::susceptibility::chi31_general;
use eit_thermal::velocity::{g_set, voigt_g1};
use eit_thermal::{BeamParams, MediumParams, Vec3};
use num_complex::Complex64;

// Values from an independent scipy evaluation (scipy.special.wofz plus
// 2D Gauss-Hermite at order 400), v_th = |k| = 1 units.
const G_REF: Complex64 = Complex64::new(-2.6282392496351e-5, 0.0);
const G1_REF: Complex64 = Complex64::new(0.0, -1.68923575433e-4);
const G2_REF: Complex64 = Complex64::new(0.0, -0.15558022237261);

fn compressed(gamma: f64) -> (MediumParams, BeamParams) {
    let m = MediumParams { v_th: 1.0, gamma, gamma_d: 2500.0, gamma_21: 0.025, omega_21: 0.0, coupling: 1.0 };
    let b = BeamParams { q1: 5270.0, delta_q: Vec3::ZERO, omega_2: Complex64::new(2.5f64.sqrt(), 0.0), delta_1: 0.0, delta: 0.0 };
    (m, b)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn velocity_integrals_match_frozen_reference() {
    let (m, b) = compressed(6.25);
    let s = g_set(Vec3::new(1.0, 0.0, 0.0), 0.0, &m, &b).unwrap();
    assert!(rel(s.g, G_REF) < 1e-7, "{}", s.g);
    assert!(rel(s.g1, G1_REF) < 1e-7, "{}", s.g1);
    assert!(rel(s.g2, G2_REF) < 1e-7, "{}", s.g2);
}

/// Adaptive Simpson on `[a, b]` for complex integrands.
fn simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn step<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.norm() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[test]
fn voigt_matches_adaptive_quadrature() {
    let q1 = 7.903e6;
    for (gamma_d, delta_1) in [(1e8, 0.0), (1e9, 5e8), (1e10, -2e9), (5e7, 1.5e9)] {
        let m = MediumParams { v_th: 170.0, gamma: 1e5, gamma_d, gamma_21: 0.0, omega_21: 0.0, coupling: 1.0 };
        let width = gamma_d + m.gamma;
        let f = |u: f64| {
            let maxwell = (-u * u / (2.0 * m.v_th * m.v_th)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * m.v_th);
            maxwell / Complex64::new(delta_1 - q1 * u, width)
        };
        let span = 12.0 * m.v_th;
        let scale = 1.0 / width;
        let oracle = simpson(&f, -span, span, 1e-13 * scale);
        let g1 = voigt_g1(delta_1, &m, q1).unwrap();
        assert!(rel(g1, oracle) < 1e-9, "gamma_d={gamma_d} delta_1={delta_1}: {g1} vs {oracle}");
    }
}

#[test]
fn general_reduces_to_diffusion_limit() {
    let m = MediumParams { v_th: 170.0, gamma: 1e8, gamma_d: 1e8, gamma_21: 100.0, omega_21: 0.0, coupling: 1.0 };
    let b = BeamParams { q1: 7.903e6, delta_q: Vec3::ZERO, omega_2: Complex64::new(2e5, 0.0), delta_1: 0.0, delta: 0.0 };
    let k = Vec3::new(300.0, 0.0, 0.0);
    for delta in [-2e3, -300.0, 0.0, 500.0, 4e3] {
        let bd = b.with_delta(delta);
        let g = chi31_general(k, 0.0, &m, &bd).unwrap();
        let d = chi31_dicke(k, 0.0, &m, &bd).unwrap();
        assert!(rel(g, d) < 1e-3, "delta={delta}: {g} vs {d}");
    }
}

#[test]
fn frozen_line_is_narrower_with_more_collisions() {
    // the three compressed lines: eta = 16, 1.6, 0.16
    let widths: Vec<f64> = [0.0625, 0.625, 6.25]
        .iter()
        .map(|&gamma| {
            let (m, b) = compressed(gamma);
            eit_thermal::susceptibility::measured_fwhm(Vec3::new(1.0, 0.0, 0.0), &m, &b, Default::default()).unwrap().width
        })
        .collect();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}
