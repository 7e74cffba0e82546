//! Complex special functions used by the lineshape and beam formulas.

mod bessel;
mod faddeeva;

pub use bessel::{
    bessel_i, bessel_i_scaled, bessel_k, bessel_k_scaled, BesselOrder, I_SERIES_RADIUS,
    K_SERIES_RADIUS,
};
pub use faddeeva::{erfc, faddeeva, CF_RADIUS, WEIDEMAN_TERMS};

use num_complex::Complex64;

/// Series switchover for the Brownian-motion function.
pub const BROWNIAN_SERIES_RADIUS: f64 = 1e-4;

/// `H(x) = e^{-x} - 1 + x`, the integrated velocity self-correlation of a
/// Brownian particle. Small arguments use `x^2/2 - x^3/6 + x^4/24`.
pub fn brownian_h(x: Complex64) -> Complex64 {
    if x.norm() < BROWNIAN_SERIES_RADIUS {
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0)
    } else {
        (-x).exp() - 1.0 + x
    }
}

pub(crate) fn faddeeva_upper(z: Complex64) -> Complex64 {
    faddeeva::upper(z)
}
