//! Gauss-Hermite rules for the weight `exp(-x^2)`.
//!
//! Nodes are the eigenvalues of the Jacobi matrix, refined by Newton steps on
//! orthonormal Hermite functions; weights follow from the derivative there.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// A symmetric Gauss-Hermite rule; `nodes` ascending.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const PI_M4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite order must be positive");
        // Jacobi matrix eigenvalues seed the nodes, Newton polishes them
        let off: Vec<f64> = (1..n).map(|j| (j as f64 / 2.0).sqrt()).collect();
        let jacobi = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            1 => off[i.min(j)],
            _ => 0.0,
        });
        let mut seeds: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        seeds.sort_by(f64::total_cmp);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &seed in &seeds[..n.div_ceil(2)] {
            let mut z = -seed;
            for _ in 0..8 {
                let (p, d) = hermite_and_derivative(n, z);
                if p == 0.0 || !d.is_finite() {
                    break;
                }
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = hermite_and_derivative(n, z);
            let w = 2.0 / (d * d);
            nodes.push(z);
            weights.push(if w.is_finite() { w } else { 0.0 });
        }
        // nodes now hold the non-negative half in descending order
        let mirrored = n / 2;
        let mut full_nodes: Vec<f64> = nodes[..mirrored].iter().map(|z| -z).collect();
        let mut full_weights: Vec<f64> = weights[..mirrored].to_vec();
        if n % 2 == 1 {
            full_nodes.push(0.0);
            full_weights.push(weights[mirrored]);
        }
        full_nodes.extend(nodes[..mirrored].iter().rev());
        full_weights.extend(weights[..mirrored].iter().rev());
        GaussHermite { nodes: full_nodes, weights: full_weights }
    }

    /// Cached rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(n).or_insert_with(|| Arc::new(GaussHermite::new(n))).clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `sum_i w_i f(x_i)`, approximating `int exp(-x^2) f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

// Orthonormal Hermite function value and derivative (NR recurrence).
fn hermite_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}
