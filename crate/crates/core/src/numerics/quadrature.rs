use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const MAX_NEWTON: usize = 100;
const NEWTON_TOL: f64 = 1e-15;

/// Gauss–Legendre nodes and weights on `[a, b]`, nodes increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// The same rule transported affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let (a0, b0) = self.interval;
        let scale = (b - a) / (b0 - a0);
        QuadratureRule {
            nodes: self.nodes.iter().map(|&x| a + (x - a0) * scale).collect(),
            weights: self.weights.iter().map(|&w| w * scale).collect(),
            interval: (a, b),
        }
    }
}

/// Legendre `P_n(x)` and its derivative via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Builds the `n`-point Gauss–Legendre rule on `[a, b]`.
///
/// Roots of `P_n` are found by Newton iteration from the Tricomi initial
/// guess; the positive half is computed and mirrored, so the rule is exactly
/// symmetric about the midpoint.
pub fn gauss_legendre_rule(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(invalid("quadrature needs at least one node"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!("quadrature interval [{a}, {b}] is empty")));
    }
    let nf = n as f64;
    let half = n / 2;
    // Roots on the reference interval: roots[i] > 0 for i < half.
    let mut pos = Vec::with_capacity(half);
    for i in 0..half {
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos() * (1.0 - (1.0 - 1.0 / nf) / (8.0 * nf * nf));
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(format!(
                "Legendre root {i} of degree {n} after {MAX_NEWTON} Newton steps"
            )));
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        pos.push((x, w));
    }

    let mid = 0.5 * (a + b);
    let rad = 0.5 * (b - a);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &pos {
        nodes.push(mid - rad * x);
        weights.push(rad * w);
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_with_derivative(n, 0.0);
        nodes.push(mid);
        weights.push(rad * 2.0 / (dp * dp));
    }
    for &(x, w) in pos.iter().rev() {
        nodes.push(mid + rad * x);
        weights.push(rad * w);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (a, b),
    })
}
