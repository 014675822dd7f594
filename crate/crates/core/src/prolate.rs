//! Reference eigenvalues of `S = P_I Q_J P_I` for two intervals.
//!
//! After rescaling both intervals to `[-1/2, 1/2]` the operator is the
//! integral operator with kernel `sin(cπ(u−v)) / (π(u−v))`. It is discretized
//! on Gauss–Legendre nodes with symmetric weights `√w_i K(u_i, u_j) √w_j`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{gauss_legendre_rule, symmetric_eigen, SymMatrix};

/// Eigenvalues with `1 − λ` or `λ` below this are at the double-precision floor.
pub const PRECISION_FLOOR: f64 = 1e-12;
const RANGE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct EigenSpectrum {
    pub c: f64,
    /// Non-increasing, clipped to `[0, 1]`.
    pub eigenvalues: Vec<f64>,
    pub node_count: usize,
    /// `|Σλ − c|` over the full discrete spectrum.
    pub trace_defect: f64,
}

impl EigenSpectrum {
    /// `λ_n(c)` with `n` counted from 1 (`λ_1` is the largest).
    pub fn lambda(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.eigenvalues.get(i).copied())
    }

    /// True when `λ_n` or `1 − λ_n` is below [`PRECISION_FLOOR`].
    pub fn is_at_floor(&self, n: usize) -> bool {
        match self.lambda(n) {
            Some(l) => l < PRECISION_FLOOR || 1.0 - l < PRECISION_FLOOR,
            None => true,
        }
    }
}

pub fn sinc_kernel_value(c: f64, u: f64, v: f64) -> f64 {
    let t = u - v;
    if t == 0.0 {
        c
    } else {
        (c * PI * t).sin() / (PI * t)
    }
}

/// Smallest accepted node count, about ten nodes per kernel oscillation.
pub fn min_nodes(c: f64) -> usize {
    ((20.0 * c).ceil() as usize).max(50)
}

pub fn default_nodes(c: f64) -> usize {
    ((20.0 * c).ceil() as usize).max(400)
}

/// Nyström spectrum of the sinc kernel; keeps the top `n_eigs` eigenvalues
/// (all of them when `n_eigs >= n_nodes`).
pub fn prolate_spectrum(c: f64, n_nodes: usize, n_eigs: usize) -> Result<EigenSpectrum> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!(
            "time-bandwidth product c = {c} must be positive"
        )));
    }
    let floor = min_nodes(c);
    if n_nodes < floor {
        return Err(Error::AliasingRisk {
            c,
            nodes: n_nodes,
            required: floor,
        });
    }
    let rule = gauss_legendre_rule(n_nodes, -0.5, 0.5)?;
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let rows: Vec<Vec<f64>> = (0..n_nodes)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| sw[i] * sinc_kernel_value(c, rule.nodes[i], rule.nodes[j]) * sw[j])
                .collect()
        })
        .collect();
    let m = SymMatrix::from_packed_lower(n_nodes, rows.concat())?;
    let eig = symmetric_eigen(&m, false)?;
    let mut all = eig.values;
    for v in all.iter_mut() {
        debug_assert!(*v >= -RANGE_SLACK && *v <= 1.0 + RANGE_SLACK, "eigenvalue {v}");
        *v = v.clamp(0.0, 1.0);
    }
    let trace_defect = (all.iter().sum::<f64>() - c).abs();
    all.truncate(n_eigs.min(n_nodes));
    Ok(EigenSpectrum {
        c,
        eigenvalues: all,
        node_count: n_nodes,
        trace_defect,
    })
}

/// All eigenvalues at the default node count.
pub fn default_spectrum(c: f64) -> Result<EigenSpectrum> {
    let n = default_nodes(c);
    prolate_spectrum(c, n, n)
}

/// Number of eigenvalues strictly inside `(eps, 1 − eps)`.
pub fn plunge_count(spec: &EigenSpectrum, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!(
            "plunge threshold eps = {eps} must lie in (0, 1/2)"
        )));
    }
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&l| l > eps && l < 1.0 - eps)
        .count())
}

pub fn trace_defect(spec: &EigenSpectrum) -> f64 {
    spec.trace_defect
}
