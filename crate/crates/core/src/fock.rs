//! Time-frequency shifted Hermite functions attached to a packing.
//!
//! Disk `m` with center `w_m` and radius `r_m` contributes the members
//! `f(x) = e^{2πiξ₀x} h_k(x − x₀)` for `0 ≤ k ≤ cπr_m²`, where
//! `x₀ + iξ₀ = √c·w_m`. Under the Bargmann transform
//!
//! ```text
//! B f(z) = 2^{1/4} ∫ f(t) e^{2πtz − πt² − (π/2)z²} dt
//! ```
//!
//! such a member is a unimodular multiple of the normalized monomial
//! `√(π^k/k!) z^k` displaced to `x₀ − iξ₀`. Only phase-invariant quantities
//! are used downstream, so that phase is never fixed.
//!
//! Gram entries come from displacement-operator matrix elements
//! (associated Laguerre polynomials) and are checked against direct
//! quadrature every time a Gram matrix is assembled.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::format::{sci, FLOOR};
use crate::numerics::{
    gauss_legendre_rule, hermite, symmetric_eigen, LogMagnitude, QuadratureRule, SymMatrix, LINEAR_FLOOR,
};
use crate::packing::Packing;

pub const MAX_GRAM_MEMBERS: usize = 2000;
/// Allowed disagreement between closed-form and quadrature Gram entries.
pub const CONVENTION_TOLERANCE: f64 = 1e-8;
const VALIDATION_SAMPLES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemMember {
    pub disk_index: usize,
    pub degree: usize,
    /// `√c·w_m`; real part is the time center, imaginary part the frequency center.
    pub center: Complex64,
    pub c: f64,
}

impl SystemMember {
    pub fn new(disk_index: usize, degree: usize, center: Complex64, c: f64) -> Self {
        Self {
            disk_index,
            degree,
            center,
            c,
        }
    }

    pub fn x0(&self) -> f64 {
        self.center.re
    }

    pub fn xi0(&self) -> f64 {
        self.center.im
    }

    /// Point around which `|B f|` is concentrated.
    pub fn fock_center(&self) -> Complex64 {
        self.center.conj()
    }
}

#[derive(Debug)]
pub struct SystemSpec {
    pub packing: Packing,
    pub c: f64,
    pub members: Vec<SystemMember>,
    gram: OnceLock<HermitianMatrix>,
}

impl SystemSpec {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest degree used by any member.
    pub fn max_degree(&self) -> usize {
        self.members.iter().map(|s| s.degree).max().unwrap_or(0)
    }

    /// Gram matrix, assembled and validated on first use.
    pub fn gram(&self) -> Result<&HermitianMatrix> {
        if let Some(g) = self.gram.get() {
            return Ok(g);
        }
        let g = gram_matrix(&self.members)?;
        Ok(self.gram.get_or_init(|| g))
    }
}

/// Largest `k` with `k ≤ cπr²`.
pub fn max_degree_for(c: f64, r: f64) -> usize {
    (c * PI * r * r).floor() as usize
}

pub fn build_system(p: &Packing, c: f64) -> Result<SystemSpec> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!(
            "time-bandwidth product c = {c} must be positive"
        )));
    }
    let sc = c.sqrt();
    let members = p
        .disks
        .iter()
        .enumerate()
        .flat_map(|(m, d)| {
            let center = Complex64::new(sc * d.x, sc * d.y);
            (0..=max_degree_for(c, d.r)).map(move |k| SystemMember::new(m, k, center, c))
        })
        .collect();
    Ok(SystemSpec {
        packing: p.clone(),
        c,
        members,
        gram: OnceLock::new(),
    })
}

fn modulation(xi: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * xi * x)
}

/// `e^{2πiξ₀x} h_k(x − x₀)`.
pub fn eval_member(s: &SystemMember, x: f64) -> Complex64 {
    modulation(s.xi0(), x) * hermite(s.degree, x - s.x0())
}

/// `(−i)^k`.
fn minus_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `f̂(ξ) = ∫ f(x) e^{−2πixξ} dx = e^{−2πix₀(ξ−ξ₀)} (−i)^k h_k(ξ − ξ₀)`.
pub fn eval_member_fourier(s: &SystemMember, xi: f64) -> Complex64 {
    let t = xi - s.xi0();
    modulation(-s.x0(), t) * minus_i_pow(s.degree) * hermite(s.degree, t)
}

/// Samples of a member at every node of `rule`.
pub fn member_on_rule(s: &SystemMember, rule: &QuadratureRule) -> Vec<Complex64> {
    rule.nodes.iter().map(|&x| eval_member(s, x)).collect()
}

/// Samples of `f̂` at every node of `rule`.
pub fn member_fourier_on_rule(s: &SystemMember, rule: &QuadratureRule) -> Vec<Complex64> {
    rule.nodes.iter().map(|&xi| eval_member_fourier(s, xi)).collect()
}

/// Dense complex Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Fills the lower triangle from `f(i, j)` with `j ≤ i` and mirrors it.
    /// Diagonal entries keep only their real part.
    pub fn from_lower<F: Fn(usize, usize) -> Complex64 + Sync>(dim: usize, f: F) -> Self {
        let rows: Vec<Vec<Complex64>> = (0..dim)
            .into_par_iter()
            .map(|i| (0..=i).map(|j| f(i, j)).collect())
            .collect();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                if i == j {
                    data[i * dim + i] = Complex64::new(v.re, 0.0);
                } else {
                    data[i * dim + j] = v;
                    data[j * dim + i] = v.conj();
                }
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|i| (0..=i).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn max_off_diagonal_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim != other.dim {
            return Err(invalid(format!(
                "dimension mismatch {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Principal submatrix on `idx`.
    pub fn select(&self, idx: &[usize]) -> HermitianMatrix {
        let dim = idx.len();
        let mut data = Vec::with_capacity(dim * dim);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self { dim, data }
    }

    /// Real symmetric `[[X, −Y], [Y, X]]` for `M = X + iY`. Its spectrum is
    /// that of `M` with every eigenvalue doubled in multiplicity.
    pub fn to_real_embedding(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.get(i, j).re,
            (false, true) => self.get(i - n, j).im,
            _ => self.get(i - n, j - n).re,
        })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = symmetric_eigen(&self.to_real_embedding(), false)?;
        Ok(*e.values.last().expect("nonempty"))
    }
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `L_n^{(a)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = 1.0 + a - x;
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0 + a - x) * p1 - (jf + a) * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `⟨m| D(α) |n⟩` as `(ln |·|, unit phase)`; `ln |·| = −∞` for an exact zero.
fn displacement_element(m: usize, n: usize, alpha: Complex64) -> (f64, Complex64) {
    let x = alpha.norm_sqr();
    let (lo, hi) = (m.min(n), m.max(n));
    let d = hi - lo;
    let one = Complex64::new(1.0, 0.0);
    if d > 0 && x == 0.0 {
        return (f64::NEG_INFINITY, one);
    }
    let lag = laguerre(lo, d as f64, x);
    if lag == 0.0 {
        return (f64::NEG_INFINITY, one);
    }
    let mut log_abs = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) - 0.5 * x + lag.abs().ln();
    let mut phase = Complex64::new(lag.signum(), 0.0);
    if d > 0 {
        log_abs += 0.5 * d as f64 * x.ln();
        let base = if m >= n { alpha } else { -alpha.conj() };
        phase *= (base / base.norm()).powu(d as u32);
    }
    (log_abs, phase)
}

/// `(ln |⟨f_i, f_j⟩|, unit phase)` in closed form.
fn gram_entry_parts(si: &SystemMember, sj: &SystemMember) -> (f64, Complex64) {
    if si.center == sj.center {
        return if si.degree == sj.degree {
            (0.0, Complex64::new(1.0, 0.0))
        } else {
            (f64::NEG_INFINITY, Complex64::new(1.0, 0.0))
        };
    }
    let delta = si.center - sj.center;
    let alpha = delta * PI.sqrt();
    let (log_abs, phase) = displacement_element(sj.degree, si.degree, alpha);
    let carrier = Complex64::from_polar(1.0, PI * delta.im * (2.0 * sj.x0() + delta.re));
    (log_abs, carrier * phase)
}

/// `⟨f_i, f_j⟩ = ∫ f_i f̄_j` in closed form.
pub fn gram_entry_closed(si: &SystemMember, sj: &SystemMember) -> Complex64 {
    let (log_abs, phase) = gram_entry_parts(si, sj);
    phase * log_abs.exp()
}

/// `|⟨f_i, f_j⟩|` in the log domain, meaningful far below the linear floor.
pub fn gram_entry_log_abs(si: &SystemMember, sj: &SystemMember) -> LogMagnitude {
    LogMagnitude::from_log(gram_entry_parts(si, sj).0)
}

/// Truncated-line rule wide enough for every member with centers in the
/// `√c`-square and degrees up to `max_degree`.
pub fn oracle_rule(c: f64, max_degree: usize) -> Result<QuadratureRule> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!(
            "time-bandwidth product c = {c} must be positive"
        )));
    }
    let turning = ((2.0 * max_degree as f64 + 1.0) / (2.0 * PI)).sqrt();
    let half = 0.5 * c.sqrt() + turning + 6.0;
    let nodes = (8.0 * half * (c.sqrt() + 2.0 * turning + 1.0)).ceil() as usize + 200;
    gauss_legendre_rule(nodes, -half, half)
}

/// `∫ f_i f̄_j` by direct quadrature.
pub fn gram_entry_oracle(si: &SystemMember, sj: &SystemMember, rule: &QuadratureRule) -> Complex64 {
    rule.integrate_complex(|x| eval_member(si, x) * eval_member(sj, x).conj())
}

/// Deterministic spread of pairs `j < i`: the top-degree corner plus a stride walk.
fn validation_pairs(n: usize) -> Vec<(usize, usize)> {
    let total = n * (n - 1) / 2;
    if total <= VALIDATION_SAMPLES {
        return (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    }
    let step = (total / VALIDATION_SAMPLES).max(1);
    (0..VALIDATION_SAMPLES)
        .map(|s| {
            let t = (s * step + s * s) % total;
            let i = ((((8 * t + 1) as f64).sqrt() - 1.0) / 2.0).floor() as usize + 1;
            let i = i.min(n - 1);
            (i, t - i * (i - 1) / 2)
        })
        .filter(|&(i, j)| j < i)
        .collect()
}

/// Gram matrix of `members`, after checking sampled closed-form entries
/// against quadrature.
pub fn gram_matrix(members: &[SystemMember]) -> Result<HermitianMatrix> {
    let n = members.len();
    if n == 0 || n > MAX_GRAM_MEMBERS {
        return Err(invalid(format!(
            "Gram matrix needs 1..={MAX_GRAM_MEMBERS} members, got {n}"
        )));
    }
    let c = members.iter().map(|s| s.c).fold(0.0, f64::max);
    let max_degree = members.iter().map(|s| s.degree).max().unwrap_or(0);
    let rule = oracle_rule(c, max_degree)?;
    let mut pairs = validation_pairs(n.max(1));
    if n > 1 {
        let top = (0..n).max_by_key(|&i| members[i].degree).unwrap_or(0);
        pairs.push(if top == 0 { (1, 0) } else { (top, top - 1) });
    }
    let worst = pairs
        .par_iter()
        .map(|&(i, j)| {
            let err = (gram_entry_closed(&members[i], &members[j])
                - gram_entry_oracle(&members[i], &members[j], &rule))
            .norm();
            (err, i, j)
        })
        .reduce(|| (0.0, 0, 0), |a, b| if b.0 > a.0 { b } else { a });
    if worst.0 > CONVENTION_TOLERANCE {
        return Err(Error::ConventionMismatch {
            row: worst.1,
            col: worst.2,
            error: worst.0,
        });
    }
    Ok(HermitianMatrix::from_lower(n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            gram_entry_closed(&members[i], &members[j])
        }
    }))
}

/// CSV `row,col,log10_abs` over the upper triangle; magnitudes below the
/// linear floor are written as `floor`.
pub fn gram_csv(g: &HermitianMatrix) -> String {
    let mut out = String::from("row,col,log10_abs\n");
    for i in 0..g.dim() {
        for j in i..g.dim() {
            let a = g.get(i, j).norm();
            let cell = if a < LINEAR_FLOOR {
                FLOOR.to_string()
            } else {
                sci(a.log10())
            };
            let _ = writeln!(out, "{i},{j},{cell}");
        }
    }
    out
}

/// `2^{1/4} ∫ f(t) e^{2πtz − πt² − (π/2)z²} dt` over `rule`.
pub fn bargmann_numeric<F: Fn(f64) -> Complex64>(f: F, z: Complex64, rule: &QuadratureRule) -> Complex64 {
    let norm = 2f64.powf(0.25);
    let zz = z * z * (0.5 * PI);
    rule.integrate_complex(|t| {
        let e = z * (2.0 * PI * t) - PI * t * t - zz;
        f(t) * e.exp()
    }) * norm
}

pub fn bargmann_member(s: &SystemMember, z: Complex64, rule: &QuadratureRule) -> Complex64 {
    bargmann_numeric(|t| eval_member(s, t), z, rule)
}

/// `√(π^k/k!) z^k`, the Bargmann image of `h_k`.
pub fn normalized_monomial(k: usize, z: Complex64) -> Complex64 {
    let scale = (0.5 * (k as f64 * PI.ln() - ln_factorial(k))).exp();
    z.powu(k as u32) * scale
}

/// `∫_{|z|<R} |F(z)|² e^{−π|z|²} dA` on a polar product rule
/// (Gauss–Legendre in the radius, trapezoid in the angle).
pub fn fock_norm_sq<F: Fn(Complex64) -> Complex64 + Sync>(
    f: F,
    radius: f64,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<f64> {
    if !(radius > 0.0) || angular_nodes == 0 {
        return Err(invalid(
            "Fock quadrature needs a positive radius and angular nodes",
        ));
    }
    let rule = gauss_legendre_rule(radial_nodes, 0.0, radius)?;
    let dtheta = 2.0 * PI / angular_nodes as f64;
    let total: f64 = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| {
            let ring: f64 = (0..angular_nodes)
                .map(|a| f(Complex64::from_polar(r, a as f64 * dtheta)).norm_sqr())
                .sum();
            w * r * (-PI * r * r).exp() * ring * dtheta
        })
        .sum();
    Ok(total)
}

/// `∫_a^∞ |h_0|²`, the one-sided Gaussian tail.
pub fn gaussian_tail_mass(a: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(SQRT_2 * PI.sqrt() * a)
}
