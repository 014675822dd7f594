//! Explicit constants of the almost-orthogonality argument and the
//! classical reference estimates for `λ_n(c)`.
//!
//! Exponentially small quantities are returned as [`LogMagnitude`].

use std::f64::consts::{E, PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::fock::SystemMember;
use crate::numerics::{gauss_legendre_rule, LogMagnitude, QuadratureRule};
use crate::packing::Packing;

/// Nodes per axis for the degree profiles of [`member_residual_bound`].
const PROFILE_NODES: usize = 240;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskConstants {
    pub r: f64,
    pub u: f64,
    pub beta: f64,
    pub nu: f64,
    pub c_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateConstants {
    pub gamma: f64,
    pub r_min: f64,
    pub per_disk: Vec<DiskConstants>,
    pub nu0: f64,
    pub c_eps: f64,
    pub c_gauss: f64,
    /// Lower end `ν₀^{π r_min² / 2}` of the admissible range for `alpha`.
    pub alpha_floor: f64,
    pub alpha: f64,
}

impl CertificateConstants {
    /// `ν₀^{π r_min² / 2} < α < 1`.
    pub fn alpha_admissible(&self) -> bool {
        self.alpha > self.alpha_floor && self.alpha < 1.0
    }

    /// Same constants with a caller-chosen `alpha`.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// `ln ν₀ · π r_min² / 2`, the per-unit-c exponent of the pair term.
    fn pair_exponent(&self) -> f64 {
        self.nu0.ln() * PI * self.r_min * self.r_min / 2.0
    }
}

fn disk_constants(r: f64, gamma: f64) -> DiskConstants {
    let t = 1.0 + gamma / (2.0 * r);
    let u = t * t - 1.0;
    // exp((π/2)(1/t² − 1)) and 1 − that, kept accurate for t near 1.
    let log_beta = 0.5 * PI * (1.0 / (t * t) - 1.0);
    let nu = (u.ln_1p() - u).exp();
    DiskConstants {
        r,
        u,
        beta: log_beta.exp(),
        nu,
        c_n: -1.0 / log_beta.exp_m1(),
    }
}

/// The proof's constants for `p`, with `alpha` at the midpoint of its range.
pub fn certificate_constants(p: &Packing) -> Result<CertificateConstants> {
    if !(p.gamma > 0.0) {
        return Err(invalid(format!(
            "packing separation gamma = {} must be positive",
            p.gamma
        )));
    }
    let per_disk: Vec<DiskConstants> = p.disks.iter().map(|d| disk_constants(d.r, p.gamma)).collect();
    let nu0 = per_disk.iter().map(|d| d.nu).fold(0.0, f64::max);
    let c_eps = per_disk.iter().map(|d| d.c_n).fold(0.0, f64::max);
    let r_min = p.r_min();
    let log_floor = nu0.ln() * PI * r_min * r_min / 2.0;
    let alpha_floor = log_floor.exp();
    // Midpoint of (floor, 1), computed as 1 − (1 − floor)/2.
    let alpha = 1.0 + 0.5 * log_floor.exp_m1();
    Ok(CertificateConstants {
        gamma: p.gamma,
        r_min,
        per_disk,
        nu0,
        c_eps,
        c_gauss: 1.0 / (1.0 - (-2.0 * PI).exp()),
        alpha_floor,
        alpha,
    })
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "time-bandwidth product c = {c} must be positive"
        )))
    }
}

/// `c_ε π ν₀^{cπr²/2}`: one side of the cross-disk estimate.
fn half_pair_term(k: &CertificateConstants, c: f64) -> LogMagnitude {
    LogMagnitude::from_log((k.c_eps * PI).ln() + c * k.pair_exponent())
}

/// `2 c_ε π ν₀^{cπr²/2}`, bounding every cross-disk `|⟨f, g⟩|`.
pub fn proposition_pair_bound(k: &CertificateConstants, c: f64) -> Result<LogMagnitude> {
    check_c(c)?;
    Ok(half_pair_term(k, c) * LogMagnitude::from_f64(2.0))
}

/// Bound on `‖(Id − P_I) f‖` (and, by rotation, `‖(Id − Q_J) f‖`) for
/// every member: `√2 · (c_ε π ν₀^{cπr²/2} + c √(C_gauss √2) e^{−πγ²c/4})`.
/// The bracket bounds the mass beyond one endpoint of `I`; `√2` combines
/// the two endpoints.
pub fn proposition_tail_bound(k: &CertificateConstants, c: f64) -> Result<LogMagnitude> {
    check_c(c)?;
    let gauss =
        LogMagnitude::from_log(c.ln() + 0.5 * (k.c_gauss * SQRT_2).ln() - PI * k.gamma * k.gamma * c / 4.0);
    Ok((half_pair_term(k, c) + gauss) * LogMagnitude::from_f64(SQRT_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MainBound {
    /// `1 − 3√(2c) α^c`.
    Valid { value: f64, alpha_pow_c: f64 },
    /// `α^c ≥ 1/(2c)`: the crude Gram estimate does not yet apply.
    NotYetValid { alpha_pow_c: f64, threshold: f64 },
    /// `α` outside `(ν₀^{πr²/2}, 1)`, so it is not the proof's `α`.
    InadmissibleAlpha { alpha: f64, alpha_floor: f64 },
}

impl MainBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            MainBound::Valid { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Every explicit threshold the argument needs at this `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremGates {
    pub log_alpha_pow_c: f64,
    /// `α^c < 1/(2c)`.
    pub crude_gram: bool,
    /// Pair bound `≤ α^c`.
    pub pair: bool,
    /// Tail bound `≤ α^c`.
    pub tail: bool,
    /// `n ≤ c`.
    pub n_within_c: bool,
}

impl TheoremGates {
    pub fn all(&self) -> bool {
        self.crude_gram && self.pair && self.tail && self.n_within_c
    }
}

pub fn theorem_gates(k: &CertificateConstants, c: f64, n: usize) -> Result<TheoremGates> {
    check_c(c)?;
    let log_ac = c * k.alpha.ln();
    let ac = LogMagnitude::from_log(log_ac);
    Ok(TheoremGates {
        log_alpha_pow_c: log_ac,
        crude_gram: log_ac < -(2.0 * c).ln(),
        pair: proposition_pair_bound(k, c)?.cmp_magnitude(&ac).is_le(),
        tail: proposition_tail_bound(k, c)?.cmp_magnitude(&ac).is_le(),
        n_within_c: n as f64 <= c,
    })
}

/// `1 − 3√(2c) α^c` once `α^c < 1/(2c)`; a status otherwise.
pub fn main_lower_bound(k: &CertificateConstants, c: f64, n: usize, system_size: usize) -> Result<MainBound> {
    check_c(c)?;
    if n == 0 || n > system_size {
        return Err(invalid(format!(
            "n = {n} must lie in 1..={system_size} (system size)"
        )));
    }
    let log_ac = c * k.alpha.ln();
    let alpha_pow_c = log_ac.exp();
    let threshold = 1.0 / (2.0 * c);
    if !(log_ac < threshold.ln()) {
        return Ok(MainBound::NotYetValid {
            alpha_pow_c,
            threshold,
        });
    }
    if !k.alpha_admissible() {
        return Ok(MainBound::InadmissibleAlpha {
            alpha: k.alpha,
            alpha_floor: k.alpha_floor,
        });
    }
    Ok(MainBound::Valid {
        value: 1.0 - 3.0 * (2.0 * c).sqrt() * alpha_pow_c,
        alpha_pow_c,
    })
}

/// `n(c, b) = ⌊c + b ln c / π²⌋` and the limit `1/(1 + e^b)` of `λ_{n(c,b)}(c)`.
pub fn landau_widom(c: f64, b: f64) -> Result<(usize, f64)> {
    if !(c > 1.0) || !c.is_finite() || !b.is_finite() {
        return Err(invalid(format!("need c > 1 and finite b, got c = {c}, b = {b}")));
    }
    let n = (c + b * c.ln() / (PI * PI)).floor().max(0.0) as usize;
    Ok((n, 1.0 / (1.0 + b.exp())))
}

/// `(2/π²) ln(50c + 25) ln(5/(ε(1−ε))) + 7`, bounding the number of
/// eigenvalues in `(ε, 1 − ε)`.
pub fn karnik_plunge_bound(c: f64, eps: f64) -> Result<f64> {
    check_c(c)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    Ok(2.0 / (PI * PI) * (50.0 * c + 25.0).ln() * (5.0 / (eps * (1.0 - eps))).ln() + 7.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalAsymptotics {
    /// `1 − (πc)^n/n! · e^{−πc/2}`, a lower bound for the `(n+1)`-th largest
    /// eigenvalue (the formula counts from 0). Reported even when `≤ 0`.
    pub bjk_lower: f64,
    /// Fuchs' `1 − λ_n` for fixed `n ≥ 1` as `c → ∞`; `None` for `n = 0`.
    pub fuchs_gap: Option<f64>,
    pub log_fuchs_gap: Option<f64>,
    /// Widom's `(eπc/(8n+4))^{2n+1}`, the `(n+1)`-th eigenvalue as `n → ∞`.
    pub widom_decay: f64,
    pub log_widom_decay: f64,
}

pub fn classical_asymptotics(c: f64, n: usize) -> Result<ClassicalAsymptotics> {
    check_c(c)?;
    let nf = n as f64;
    let log_bjk = nf * (PI * c).ln() - ln_gamma(nf + 1.0) - PI * c / 2.0;
    let log_fuchs = (n >= 1).then(|| {
        (PI.sqrt() / 2.0).ln() + nf * 8f64.ln() - ln_gamma(nf) + (nf - 0.5) * (PI * c / 2.0).ln() - PI * c
    });
    let log_widom = (2.0 * nf + 1.0) * (E * PI * c / (8.0 * nf + 4.0)).ln();
    Ok(ClassicalAsymptotics {
        bjk_lower: -log_bjk.exp_m1(),
        fuchs_gap: log_fuchs.map(f64::exp),
        log_fuchs_gap: log_fuchs,
        widom_decay: log_widom.exp(),
        log_widom_decay: log_widom,
    })
}

/// Smallest `n` whose BJK bound is vacuous.
pub fn bjk_vacuity_threshold(c: f64) -> Result<usize> {
    check_c(c)?;
    let mut n = 0;
    while classical_asymptotics(c, n)?.bjk_lower > 0.0 {
        n += 1;
    }
    Ok(n)
}

/// Per-member analytic bounds on the three residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberBound {
    /// Bound on `‖(Id − P_I) f‖`.
    pub time: f64,
    /// Bound on `‖(Id − Q_J) f‖`.
    pub frequency: f64,
    /// `min(1, 2·time + frequency)`, bounding `‖(Id − P_I Q_J P_I) f‖`.
    pub localization: f64,
}

/// Marginal `P_k(x) = ∫ p_k(√(x² + y²)) dy` of the displaced-monomial
/// profile `p_k(r) = √(π^k/k!) r^k e^{−πr²/2}`, sampled on a rule in `x`.
struct DegreeProfile {
    rule: QuadratureRule,
    marginal: Vec<f64>,
}

fn degree_profile(k: usize) -> DegreeProfile {
    let kf = k as f64;
    let reach = (kf / PI).sqrt() + 7.0;
    let log_norm = 0.5 * (kf * PI.ln() - ln_gamma(kf + 1.0));
    let profile = |r: f64| {
        if r == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        (log_norm + kf * r.ln() - 0.5 * PI * r * r).exp()
    };
    let rule = gauss_legendre_rule(PROFILE_NODES, -reach, reach).expect("positive node count");
    let half = gauss_legendre_rule(PROFILE_NODES, 0.0, reach).expect("positive node count");
    let marginal = rule
        .nodes
        .iter()
        .map(|&x| 2.0 * half.integrate(|y| profile(x.hypot(y))))
        .collect();
    DegreeProfile { rule, marginal }
}

/// Bound on the mass beyond an edge at distance `d` from the center:
/// `∫ |F| e^{−π|z|²/2} · (erfc(√(2π)(d − Re(z−v)))/2)^{1/2} dA`, where the
/// second factor is the pointwise bound for any `G = B g` with `g` supported
/// beyond the edge.
fn one_sided_bound(p: &DegreeProfile, d: f64) -> f64 {
    let s = (2.0 * PI).sqrt();
    p.rule
        .nodes
        .iter()
        .zip(&p.rule.weights)
        .zip(&p.marginal)
        .map(|((&x, &w), &m)| w * m * (0.5 * erfc(s * (d - x))).sqrt())
        .sum::<f64>()
        .min(1.0)
}

fn two_sided_bound(p: &DegreeProfile, center: f64, half: f64) -> f64 {
    one_sided_bound(p, half - center)
        .hypot(one_sided_bound(p, half + center))
        .min(1.0)
}

fn bound_with(p: &DegreeProfile, s: &SystemMember) -> MemberBound {
    let half = 0.5 * s.c.sqrt();
    let time = two_sided_bound(p, s.x0(), half);
    let frequency = two_sided_bound(p, s.xi0(), half);
    MemberBound {
        time,
        frequency,
        localization: (2.0 * time + frequency).min(1.0),
    }
}

/// Analytic residual bounds for one member on `I = J = [−√c/2, √c/2]`.
pub fn member_residual_bound(s: &SystemMember) -> MemberBound {
    bound_with(&degree_profile(s.degree), s)
}

/// [`member_residual_bound`] for many members, sharing work across degrees.
pub fn member_residual_bounds(members: &[SystemMember]) -> Vec<MemberBound> {
    let max_k = members.iter().map(|s| s.degree).max().unwrap_or(0);
    let mut used = vec![false; max_k + 1];
    for s in members {
        used[s.degree] = true;
    }
    let profiles: Vec<Option<DegreeProfile>> = (0..=max_k)
        .into_par_iter()
        .map(|k| used[k].then(|| degree_profile(k)))
        .collect();
    members
        .par_iter()
        .map(|s| bound_with(profiles[s.degree].as_ref().expect("profile built"), s))
        .collect()
}
