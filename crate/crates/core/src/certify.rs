//! Numerical min-max certificate for `λ_n(c)` with `n = ⌊(1−ε)c⌋`.
//!
//! With `I = J = [−√c/2, √c/2]`, a packing gives the shifted Hermite system,
//! `n` of its members span a trial space `V`, and
//!
//! ```text
//! λ_n(c) ≥ min_{f ∈ V} ⟨S f, f⟩ / ‖f‖²,   S = P_I Q_J P_I,
//! ```
//!
//! which is the smallest eigenvalue of the pencil `(A, B)` with
//! `A_ij = ⟨S f_i, f_j⟩` and Gram matrix `B`. The report sets this next to
//! the analytic bound and the Nyström value.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    certificate_constants, main_lower_bound, member_residual_bounds, proposition_pair_bound,
    proposition_tail_bound, theorem_gates, MainBound, MemberBound, TheoremGates,
};
use crate::error::{invalid, Error, Result};
use crate::fock::{build_system, eval_member, gram_matrix, HermitianMatrix, SystemMember};
use crate::format::sci;
use crate::numerics::{gauss_legendre_rule, hermite, pencil_eigen_min, QuadratureRule};
use crate::packing::{paper_packing, DEFAULT_N_CAP};
use crate::prolate::{default_nodes, prolate_spectrum};

/// Nodes per unit of `c` below which a rule on `I` is refused.
pub const MIN_NODES_PER_C: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    /// `‖(Id − P_I) f‖`.
    pub time: f64,
    /// `‖(Id − Q_J) f‖`.
    pub frequency: f64,
    /// `‖(Id − P_I Q_J P_I) f‖`.
    pub localization: f64,
}

fn half_width(c: f64) -> f64 {
    0.5 * c.sqrt()
}

/// Gauss–Legendre rule on `I = [−√c/2, √c/2]` fine enough for members up to
/// degree `max_degree`.
pub fn interval_rule(c: f64, max_degree: usize) -> Result<QuadratureRule> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!(
            "time-bandwidth product c = {c} must be positive"
        )));
    }
    let n = (16.0 * c).ceil() as usize + 8 * max_degree + 200;
    let h = half_width(c);
    gauss_legendre_rule(n, -h, h)
}

fn check_rule(c: f64, rule: &QuadratureRule) -> Result<()> {
    let required = (MIN_NODES_PER_C * c).ceil() as usize;
    if rule.len() < required {
        return Err(Error::CoarseRule {
            nodes: rule.len(),
            required,
        });
    }
    let h = half_width(c);
    let (a, b) = rule.interval;
    if (a + h).abs() > 1e-12 * h.max(1.0) || (b - h).abs() > 1e-12 * h.max(1.0) {
        return Err(invalid(format!("rule spans [{a}, {b}], expected [−{h}, {h}]")));
    }
    Ok(())
}

/// `∫_{|x| > h} h_k(x − center)² dx`, integrated directly on both tails.
fn tail_mass(k: usize, center: f64, h: f64) -> Result<f64> {
    let turning = ((2.0 * k as f64 + 1.0) / (2.0 * PI)).sqrt();
    let side = |offset: f64| -> Result<f64> {
        let width = (offset - h).max(0.0) + turning + 10.0;
        let nodes = (40.0 * width).ceil() as usize + 4 * k + 100;
        let rule = gauss_legendre_rule(nodes, h, h + width)?;
        Ok(rule.integrate(|x| hermite(k, x - offset).powi(2)))
    };
    Ok(side(center)? + side(-center)?)
}

/// Samples of `f` on the nodes of `rule` and of `g(ξ) = ∫_I f(x) e^{−2πixξ} dx`
/// on the same nodes read as points of `J`.
struct Localized {
    f: Vec<Complex64>,
    g: Vec<Complex64>,
}

/// `e^{−2πi x_p ξ_q}` on the product of the nodes.
fn kernel(rule: &QuadratureRule) -> Vec<Complex64> {
    let n = rule.len();
    let mut k = Vec::with_capacity(n * n);
    for &x in &rule.nodes {
        for &xi in &rule.nodes {
            k.push(Complex64::from_polar(1.0, -2.0 * PI * x * xi));
        }
    }
    k
}

fn localize(s: &SystemMember, rule: &QuadratureRule, kern: &[Complex64]) -> Localized {
    let n = rule.len();
    let f: Vec<Complex64> = rule.nodes.iter().map(|&x| eval_member(s, x)).collect();
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    for (p, (&fp, &wp)) in f.iter().zip(&rule.weights).enumerate() {
        let a = fp * wp;
        let row = &kern[p * n..(p + 1) * n];
        for (gq, &e) in g.iter_mut().zip(row) {
            *gq += a * e;
        }
    }
    Localized { f, g }
}

/// `∫_I |f − Q_J P_I f|²`.
fn interior_defect(loc: &Localized, rule: &QuadratureRule, kern: &[Complex64]) -> f64 {
    let n = rule.len();
    let wg: Vec<Complex64> = loc.g.iter().zip(&rule.weights).map(|(g, &w)| g * w).collect();
    (0..n)
        .map(|r| {
            let row = &kern[r * n..(r + 1) * n];
            let qp: Complex64 = wg.iter().zip(row).map(|(a, e)| a * e.conj()).sum();
            rule.weights[r] * (loc.f[r] - qp).norm_sqr()
        })
        .sum()
}

fn residuals_with(
    s: &SystemMember,
    c: f64,
    rule: &QuadratureRule,
    kern: &[Complex64],
) -> Result<(ResidualNorms, Localized)> {
    let h = half_width(c);
    let t2 = tail_mass(s.degree, s.x0(), h)?;
    let f2 = tail_mass(s.degree, s.xi0(), h)?;
    let loc = localize(s, rule, kern);
    let s2 = t2 + interior_defect(&loc, rule, kern);
    Ok((
        ResidualNorms {
            time: t2.sqrt(),
            frequency: f2.sqrt(),
            localization: s2.sqrt(),
        },
        loc,
    ))
}

/// Residual norms of one member. Uses `‖(Id − S) f‖² = ‖(Id − P_I) f‖² +
/// ∫_I |f − Q_J P_I f|²`, both tails integrated directly.
pub fn residual_norms(s: &SystemMember, c: f64, rule: &QuadratureRule) -> Result<ResidualNorms> {
    check_rule(c, rule)?;
    let kern = kernel(rule);
    Ok(residuals_with(s, c, rule, &kern)?.0)
}

fn localized_from(samples: &[Localized], rule: &QuadratureRule) -> HermitianMatrix {
    HermitianMatrix::from_lower(samples.len(), |i, j| {
        samples[i]
            .g
            .iter()
            .zip(&samples[j].g)
            .zip(&rule.weights)
            .map(|((a, b), &w)| a * b.conj() * w)
            .sum()
    })
}

/// `A_ij = ⟨S f_i, f_j⟩ = ∫_J g_i conj(g_j)`.
pub fn localized_gram(members: &[SystemMember], c: f64, rule: &QuadratureRule) -> Result<HermitianMatrix> {
    if members.is_empty() {
        return Err(invalid("localized Gram needs at least one member"));
    }
    check_rule(c, rule)?;
    let kern = kernel(rule);
    let samples: Vec<Localized> = members.par_iter().map(|s| localize(s, rule, &kern)).collect();
    Ok(localized_from(&samples, rule))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Smallest analytic localization bound first; members whose bound is
    /// vacuous keep packing order.
    TailBound,
    /// Packing order `(disk, degree)`.
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub c: f64,
    pub eps: f64,
    /// Packing rounds; `None` picks the fewest rounds whose guaranteed
    /// coverage `1 − 2^{−rounds}` reaches `1 − eps`.
    pub rounds: Option<usize>,
    pub n_cap: usize,
    pub selection: Selection,
    /// Nodes on `I`; `None` uses [`interval_rule`].
    pub nodes: Option<usize>,
    /// Nyström nodes; `None` uses the default for `c`.
    pub nystrom_nodes: Option<usize>,
}

impl CertifyOptions {
    pub fn new(c: f64, eps: f64) -> Self {
        Self {
            c,
            eps,
            rounds: None,
            n_cap: DEFAULT_N_CAP,
            selection: Selection::TailBound,
            nodes: None,
            nystrom_nodes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub disk_index: usize,
    pub degree: usize,
    pub x0: f64,
    pub xi0: f64,
    pub numeric: ResidualNorms,
    pub analytic: MemberBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramExtremes {
    pub max_off_diagonal: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HealthChecks {
    pub localized_min_eigenvalue: f64,
    /// Smallest eigenvalue of `B − A`; nonnegative because `S ≤ Id`.
    pub defect_min_eigenvalue: f64,
    /// `min eig B ≥ 1 − n·max|B_ij| − 1e−10`.
    pub gershgorin: bool,
    /// `1 − 2·max ‖(Id − S) f_k‖·√(2c)`, present when `min eig B ≥ 1/2`.
    pub numeric_chain_lower: Option<f64>,
    /// Per-member chain `‖(Id−S)f‖ ≤ ‖(Id−Q_J)f‖ + 2‖(Id−P_I)f‖`.
    pub residual_chain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticSummary {
    pub alpha: f64,
    pub alpha_floor: f64,
    pub nu0: f64,
    pub c_eps: f64,
    pub log_pair_bound: f64,
    pub log_tail_bound: f64,
    pub bound: MainBound,
    pub gates: TheoremGates,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub c: f64,
    pub eps: f64,
    pub n: usize,
    pub rounds: usize,
    pub coverage: f64,
    pub gamma: f64,
    pub disks: usize,
    pub system_size: usize,
    pub selection: Selection,
    pub quadrature_nodes: usize,
    pub members: Vec<SystemMember>,
    pub residual_table: Vec<ResidualRow>,
    pub rayleigh_lower: f64,
    pub analytic_lower: AnalyticSummary,
    pub nystrom_reference: f64,
    pub nystrom_nodes: usize,
    /// `nystrom_reference − rayleigh_lower`.
    pub gap: f64,
    pub gram_extremes: GramExtremes,
    pub health: HealthChecks,
}

pub const CSV_HEADER: &str =
    "c,eps,n,rayleigh_lower,analytic_status,analytic_lower,nystrom_reference,gap,gram_min_eigenvalue";

impl CertificateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One summary row matching [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let (status, value) = match self.analytic_lower.bound {
            MainBound::Valid { value, .. } => ("valid", sci(value)),
            MainBound::NotYetValid { .. } => ("not_yet_valid", String::new()),
            MainBound::InadmissibleAlpha { .. } => ("inadmissible_alpha", String::new()),
        };
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            sci(self.c),
            sci(self.eps),
            self.n,
            sci(self.rayleigh_lower),
            status,
            value,
            sci(self.nystrom_reference),
            sci(self.gap),
            sci(self.gram_extremes.min_eigenvalue)
        );
        s
    }
}

/// Certificate with default options and the given number of packing rounds.
pub fn certify_lower_bound(c: f64, eps: f64, rounds: usize) -> Result<CertificateReport> {
    let mut opts = CertifyOptions::new(c, eps);
    opts.rounds = Some(rounds);
    certify_with(&opts)
}

/// Smallest round count whose packing covers at least `1 − eps`.
pub fn default_rounds(eps: f64) -> usize {
    // 1 − 2^{−r} ≥ 1 − eps  ⇔  r ≥ log2(1/eps).
    ((1.0 / eps).log2().ceil() as usize).max(1)
}

pub fn certify_with(opts: &CertifyOptions) -> Result<CertificateReport> {
    let CertifyOptions { c, eps, .. } = *opts;
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!(
            "time-bandwidth product c = {c} must be positive"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    let n = ((1.0 - eps) * c).floor() as usize;
    if n == 0 {
        return Err(invalid(format!("n = ⌊(1 − {eps})·{c}⌋ is zero")));
    }
    let rounds = opts.rounds.unwrap_or_else(|| default_rounds(eps));
    let packing = paper_packing(rounds, opts.n_cap)?;
    if packing.coverage < 1.0 - eps {
        return Err(invalid(format!(
            "{rounds} packing rounds cover {:.6}, below 1 − eps = {:.6}",
            packing.coverage,
            1.0 - eps
        )));
    }
    let system = build_system(&packing, c)?;
    if system.len() < n {
        return Err(Error::InsufficientMembers {
            needed: n,
            available: system.len(),
        });
    }

    let bounds = member_residual_bounds(&system.members);
    let mut order: Vec<usize> = (0..system.len()).collect();
    if opts.selection == Selection::TailBound {
        order.sort_by(|&a, &b| {
            bounds[a]
                .localization
                .total_cmp(&bounds[b].localization)
                .then(a.cmp(&b))
        });
    }
    order.truncate(n);
    let chosen: Vec<SystemMember> = order.iter().map(|&i| system.members[i]).collect();

    let max_degree = chosen.iter().map(|s| s.degree).max().unwrap_or(0);
    let rule = match opts.nodes {
        Some(m) => gauss_legendre_rule(m, -half_width(c), half_width(c))?,
        None => interval_rule(c, max_degree)?,
    };
    check_rule(c, &rule)?;
    let kern = kernel(&rule);
    let computed: Vec<(ResidualNorms, Localized)> = chosen
        .par_iter()
        .map(|s| residuals_with(s, c, &rule, &kern))
        .collect::<Result<_>>()?;
    let (norms, samples): (Vec<ResidualNorms>, Vec<Localized>) = computed.into_iter().unzip();

    let b = gram_matrix(&chosen)?;
    let a = localized_from(&samples, &rule);
    let gram_min = b.min_eigenvalue()?;
    let rayleigh_lower = pencil_eigen_min(&a.to_real_embedding(), &b.to_real_embedding())?;

    let max_off = b.max_off_diagonal_abs();
    let s_max = norms.iter().map(|r| r.localization).fold(0.0, f64::max);
    let health = HealthChecks {
        localized_min_eigenvalue: a.min_eigenvalue()?,
        defect_min_eigenvalue: b.sub(&a)?.min_eigenvalue()?,
        gershgorin: gram_min >= 1.0 - n as f64 * max_off - 1e-10,
        numeric_chain_lower: (gram_min >= 0.5).then(|| 1.0 - 2.0 * s_max * (2.0 * c).sqrt()),
        residual_chain: norms
            .iter()
            .all(|r| r.localization <= r.frequency + 2.0 * r.time + 1e-8),
    };

    let constants = certificate_constants(&packing)?;
    let analytic_lower = AnalyticSummary {
        alpha: constants.alpha,
        alpha_floor: constants.alpha_floor,
        nu0: constants.nu0,
        c_eps: constants.c_eps,
        log_pair_bound: proposition_pair_bound(&constants, c)?.log_abs,
        log_tail_bound: proposition_tail_bound(&constants, c)?.log_abs,
        bound: main_lower_bound(&constants, c, n, system.len())?,
        gates: theorem_gates(&constants, c, n)?,
    };

    let nystrom_nodes = opts.nystrom_nodes.unwrap_or_else(|| default_nodes(c));
    let spectrum = prolate_spectrum(c, nystrom_nodes, n)?;
    let nystrom_reference = spectrum
        .lambda(n)
        .ok_or_else(|| invalid(format!("Nyström spectrum has fewer than {n} eigenvalues")))?;

    let residual_table = chosen
        .iter()
        .zip(&norms)
        .zip(order.iter().map(|&i| bounds[i]))
        .map(|((s, &numeric), analytic)| ResidualRow {
            disk_index: s.disk_index,
            degree: s.degree,
            x0: s.x0(),
            xi0: s.xi0(),
            numeric,
            analytic,
        })
        .collect();

    Ok(CertificateReport {
        c,
        eps,
        n,
        rounds,
        coverage: packing.coverage,
        gamma: packing.gamma,
        disks: packing.disks.len(),
        system_size: system.len(),
        selection: opts.selection,
        quadrature_nodes: rule.len(),
        members: chosen,
        residual_table,
        rayleigh_lower,
        analytic_lower,
        nystrom_reference,
        nystrom_nodes,
        gap: nystrom_reference - rayleigh_lower,
        gram_extremes: GramExtremes {
            max_off_diagonal: max_off,
            min_eigenvalue: gram_min,
        },
        health,
    })
}
