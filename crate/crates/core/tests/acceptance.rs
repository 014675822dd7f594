//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use plunge_core::bounds::{
    certificate_constants, classical_asymptotics, karnik_plunge_bound, landau_widom, proposition_pair_bound,
    proposition_tail_bound, MainBound,
};
use plunge_core::certify::{certify_lower_bound, interval_rule, localized_gram, residual_norms};
use plunge_core::fock::{
    bargmann_member, bargmann_numeric, build_system, eval_member_fourier, gram_entry_closed,
    gram_entry_log_abs, gram_entry_oracle, gram_matrix, normalized_monomial, oracle_rule, SystemMember,
};
use plunge_core::numerics::{gauss_legendre_rule, hermite, pencil_eigen_min};
use plunge_core::packing::{paper_packing, perimeter_constant, Disk, Packing, DEFAULT_N_CAP};
use plunge_core::prolate::{default_spectrum, plunge_count, trace_defect, EigenSpectrum};
use plunge_core::Result;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Default)]
struct Spectra(HashMap<u64, EigenSpectrum>);

impl Spectra {
    fn get(&mut self, c: f64) -> Result<&EigenSpectrum> {
        Ok(match self.0.entry(c.to_bits()) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(v) => v.insert(default_spectrum(c)?),
        })
    }
}

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn trace_identity(spectra: &mut Spectra) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for c in [1.0, 5.0, 10.0, 20.0] {
        worst = worst.max(trace_defect(spectra.get(c)?) / c);
    }
    Ok(Outcome::new(
        worst <= 1e-6,
        format!("max |Σλ − c|/c = {worst:.3e}"),
    ))
}

fn landau_widom_drift(spectra: &mut Spectra) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut centre = [0.0; 2];
    for (slot, c) in [20.0, 40.0].into_iter().enumerate() {
        for b in [-2.0, 0.0, 2.0] {
            let (n, target) = landau_widom(c, b)?;
            let err = (spectra.get(c)?.lambda(n).unwrap_or(0.0) - target).abs();
            pass &= err <= 0.15;
            if b == 0.0 {
                centre[slot] = err;
            }
            parts.push(format!("c={c} b={b} n={n} err={err:.3}"));
        }
    }
    pass &= centre[1] <= centre[0];
    for c in [20.0f64, 40.0] {
        let s = spectra.get(c)?;
        let n = c as usize;
        println!(
            "INFO  2: c={c}: λ_c = {:.4}, λ_(c+1) = {:.4} (half point near n = c + 1/2)",
            s.lambda(n).unwrap_or(0.0),
            s.lambda(n + 1).unwrap_or(0.0)
        );
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn karnik(spectra: &mut Spectra) -> Result<Outcome> {
    let mut violations = 0;
    for c in [10.0, 20.0, 40.0] {
        for eps in [0.01, 0.1] {
            let count = plunge_count(spectra.get(c)?, eps)? as f64;
            if count > karnik_plunge_bound(c, eps)? {
                violations += 1;
            }
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!("{violations} violations of 6"),
    ))
}

fn bjk(spectra: &mut Spectra) -> Result<Outcome> {
    let (mut checked, mut violations) = (0, 0);
    for c in [5.0, 10.0, 20.0] {
        let s = spectra.get(c)?;
        // The formula's index starts at 0 for the top eigenvalue.
        for n in 0..=(c as usize) {
            let bound = classical_asymptotics(c, n)?.bjk_lower;
            if bound <= 0.0 || s.is_at_floor(n + 1) {
                continue;
            }
            checked += 1;
            if s.lambda(n + 1).unwrap_or(0.0) < bound - 1e-10 {
                violations += 1;
            }
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!("{violations} violations in {checked} nonvacuous checks"),
    ))
}

fn fuchs(spectra: &mut Spectra) -> Result<Outcome> {
    let mut ratios = Vec::new();
    for c in [2.0, 3.0, 4.0, 5.0, 6.0] {
        let gap = 1.0 - spectra.get(c)?.lambda(1).unwrap_or(0.0);
        let fuchs = classical_asymptotics(c, 1)?.fuchs_gap.unwrap_or(f64::NAN);
        ratios.push(gap / fuchs);
    }
    let in_range = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    let trending = ratios
        .windows(2)
        .all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs());
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    Ok(Outcome::new(
        in_range && trending,
        format!("ratios {}", shown.join(", ")),
    ))
}

fn two_disks() -> Result<Packing> {
    Packing::from_disks(vec![Disk::new(-0.22, -0.05, 0.25), Disk::new(0.26, 0.12, 0.2)])
}

fn proposition_domination() -> Result<Outcome> {
    let c = 20.0;
    let p = two_disks()?;
    let k = certificate_constants(&p)?;
    let pair = proposition_pair_bound(&k, c)?;
    let tail = proposition_tail_bound(&k, c)?;
    let sys = build_system(&p, c)?;
    let mut violations = 0;
    for a in &sys.members {
        for b in &sys.members {
            if a.disk_index != b.disk_index {
                let e = gram_entry_log_abs(a, b);
                if !e.is_below_floor() && e.log_abs > pair.log_abs {
                    violations += 1;
                }
            }
        }
    }
    let rule = interval_rule(c, sys.max_degree())?;
    for s in &sys.members {
        let r = residual_norms(s, c, &rule)?;
        for v in [r.time, r.frequency] {
            if v > 0.0 && v.ln() > tail.log_abs {
                violations += 1;
            }
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!(
            "{violations} violations over {} members; log pair bound {:.3}, log tail bound {:.3}{}",
            sys.len(),
            pair.log_abs,
            tail.log_abs,
            if pair.log_abs > 0.0 && tail.log_abs > 0.0 {
                " (both exceed 1 at this c)"
            } else {
                ""
            }
        ),
    ))
}

fn gram_oracle() -> Result<Outcome> {
    let c: f64 = 10.0;
    let k_max = (c * PI * 0.49 * 0.49).floor() as usize;
    let rule = oracle_rule(c, k_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let half = c.sqrt() / 2.0;
    let draw = |rng: &mut ChaCha8Rng| {
        SystemMember::new(
            0,
            rng.gen_range(0..=k_max),
            z(rng.gen_range(-half..half), rng.gen_range(-half..half)),
            c,
        )
    };
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        worst = worst.max((gram_entry_closed(&a, &b) - gram_entry_oracle(&a, &b, &rule)).norm());
    }
    let mut same_disk: f64 = 0.0;
    for _ in 0..20 {
        let a = draw(&mut rng);
        let mut b = a;
        b.degree = (a.degree + rng.gen_range(1..=k_max)) % (k_max + 1);
        same_disk = same_disk.max(gram_entry_oracle(&a, &b, &rule).norm());
    }
    Ok(Outcome::new(
        worst <= 1e-8 && same_disk <= 1e-10,
        format!("max pair error {worst:.3e}; max same-disk k ≠ l entry {same_disk:.3e}"),
    ))
}

fn bargmann_conventions() -> Result<Outcome> {
    let rule = gauss_legendre_rule(800, -12.0, 12.0)?;
    let mut monomial_err: f64 = 0.0;
    for k in 0..=10 {
        for p in [z(0.5, 0.0), z(1.0, 0.0), z(0.0, 1.0), z(1.0, 1.0)] {
            let b = bargmann_numeric(|t| z(hermite(k, t), 0.0), p, &rule);
            let m = normalized_monomial(k, p);
            monomial_err = monomial_err.max((b - m).norm() / m.norm());
        }
    }
    let h3 = SystemMember::new(0, 3, z(0.0, 0.0), 1.0);
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    for p in [z(0.5, 0.0), z(1.0, 0.0), z(0.0, 1.0), z(1.0, 1.0)] {
        let bf_hat = bargmann_numeric(|t| eval_member_fourier(&h3, t), p, &rule);
        plus = plus.max((bf_hat - bargmann_member(&h3, p * z(0.0, 1.0), &rule)).norm());
        minus = minus.max((bf_hat - bargmann_member(&h3, p * z(0.0, -1.0), &rule)).norm());
    }
    println!("INFO  8: B(f̂)(z) = Bf(−iz) for h_3: max error {minus:.3e}");
    Ok(Outcome::new(
        monomial_err <= 1e-6 && plus <= 1e-6,
        format!("monomial max rel error {monomial_err:.3e}; B(f̂)(z) vs Bf(iz) for h_3: {plus:.3e}"),
    ))
}

/// Strict containment and disjointness with an independent bucket sweep.
fn packing_certified(p: &Packing) -> bool {
    let g = p.gamma;
    if g.is_nan() || g <= 0.0 {
        return false;
    }
    if p.disks
        .iter()
        .any(|d| 0.5 - d.x.abs().max(d.y.abs()) - d.r < g - 1e-15)
    {
        return false;
    }
    let cell = 4.0 * p.r_min();
    let side = (1.0 / cell).ceil() as usize;
    let key = |x: f64| (((x + 0.5) / cell).max(0.0) as usize).min(side - 1);
    let mut entries = Vec::new();
    for (k, d) in p.disks.iter().enumerate() {
        let e = d.r + 0.5 * g;
        for gx in key(d.x - e)..=key(d.x + e) {
            for gy in key(d.y - e)..=key(d.y + e) {
                entries.push((gx * side + gy, k));
            }
        }
    }
    entries.sort_unstable();
    entries.chunk_by(|a, b| a.0 == b.0).all(|group| {
        group.iter().enumerate().all(|(a, &(_, i))| {
            group[a + 1..].iter().all(|&(_, j)| {
                p.disks[i].gap_to(&p.disks[j]) >= g - 1e-15 && p.disks[i].gap_to(&p.disks[j]) > 0.0
            })
        })
    })
}

fn packing_correctness() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for rounds in 1..=3 {
        let p = paper_packing(rounds, DEFAULT_N_CAP)?;
        let covered = p.coverage >= 1.0 - 2f64.powi(-(rounds as i32));
        let certified = packing_certified(&p);
        // Disks present before round r + 1 are a prefix of the list.
        let mut before = 1;
        let mut crossing_ok = true;
        for st in &p.per_round_stats {
            let bound = (perimeter_constant(&p.disks[..before]) * st.grid as f64).ceil() as usize;
            crossing_ok &= st.crossing <= bound;
            before += st.free;
        }
        pass &= covered && certified && crossing_ok;
        parts.push(format!(
            "round {rounds}: {} disks, coverage {:.6}, γ = {:.3e}, |C| ok {crossing_ok}",
            p.disks.len(),
            p.coverage,
            p.gamma
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn certificate_sandwich(spectra: &mut Spectra) -> Result<Outcome> {
    let r = certify_lower_bound(20.0, 0.25, 2)?;
    let lambda = spectra.get(20.0)?.lambda(15).unwrap_or(0.0);
    let gate = match r.analytic_lower.bound {
        MainBound::Valid { value, .. } => format!("gate holds, analytic bound {value:.6}"),
        MainBound::NotYetValid {
            alpha_pow_c,
            threshold,
        } => {
            format!("gate not yet valid (α^c = {alpha_pow_c:.6} ≥ 1/(2c) = {threshold:.4})")
        }
        MainBound::InadmissibleAlpha { alpha, alpha_floor } => {
            format!("α = {alpha} not above {alpha_floor}")
        }
    };
    Ok(Outcome::new(
        r.n == 15 && r.rayleigh_lower <= lambda + 1e-6 && r.rayleigh_lower >= 0.9,
        format!("rayleigh {:.8} ≤ λ_15 = {lambda:.8}; {gate}", r.rayleigh_lower),
    ))
}

fn min_max_soundness(spectra: &mut Spectra) -> Result<Outcome> {
    let p = paper_packing(2, DEFAULT_N_CAP)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut checked, mut skipped, mut violations) = (0, 0, 0);
    let mut worst = f64::NEG_INFINITY;
    for c in [10.0, 20.0] {
        let sys = build_system(&p, c)?;
        let top = sys.len().min(2 * c as usize);
        let lambdas = spectra.get(c)?.eigenvalues.clone();
        for _ in 0..20 {
            let size = rng.gen_range(1..=top);
            let members: Vec<SystemMember> = sample(&mut rng, sys.len(), size)
                .into_iter()
                .map(|i| sys.members[i])
                .collect();
            let max_degree = members.iter().map(|s| s.degree).max().unwrap_or(0);
            let a = localized_gram(&members, c, &interval_rule(c, max_degree)?)?;
            let b = gram_matrix(&members)?;
            let Ok(pencil) = pencil_eigen_min(&a.to_real_embedding(), &b.to_real_embedding()) else {
                skipped += 1;
                continue;
            };
            checked += 1;
            let gap = pencil - lambdas.get(size - 1).copied().unwrap_or(0.0);
            worst = worst.max(gap);
            if gap > 1e-6 {
                violations += 1;
            }
        }
    }
    Ok(Outcome::new(
        violations == 0 && checked > 0,
        format!(
            "{violations} violations in {checked} subsets ({skipped} singular); max pencil − λ = {worst:.3e}"
        ),
    ))
}

type Check<'a> = Box<dyn FnOnce(&mut Spectra) -> Result<Outcome> + 'a>;

fn main() -> ExitCode {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria: Vec<(&str, Option<Duration>, Check)> = vec![
        (
            "trace identity",
            Some(Duration::from_secs(30)),
            Box::new(trace_identity),
        ),
        ("Landau-Widom drift", minutes(2), Box::new(landau_widom_drift)),
        ("Karnik plunge bound", None, Box::new(karnik)),
        ("BJK lower bound", None, Box::new(bjk)),
        ("Fuchs regime", None, Box::new(fuchs)),
        (
            "pair and tail domination",
            None,
            Box::new(|_| proposition_domination()),
        ),
        ("Gram oracle equivalence", None, Box::new(|_| gram_oracle())),
        ("Bargmann conventions", None, Box::new(|_| bargmann_conventions())),
        (
            "packing correctness",
            minutes(2),
            Box::new(|_| packing_correctness()),
        ),
        ("certificate sandwich", minutes(2), Box::new(certificate_sandwich)),
        ("min-max soundness", None, Box::new(min_max_soundness)),
    ];
    let mut spectra = Spectra::default();
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check(&mut spectra).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let over = budget.is_some_and(|b| elapsed > b);
        let pass = outcome.pass && !over;
        failures += usize::from(!pass);
        println!(
            "{} {:>2} {name}: {}{} [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            if over { "; budget exceeded" } else { "" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
