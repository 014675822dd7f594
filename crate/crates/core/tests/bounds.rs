use plunge_core::bounds::{
    bjk_vacuity_threshold, certificate_constants, classical_asymptotics, karnik_plunge_bound,
    main_lower_bound, member_residual_bound, proposition_tail_bound, MainBound,
};
use plunge_core::certify::{interval_rule, residual_norms};
use plunge_core::fock::build_system;
use plunge_core::packing::{paper_packing, Disk, Packing, DEFAULT_N_CAP};
use plunge_core::prolate::{default_spectrum, plunge_count};

#[test]
fn bjk_lower_bound_holds() {
    for c in [5.0, 10.0, 20.0] {
        let s = default_spectrum(c).unwrap();
        for n in 0..=(c as usize) {
            let bjk = classical_asymptotics(c, n).unwrap().bjk_lower;
            if bjk < 0.0 || s.is_at_floor(n + 1) {
                continue;
            }
            let l = s.lambda(n + 1).unwrap();
            assert!(l >= bjk - 1e-10, "c = {c}, n = {n}: {l} < {bjk}");
        }
    }
}

#[test]
fn bjk_vacuity_near_058c() {
    let c = 500.0;
    let t = bjk_vacuity_threshold(c).unwrap() as f64;
    assert!((t / c - 0.58).abs() < 0.03, "{t}");
}

#[test]
fn karnik_bound_holds() {
    let s = default_spectrum(10.0).unwrap();
    let count = plunge_count(&s, 0.01).unwrap() as f64;
    assert!(count <= karnik_plunge_bound(10.0, 0.01).unwrap());
}

#[test]
fn numeric_residuals_below_tail_bound() {
    let p = Packing::from_disks(vec![Disk::new(0.0, 0.0, 0.49)]).unwrap();
    let c = 20.0;
    let sys = build_system(&p, c).unwrap();
    let k = certificate_constants(&p).unwrap();
    let tail = proposition_tail_bound(&k, c).unwrap();
    let rule = interval_rule(c, sys.max_degree()).unwrap();
    for s in &sys.members {
        let r = residual_norms(s, c, &rule).unwrap();
        assert!(r.time.ln() <= tail.log_abs && r.frequency.ln() <= tail.log_abs);
        let b = member_residual_bound(s);
        assert!(r.time <= b.time && r.frequency <= b.frequency);
        assert!(r.localization <= b.localization + 1e-12);
    }
}

#[test]
fn main_bound_never_exceeds_nystrom() {
    // The crude gate needs c far beyond desk scale for the admissible alpha,
    // so at c ≤ 40 every call must report "not yet valid".
    let p = paper_packing(2, DEFAULT_N_CAP).unwrap();
    let k = certificate_constants(&p).unwrap();
    for c in [10.0, 20.0, 40.0] {
        let sys = build_system(&p, c).unwrap();
        let n = (0.75 * c) as usize;
        match main_lower_bound(&k, c, n, sys.len()).unwrap() {
            MainBound::Valid { value, .. } => {
                let l = default_spectrum(c).unwrap().lambda(n).unwrap();
                assert!(value <= l + 1e-8);
            }
            MainBound::NotYetValid {
                alpha_pow_c,
                threshold,
            } => assert!(alpha_pow_c >= threshold),
            MainBound::InadmissibleAlpha { .. } => panic!("default alpha must be admissible"),
        }
    }
}

#[test]
fn fuchs_ratio_approaches_one() {
    let mut prev = 0.0;
    for c in [2.0, 3.0, 4.0, 5.0, 6.0] {
        let s = default_spectrum(c).unwrap();
        let gap = 1.0 - s.lambda(1).unwrap();
        let ratio = gap / classical_asymptotics(c, 1).unwrap().fuchs_gap.unwrap();
        assert!((0.5..=2.0).contains(&ratio), "c = {c}: {ratio}");
        assert!((ratio - 1.0).abs() <= (prev - 1.0f64).abs() + 1e-12 || prev == 0.0);
        prev = ratio;
    }
}

#[test]
fn widom_ratio_tends_to_one() {
    // Fixed c, growing n: λ_{n+1} / widom(n) → 1.
    let c = 2.0;
    let s = default_spectrum(c).unwrap();
    let ratio = |n: usize| s.lambda(n + 1).unwrap() / classical_asymptotics(c, n).unwrap().widom_decay;
    let errs: Vec<f64> = [3, 5, 8].iter().map(|&n| (ratio(n) - 1.0).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < 0.1, "{errs:?}");
}
