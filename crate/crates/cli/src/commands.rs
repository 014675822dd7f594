use std::fmt::Write;

use plunge_core::bounds::{
    bjk_vacuity_threshold, certificate_constants, classical_asymptotics, karnik_plunge_bound, landau_widom,
    main_lower_bound, member_residual_bounds, proposition_pair_bound, proposition_tail_bound, theorem_gates,
    CertificateConstants, ClassicalAsymptotics, MainBound, TheoremGates,
};
use plunge_core::certify::{certify_with, default_rounds, CertificateReport, CertifyOptions, CSV_HEADER};
use plunge_core::fock::{build_system, gram_csv};
use plunge_core::format::{sci, FLOOR};
use plunge_core::packing::{paper_packing, DEFAULT_N_CAP};
use plunge_core::prolate::{default_nodes, prolate_spectrum, PRECISION_FLOOR};
use plunge_core::Result;
use rayon::prelude::*;
use serde::Serialize;

use crate::Format;

/// Text for stdout or `--out`, plus a gnuplot script builder taking the data
/// file name and the image name the script should write.
pub struct Rendered {
    pub body: String,
    pub plot: Option<fn(&str, &str) -> String>,
}

impl Rendered {
    fn data(body: String) -> Self {
        Self { body, plot: None }
    }

    fn plotted(body: String, plot: fn(&str, &str) -> String) -> Self {
        Self {
            body,
            plot: Some(plot),
        }
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn eigs(c: f64, nodes: Option<usize>, format: Format) -> Result<Rendered> {
    let nodes = nodes.unwrap_or_else(|| default_nodes(c));
    let spec = prolate_spectrum(c, nodes, nodes)?;
    if format == Format::Json {
        return Ok(Rendered::data(json(&spec)));
    }
    let mut body = String::from("n,lambda_n,one_minus_lambda_log10\n");
    for (i, &l) in spec.eigenvalues.iter().enumerate() {
        let gap = 1.0 - l;
        let log = if gap < PRECISION_FLOOR {
            FLOOR.to_string()
        } else {
            sci(gap.log10())
        };
        let _ = writeln!(body, "{},{},{log}", i + 1, sci(l));
    }
    let _ = writeln!(body, "# trace_defect,{}", sci(spec.trace_defect));
    Ok(Rendered::plotted(body, eigs_plot))
}

fn eigs_plot(file: &str, png: &str) -> String {
    format!(
        "set datafile separator \",\"\n\
         set datafile missing \"{FLOOR}\"\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 900,800\n\
         set output \"{png}\"\n\
         set multiplot layout 2,1\n\
         set xlabel \"n\"\n\
         set ylabel \"lambda_n\"\n\
         plot \"{file}\" using 1:2 with linespoints title \"lambda_n\"\n\
         set ylabel \"log10(1 - lambda_n)\"\n\
         plot \"{file}\" using 1:3 with linespoints title \"log10(1 - lambda_n)\"\n\
         unset multiplot\n"
    )
}

pub fn pack(rounds: usize, format: Format) -> Result<Rendered> {
    let p = paper_packing(rounds, DEFAULT_N_CAP)?;
    Ok(Rendered::data(match format {
        Format::Json => json(&p),
        Format::Csv => {
            let mut body = String::from("x,y,r\n");
            for d in &p.disks {
                let _ = writeln!(body, "{},{},{}", sci(d.x), sci(d.y), sci(d.r));
            }
            body
        }
    }))
}

#[derive(Serialize)]
struct MemberRow {
    index: usize,
    disk_index: usize,
    degree: usize,
    x0: f64,
    xi0: f64,
    time_bound: f64,
    frequency_bound: f64,
    localization_bound: f64,
}

pub fn system(c: f64, rounds: usize, format: Format) -> Result<Rendered> {
    let sys = build_system(&paper_packing(rounds, DEFAULT_N_CAP)?, c)?;
    let bounds = member_residual_bounds(&sys.members);
    let rows: Vec<MemberRow> = sys
        .members
        .iter()
        .zip(&bounds)
        .enumerate()
        .map(|(index, (s, b))| MemberRow {
            index,
            disk_index: s.disk_index,
            degree: s.degree,
            x0: s.x0(),
            xi0: s.xi0(),
            time_bound: b.time,
            frequency_bound: b.frequency,
            localization_bound: b.localization,
        })
        .collect();
    Ok(Rendered::data(match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut body = String::from(
                "index,disk_index,degree,x0,xi0,time_bound,frequency_bound,localization_bound\n",
            );
            for r in &rows {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},{},{}",
                    r.index,
                    r.disk_index,
                    r.degree,
                    sci(r.x0),
                    sci(r.xi0),
                    sci(r.time_bound),
                    sci(r.frequency_bound),
                    sci(r.localization_bound)
                );
            }
            body
        }
    }))
}

pub fn gram(c: f64, rounds: usize) -> Result<Rendered> {
    let sys = build_system(&paper_packing(rounds, DEFAULT_N_CAP)?, c)?;
    Ok(Rendered::plotted(gram_csv(sys.gram()?), gram_plot))
}

fn gram_plot(file: &str, png: &str) -> String {
    format!(
        "set datafile separator \",\"\n\
         set datafile missing \"{FLOOR}\"\n\
         set terminal pngcairo size 800,800\n\
         set output \"{png}\"\n\
         set size square\n\
         set yrange [*:*] reverse\n\
         set xlabel \"col\"\n\
         set ylabel \"row\"\n\
         set cblabel \"log10 |G|\"\n\
         plot \"{file}\" using 2:1:3 every ::1 with points pointtype 5 pointsize 0.5 palette notitle\n"
    )
}

#[derive(Serialize)]
struct LandauWidom {
    b: f64,
    n: usize,
    target: f64,
}

#[derive(Serialize)]
struct BoundsReport {
    c: f64,
    eps: f64,
    n: usize,
    rounds: usize,
    /// Absent when c ≤ 1.
    landau_widom: Option<LandauWidom>,
    /// Absent when eps ≥ 1/2.
    karnik_plunge_bound: Option<f64>,
    classical: ClassicalAsymptotics,
    bjk_vacuity_threshold: usize,
    constants: CertificateConstants,
    log_pair_bound: f64,
    log_tail_bound: f64,
    /// Absent when n is zero or exceeds the system size.
    main_bound: Option<MainBound>,
    system_size: usize,
    gates: TheoremGates,
}

pub fn bounds(c: f64, eps: f64, b: f64, rounds: Option<usize>, format: Format) -> Result<Rendered> {
    let n = ((1.0 - eps) * c).floor() as usize;
    let rounds = rounds.unwrap_or_else(|| default_rounds(eps));
    let packing = paper_packing(rounds, DEFAULT_N_CAP)?;
    let k = certificate_constants(&packing)?;
    let system_size = build_system(&packing, c)?.len();
    let report = BoundsReport {
        c,
        eps,
        n,
        rounds,
        landau_widom: (c > 1.0)
            .then(|| landau_widom(c, b))
            .transpose()?
            .map(|(n, target)| LandauWidom { b, n, target }),
        karnik_plunge_bound: (eps < 0.5).then(|| karnik_plunge_bound(c, eps)).transpose()?,
        classical: classical_asymptotics(c, n)?,
        bjk_vacuity_threshold: bjk_vacuity_threshold(c)?,
        log_pair_bound: proposition_pair_bound(&k, c)?.log_abs,
        log_tail_bound: proposition_tail_bound(&k, c)?.log_abs,
        main_bound: (n >= 1 && n <= system_size)
            .then(|| main_lower_bound(&k, c, n, system_size))
            .transpose()?,
        system_size,
        gates: theorem_gates(&k, c, n)?,
        constants: k,
    };
    Ok(Rendered::data(match format {
        Format::Json => json(&report),
        Format::Csv => bounds_csv(&report),
    }))
}

fn bounds_csv(r: &BoundsReport) -> String {
    let (status, value) = match r.main_bound {
        Some(MainBound::Valid { value, .. }) => ("valid", Some(value)),
        Some(MainBound::NotYetValid { .. }) => ("not_yet_valid", None),
        Some(MainBound::InadmissibleAlpha { .. }) => ("inadmissible_alpha", None),
        None => ("not_applicable", None),
    };
    let mut rows: Vec<(&str, String)> = vec![
        ("c", sci(r.c)),
        ("eps", sci(r.eps)),
        ("n", r.n.to_string()),
        ("rounds", r.rounds.to_string()),
        (
            "landau_widom_n",
            r.landau_widom
                .as_ref()
                .map(|l| l.n.to_string())
                .unwrap_or_default(),
        ),
        (
            "landau_widom_target",
            opt_sci(r.landau_widom.as_ref().map(|l| l.target)),
        ),
        ("karnik_plunge_bound", opt_sci(r.karnik_plunge_bound)),
        ("bjk_lower", sci(r.classical.bjk_lower)),
        ("fuchs_gap", opt_sci(r.classical.fuchs_gap)),
        ("log_fuchs_gap", opt_sci(r.classical.log_fuchs_gap)),
        ("widom_decay", sci(r.classical.widom_decay)),
        ("log_widom_decay", sci(r.classical.log_widom_decay)),
        ("bjk_vacuity_threshold", r.bjk_vacuity_threshold.to_string()),
        ("gamma", sci(r.constants.gamma)),
        ("r_min", sci(r.constants.r_min)),
        ("nu0", sci(r.constants.nu0)),
        ("c_eps", sci(r.constants.c_eps)),
        ("c_gauss", sci(r.constants.c_gauss)),
        ("alpha_floor", sci(r.constants.alpha_floor)),
        ("alpha", sci(r.constants.alpha)),
        ("log_pair_bound", sci(r.log_pair_bound)),
        ("log_tail_bound", sci(r.log_tail_bound)),
        ("main_bound_status", status.to_string()),
        ("main_bound", opt_sci(value)),
        ("system_size", r.system_size.to_string()),
        ("log_alpha_pow_c", sci(r.gates.log_alpha_pow_c)),
    ];
    for (name, open) in [
        ("gate_crude_gram", r.gates.crude_gram),
        ("gate_pair", r.gates.pair),
        ("gate_tail", r.gates.tail),
        ("gate_n_within_c", r.gates.n_within_c),
    ] {
        rows.push((name, open.to_string()));
    }
    let mut body = String::from("quantity,value\n");
    for (name, value) in rows {
        let _ = writeln!(body, "{name},{value}");
    }
    body
}

fn report_csv(reports: &[CertificateReport]) -> String {
    let mut body = format!("{CSV_HEADER}\n");
    for r in reports {
        body.push_str(&r.csv_row());
        body.push('\n');
    }
    body
}

pub fn certify(opts: &CertifyOptions, format: Format) -> Result<Rendered> {
    let r = certify_with(opts)?;
    Ok(Rendered::data(match format {
        Format::Json => {
            let mut s = r.to_json();
            s.push('\n');
            s
        }
        Format::Csv => report_csv(std::slice::from_ref(&r)),
    }))
}

const MAX_SWEEP_POINTS: usize = 10_000;

/// `start, start + step, …` up to `stop`, allowing for rounding at the end point.
pub fn sweep_grid(start: f64, stop: f64, step: f64) -> std::result::Result<Vec<f64>, String> {
    if !(start > 0.0 && start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite()) {
        return Err(format!(
            "need 0 < c-start, finite c-stop and c-step > 0 (got {start}, {stop}, {step})"
        ));
    }
    if stop < start {
        return Err(format!("c-stop {stop} is below c-start {start}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > MAX_SWEEP_POINTS {
        return Err(format!("sweep has {count} points, more than {MAX_SWEEP_POINTS}"));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

pub fn sweep(grid: &[f64], eps: f64, rounds: Option<usize>, format: Format) -> Result<Rendered> {
    let mut reports: Vec<CertificateReport> = grid
        .par_iter()
        .map(|&c| {
            let mut opts = CertifyOptions::new(c, eps);
            opts.rounds = rounds;
            certify_with(&opts)
        })
        .collect::<Result<_>>()?;
    reports.sort_by(|a, b| a.c.total_cmp(&b.c));
    Ok(match format {
        Format::Json => Rendered::data(json(&reports)),
        Format::Csv => Rendered::plotted(report_csv(&reports), sweep_plot),
    })
}

fn sweep_plot(file: &str, png: &str) -> String {
    format!(
        "set datafile separator \",\"\n\
         set key autotitle columnhead left bottom\n\
         set terminal pngcairo size 900,600\n\
         set output \"{png}\"\n\
         set xlabel \"c\"\n\
         set ylabel \"lambda_n(c)\"\n\
         plot \"{file}\" using 1:4 with linespoints title \"rayleigh_lower\", \\\n     \
         \"{file}\" using 1:7 with linespoints title \"nystrom_reference\"\n"
    )
}
