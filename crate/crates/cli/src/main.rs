//! `plunge-lab`: spectra, packings, Gram matrices, bounds and certificates
//! for the time-frequency localization operator.

mod commands;

use std::fs;
use std::io::{ErrorKind as IoErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use plunge_core::certify::Selection;
use plunge_core::Error;

use crate::commands::Rendered;

const THREADS_VAR: &str = "PLUNGE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "plunge-lab", version, about, long_about = None)]
#[command(
    after_help = "Exit status: 0 success, 1 computational failure, 2 usage error.\n\
    PLUNGE_LAB_THREADS caps the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nyström eigenvalues λ_1 ≥ λ_2 ≥ … of the sinc-kernel operator (CSV by default).
    Eigs {
        #[command(flatten)]
        c: CArg,
        /// Gauss–Legendre nodes [default: max(400, ⌈20c⌉)].
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        nodes: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Disk packing of the unit square after R subdivision rounds (JSON by default).
    Pack {
        #[command(flatten)]
        rounds: RoundsArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Members of the Hermite system with their analytic residual bounds (CSV by default).
    System {
        #[command(flatten)]
        c: CArg,
        #[command(flatten)]
        rounds: RoundsArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// log10 |Gram entry| over the upper triangle (CSV only).
    Gram {
        #[command(flatten)]
        c: CArg,
        #[command(flatten)]
        rounds: RoundsArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Every closed-form bound at (c, eps, b) (JSON by default).
    Bounds {
        #[command(flatten)]
        c: CArg,
        #[command(flatten)]
        eps: EpsArg,
        /// Landau–Widom offset b.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b: f64,
        /// Packing rounds for the certificate constants [default: ⌈log2(1/eps)⌉].
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Numerical lower bound for λ_n(c), n = ⌊(1 − eps)c⌋ (JSON by default).
    Certify {
        #[command(flatten)]
        c: CArg,
        #[command(flatten)]
        eps: EpsArg,
        /// Packing rounds [default: ⌈log2(1/eps)⌉].
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: Option<u64>,
        /// Gauss–Legendre nodes on the time interval [default: chosen from c and the top degree].
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        nodes: Option<u64>,
        /// How the n members are chosen from the system.
        #[arg(long, value_enum, default_value_t = SelectionArg::TailBound)]
        selection: SelectionArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One certificate summary row per c in [c-start, c-stop] (CSV by default).
    Sweep {
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        c_start: f64,
        #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
        c_stop: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        c_step: f64,
        #[command(flatten)]
        eps: EpsArg,
        /// Packing rounds [default: ⌈log2(1/eps)⌉].
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct CArg {
    /// Time-bandwidth product c > 0.
    #[arg(long, allow_negative_numbers = true, value_parser = positive)]
    c: f64,
}

#[derive(Debug, Args)]
struct EpsArg {
    /// Fraction 0 < eps < 1 of the index range given up.
    #[arg(long, allow_negative_numbers = true, value_parser = unit_open)]
    eps: f64,
}

#[derive(Debug, Args)]
struct RoundsArg {
    /// Packing subdivision rounds.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    rounds: u64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a gnuplot script next to --out (CSV outputs of eigs, gram, sweep).
    #[arg(long)]
    emit_plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SelectionArg {
    TailBound,
    Lexicographic,
}

impl From<SelectionArg> for Selection {
    fn from(s: SelectionArg) -> Self {
        match s {
            SelectionArg::TailBound => Selection::TailBound,
            SelectionArg::Lexicographic => Selection::Lexicographic,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive finite number"))
    }
}

fn unit_open(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::AliasingRisk { .. } | Error::CoarseRule { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // Fails only if a pool already exists, which cannot happen this early.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => usage_error(
            ErrorKind::InvalidValue,
            format!("{THREADS_VAR}={raw:?} is not a positive integer"),
        ),
    }
}

fn emit(rendered: Rendered, output: &OutputArgs) -> Result<(), Failure> {
    match &output.out {
        Some(path) => {
            fs::write(path, &rendered.body)
                .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
            if let Some(make_plot) = rendered.plot {
                let name = |p: &Path| {
                    p.file_name()
                        .map(|f| f.to_string_lossy().into_owned())
                        .unwrap_or_default()
                };
                let script = path.with_extension("gp");
                fs::write(
                    &script,
                    make_plot(&name(path), &name(&path.with_extension("png"))),
                )
                .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", script.display())))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(rendered.body.as_bytes())
                .and_then(|()| stdout.flush())
            {
                // A closed reader (e.g. `| head`) is not a failure of the computation.
                Err(e) if e.kind() != IoErrorKind::BrokenPipe => {
                    return Err(Failure::Compute(format!("cannot write to stdout: {e}")));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn check_output(output: &OutputArgs, default: Format, allowed: &[Format], plottable: bool) -> Format {
    let format = output.format.unwrap_or(default);
    if !allowed.contains(&format) {
        let name = format
            .to_possible_value()
            .map(|v| v.get_name().to_owned())
            .unwrap_or_default();
        usage_error(
            ErrorKind::InvalidValue,
            format!("--format {name} is not available for this command"),
        );
    }
    if output.emit_plot {
        if !plottable || format != Format::Csv {
            usage_error(
                ErrorKind::ArgumentConflict,
                "--emit-plot needs a CSV output of eigs, gram or sweep",
            );
        }
        if output.out.is_none() {
            usage_error(ErrorKind::MissingRequiredArgument, "--emit-plot needs --out");
        }
    }
    format
}

const BOTH: &[Format] = &[Format::Csv, Format::Json];

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Eigs { c, nodes, output } => {
            let format = check_output(&output, Format::Csv, BOTH, true);
            emit(commands::eigs(c.c, nodes.map(|n| n as usize), format)?, &output)
        }
        Command::Pack { rounds, output } => {
            let format = check_output(&output, Format::Json, BOTH, false);
            emit(commands::pack(rounds.rounds as usize, format)?, &output)
        }
        Command::System { c, rounds, output } => {
            let format = check_output(&output, Format::Csv, BOTH, false);
            emit(commands::system(c.c, rounds.rounds as usize, format)?, &output)
        }
        Command::Gram { c, rounds, output } => {
            check_output(&output, Format::Csv, &[Format::Csv], true);
            emit(commands::gram(c.c, rounds.rounds as usize)?, &output)
        }
        Command::Bounds {
            c,
            eps,
            b,
            rounds,
            output,
        } => {
            if !b.is_finite() {
                usage_error(ErrorKind::InvalidValue, "--b must be finite");
            }
            let format = check_output(&output, Format::Json, BOTH, false);
            emit(
                commands::bounds(c.c, eps.eps, b, rounds.map(|r| r as usize), format)?,
                &output,
            )
        }
        Command::Certify {
            c,
            eps,
            rounds,
            nodes,
            selection,
            output,
        } => {
            let format = check_output(&output, Format::Json, BOTH, false);
            let mut opts = plunge_core::certify::CertifyOptions::new(c.c, eps.eps);
            opts.rounds = rounds.map(|r| r as usize);
            opts.nodes = nodes.map(|n| n as usize);
            opts.selection = selection.into();
            emit(commands::certify(&opts, format)?, &output)
        }
        Command::Sweep {
            c_start,
            c_stop,
            c_step,
            eps,
            rounds,
            output,
        } => {
            let grid = commands::sweep_grid(c_start, c_stop, c_step)
                .unwrap_or_else(|msg| usage_error(ErrorKind::InvalidValue, msg));
            let format = check_output(&output, Format::Csv, BOTH, true);
            emit(
                commands::sweep(&grid, eps.eps, rounds.map(|r| r as usize), format)?,
                &output,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
