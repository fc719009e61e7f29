//! Command-line driver: single runs, sweeps over particle number, and the
//! built-in validation suite.
//!
//! Exit codes: 0 success, 1 computational failure (solver divergence,
//! saddle, unstable mode), 2 usage or configuration error. Data goes to the
//! output path or standard output; diagnostics go to standard error. Set
//! `DPT_MODES_LOG` for per-stage progress on standard error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dptmodes::exec::Parallelism;
use dptmodes::model::{SystemKind, SystemSpec};
use dptmodes::report::{self, RunOptions, Tolerances};

mod selftest;

#[derive(Parser)]
#[command(
    name = "dptmodes",
    about = "Large-dimension equilibrium structure and normal modes of N confined particles",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system and emit its full report.
    Run(JobArgs),
    /// Independent runs over a range of particle numbers.
    Sweep(JobArgs),
    /// Run the built-in validation suites and report pass/fail.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct JobArgs {
    /// System family: atom, quantum_dot, or custom.
    #[arg(long)]
    system: Option<String>,

    /// Particle number; sweeps accept an inclusive range "a:b".
    #[arg(long = "N")]
    n: Option<String>,

    /// Dimension used for unscaling previews and first-order energies
    /// (default 1000).
    #[arg(long = "D")]
    d: Option<usize>,

    /// Trap frequency (quantum_dot, custom).
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,

    /// Nuclear charge (atom); defaults to N.
    #[arg(long = "Z", allow_negative_numbers = true)]
    z: Option<f64>,

    /// Interaction strength (quantum_dot Coulomb, custom soft core).
    #[arg(long, allow_negative_numbers = true)]
    interaction: Option<f64>,

    /// System spec as a JSON file path or inline JSON object; flags
    /// override individual fields.
    #[arg(long)]
    config: Option<String>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write data here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Worker threads for sweeps (1 forces sequential execution).
    #[arg(long)]
    jobs: Option<usize>,

    /// Gradient tolerance for the equilibrium solve.
    #[arg(long, default_value_t = 1e-10)]
    tol_grad: f64,

    /// Relative gap tolerance for eigenvalue clustering.
    #[arg(long, default_value_t = 1e-7)]
    tol_cluster: f64,

    /// Starting radius for the equilibrium solve.
    #[arg(long, allow_negative_numbers = true)]
    seed_r: Option<f64>,

    /// Starting angle cosine for the equilibrium solve.
    #[arg(long, allow_negative_numbers = true)]
    seed_gamma: Option<f64>,
}

fn log_enabled() -> bool {
    std::env::var("DPT_MODES_LOG").map(|v| !v.is_empty()).unwrap_or(false)
}

macro_rules! logln {
    ($($arg:tt)*) => {
        if log_enabled() {
            eprintln!($($arg)*);
        }
    };
}

/// Usage/config problems exit 2, computational failures exit 1.
enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Compute(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn parse_system(name: &str) -> Result<SystemKind, CliError> {
    match name {
        "atom" => Ok(SystemKind::Atom),
        "quantum_dot" => Ok(SystemKind::QuantumDot),
        "custom" => Ok(SystemKind::Custom),
        other => Err(CliError::Usage(format!(
            "unknown system '{other}' (expected atom, quantum_dot, or custom)"
        ))),
    }
}

/// "6" or "3:10" (inclusive).
fn parse_n_list(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = |_| CliError::Usage(format!("cannot parse particle number '{text}'"));
    if let Some((a, b)) = text.split_once(':') {
        let lo: usize = a.trim().parse().map_err(bad)?;
        let hi: usize = b.trim().parse().map_err(bad)?;
        if lo < 2 || hi < lo {
            return Err(CliError::Usage(format!("invalid range '{text}'")));
        }
        Ok((lo..=hi).collect())
    } else {
        let n: usize = text.trim().parse().map_err(bad)?;
        Ok(vec![n])
    }
}

fn build_spec(args: &JobArgs) -> Result<(SystemSpec, Vec<usize>), CliError> {
    let mut spec = match &args.config {
        Some(source) => {
            let text = if source.trim_start().starts_with('{') {
                source.clone()
            } else {
                fs::read_to_string(source)
                    .map_err(|e| CliError::Usage(format!("cannot read config {source}: {e}")))?
            };
            serde_json::from_str::<SystemSpec>(&text)
                .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?
        }
        None => {
            let system = args
                .system
                .as_deref()
                .ok_or_else(|| CliError::Usage("--system is required without --config".into()))?;
            let n_text = args
                .n
                .as_deref()
                .ok_or_else(|| CliError::Usage("--N is required without --config".into()))?;
            let first = *parse_n_list(n_text)?.first().unwrap();
            SystemSpec::new(parse_system(system)?, first, args.d.unwrap_or(1000))
        }
    };
    if let Some(system) = &args.system {
        spec.system = parse_system(system)?;
    }
    if let Some(d) = args.d {
        spec.d = d;
    }
    if let Some(omega) = args.omega {
        spec.params.insert("omega".into(), omega);
    }
    if let Some(z) = args.z {
        spec.params.insert("Z".into(), z);
    }
    if let Some(c) = args.interaction {
        spec.params.insert("interaction".into(), c);
    }
    let n_list = match &args.n {
        Some(text) => parse_n_list(text)?,
        None => vec![spec.n],
    };
    spec.n = n_list[0];
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((spec, n_list))
}

fn run_options(args: &JobArgs) -> Result<RunOptions, CliError> {
    let parallelism = match args.jobs {
        Some(0) | None => Parallelism::default(),
        Some(1) => Parallelism::Sequential,
        #[cfg(feature = "parallel")]
        Some(j) => {
            // the global pool can only be sized once per process; later
            // calls fail harmlessly if the size already stuck
            let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
            Parallelism::Rayon
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            eprintln!("note: built without the parallel feature; running sequentially");
            Parallelism::Sequential
        }
    };
    Ok(RunOptions {
        tolerances: Tolerances {
            grad: args.tol_grad,
            cluster: args.tol_cluster,
        },
        seed: match (args.seed_r, args.seed_gamma) {
            (None, None) => None,
            (r, g) => Some((r.unwrap_or(1.0), g.unwrap_or(0.0))),
        },
        quanta: None,
        parallelism,
    })
}

fn emit(args: &JobArgs, data: &str) -> Result<(), CliError> {
    match &args.output {
        Some(path) => {
            let mut file = fs::File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            file.write_all(data.as_bytes())
                .and_then(|_| if data.ends_with('\n') { Ok(()) } else { file.write_all(b"\n") })
                .map_err(|e| CliError::Usage(format!("write failed: {e}")))?;
            logln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            // tolerate a closed pipe (e.g. piping into head)
            let mut stdout = std::io::stdout().lock();
            let res = stdout
                .write_all(data.as_bytes())
                .and_then(|_| if data.ends_with('\n') { Ok(()) } else { stdout.write_all(b"\n") })
                .and_then(|_| stdout.flush());
            match res {
                Ok(()) => Ok(()),
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(CliError::Compute(format!("write failed: {e}"))),
            }
        }
    }
}

fn cmd_run(args: &JobArgs) -> Result<(), CliError> {
    let (spec, n_list) = build_spec(args)?;
    if n_list.len() != 1 {
        return Err(CliError::Usage(
            "run takes a single --N; use the sweep subcommand for ranges".into(),
        ));
    }
    let opts = run_options(args)?;
    let t0 = Instant::now();
    logln!("run: system={:?} N={} D={}", spec.system, spec.n, spec.d);
    let report = report::run(&spec, &opts).map_err(|e| CliError::Compute(e.to_string()))?;
    logln!("run finished in {:?}", t0.elapsed());
    let data = match args.format {
        Format::Json => report::to_json(&report).map_err(|e| CliError::Compute(e.to_string()))?,
        Format::Csv => report::frequency_csv(&[&report]),
    };
    emit(args, &data)
}

fn cmd_sweep(args: &JobArgs) -> Result<(), CliError> {
    let (spec, n_list) = build_spec(args)?;
    let opts = run_options(args)?;
    let t0 = Instant::now();
    logln!(
        "sweep: system={:?} N={:?} D={}",
        spec.system,
        (n_list.first(), n_list.last()),
        spec.d
    );
    let results =
        report::sweep(&spec, &n_list, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
    logln!("sweep finished in {:?}", t0.elapsed());

    let mut failures = 0usize;
    let data = match args.format {
        Format::Json => {
            let entries: Vec<serde_json::Value> = results
                .iter()
                .map(|(n, res)| match res {
                    Ok(report) => serde_json::json!({ "N": n, "report": report }),
                    Err(e) => {
                        failures += 1;
                        serde_json::json!({ "N": n, "error": e.to_string() })
                    }
                })
                .collect();
            serde_json::to_string_pretty(&entries)
                .map_err(|e| CliError::Compute(e.to_string()))?
        }
        Format::Csv => {
            let ok: Vec<_> = results
                .iter()
                .filter_map(|(_, res)| res.as_ref().ok())
                .collect();
            failures = results.len() - ok.len();
            report::frequency_csv(&ok)
        }
    };
    for (n, res) in &results {
        if let Err(e) = res {
            eprintln!("N = {n}: {e}");
        }
    }
    emit(args, &data)?;
    if failures > 0 {
        Err(CliError::Compute(format!(
            "{failures} of {} sweep entries failed",
            results.len()
        )))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Selftest => selftest::run_all(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
