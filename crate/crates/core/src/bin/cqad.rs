use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cqad::config::{LoadedConfig, Manifest};
use cqad::experiments::{run_scenario, run_sweep, Profile, Scenario};
use cqad::gaussian::DriftVariant;
use cqad::validation::{run_validation, ValidationOptions};
use cqad::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "cqad", version, about = "Two-mode phonon entanglement from a driven qubit")]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "CQAD_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write `<name>_timeseries.csv`.
    Simulate(RunArgs),
    /// Run a parameter grid and write `<name>_grid.csv`.
    Sweep(RunArgs),
    /// Run the oracle suite.
    Validate {
        #[arg(long, hide = true)]
        mutate_drift_sign: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario (fig2a ... fig5b) or `custom`.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// JSON run config.
    #[arg(long, conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Re-run exactly what a previous manifest describes.
    #[arg(long, conflicts_with_all = ["scenario", "profile"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }

    fn solver(e: Error) -> Self {
        let mut message = e.to_string();
        if let Some(r) = e.report() {
            message.push_str(&format!(
                "\nmonitors: trace_drift={:.3e} hermiticity_drift={:.3e} leakage={:.3e} min_eigenvalue={:.3e} steps={} samples={}",
                r.trace_drift,
                r.hermiticity_drift,
                r.leakage,
                r.min_eigenvalue,
                r.steps,
                r.samples.len()
            ));
        }
        Failure {
            code: EXIT_SOLVER,
            message,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => run(&args, cli.threads, false),
        Command::Sweep(args) => run(&args, cli.threads, true),
        Command::Validate { mutate_drift_sign } => validate(mutate_drift_sign),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn validate(mutate: bool) -> Result<(), Failure> {
    let opts = ValidationOptions {
        drift_variant: if mutate {
            DriftVariant::FlippedCrossSign
        } else {
            DriftVariant::Physical
        },
    };
    let report = run_validation(opts).map_err(Failure::solver)?;
    print!("{}", report.to_text());
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: "validation suite failed".into(),
        })
    }
}

fn run(args: &RunArgs, threads: Option<usize>, sweep: bool) -> Result<(), Failure> {
    let (scenario, cfg_out, cfg_threads) = resolve(args)?;
    let threads = threads.or(cfg_threads).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    if threads == 0 {
        return Err(Failure::config("thread count must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    let out_dir = args.out.clone().or(cfg_out).unwrap_or_else(|| PathBuf::from("results"));
    if sweep && scenario.axes.is_empty() {
        return Err(Failure::config(format!("scenario {} has no sweep axes", scenario.name)));
    }

    let start = Instant::now();
    let table = pool
        .install(|| if sweep { run_sweep(&scenario) } else { run_scenario(&scenario) })
        .map_err(Failure::solver)?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&out_dir).map_err(|e| Failure::config(format!("{}: {e}", out_dir.display())))?;
    let (command, suffix) = if sweep { ("sweep", "grid") } else { ("simulate", "timeseries") };
    let csv = format!("{}_{suffix}.csv", scenario.name);
    write(&out_dir.join(&csv), &table.to_csv())?;
    let manifest = Manifest::new(command, &csv, &scenario, &table, wall, threads);
    write(&out_dir.join(format!("{}_manifest.json", scenario.name)), &manifest.to_json())?;
    println!("{}", out_dir.join(&csv).display());
    Ok(())
}

fn resolve(args: &RunArgs) -> Result<(Scenario, Option<PathBuf>, Option<usize>), Failure> {
    if let Some(path) = &args.manifest {
        let m = Manifest::read(path).map_err(Failure::config)?;
        return Ok((m.scenario, None, None));
    }
    let loaded = match &args.config {
        Some(path) => LoadedConfig::read(path),
        None => LoadedConfig::parse("{}"),
    }
    .map_err(Failure::config)?;
    let scenario = loaded
        .resolve(args.scenario.as_deref(), args.profile)
        .map_err(Failure::config)?;
    Ok((scenario, loaded.config.out.clone(), loaded.config.threads))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_SOLVER,
        message: format!("cannot write {}: {e}", path.display()),
    })
}
