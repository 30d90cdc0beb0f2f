use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varorder::config::ExperimentConfig;
use varorder::experiment::{run_experiment, Experiment};
use varorder::Error;

#[derive(Parser)]
#[command(name = "varorder", version, about = "Run variable-order stable-like experiments and write CSV reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Key/value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for path simulation and sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Stable densities and their derivatives.
    Density,
    /// Parametrix transition densities, mass and correction scaling.
    Kernel,
    /// Local Hölder exponents and interpolation inequalities.
    Holder,
    /// Generator quadrature against semigroup limits.
    Generator,
    /// Hölder regularity of resolvent solutions.
    Schauder,
    /// Monte Carlo checks.
    Mc,
    /// Every acceptance check.
    VerifyAll,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Density => Experiment::Density,
            Command::Kernel => Experiment::Kernel,
            Command::Holder => Experiment::Holder,
            Command::Generator => Experiment::Generator,
            Command::Schauder => Experiment::Schauder,
            Command::Mc => Experiment::Mc,
            Command::VerifyAll => Experiment::VerifyAll,
        }
    }
}

const EXIT_NUMERIC_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(EXIT_CONFIG);
    };
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let which = Experiment::from(cli.command);
    let report = match run_experiment(&cfg, which, |c| println!("{}", c.summary())) {
        Ok(r) => r,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {which}: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {which}: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let written = match report.write(&cfg.out_dir) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: writing reports: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    for p in &written {
        println!("wrote {}", p.display());
    }
    let failed = report.rows.iter().filter(|r| !r.pass).count();
    println!(
        "{which}: {} ({} rows, {failed} failed, {:.1}s, seed {})",
        if report.pass() { "PASS" } else { "FAIL" },
        report.rows.len(),
        report.wall_time_s,
        report.seed
    );
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERIC_FAIL)
    }
}
