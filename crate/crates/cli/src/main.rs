//! `lab`: run, validate and list the experiments of the sublab crate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sublab::bernstein::Family;
use sublab::experiments::{self, exit_code, ExperimentConfig, CONFIG_ERROR_CODE};
use sublab::LabError;

/// Exit code for I/O failures and numerical errors that abort a run.
const RUN_ERROR_CODE: u8 = 1;

#[derive(Parser)]
#[command(name = "lab", version, about = "Subordinate Brownian motion boundary-behaviour experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's `out`, else $LAB_OUT/<config stem>, else runs/<config stem>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte Carlo worker threads; results do not depend on it. 0 uses every core.
        #[arg(long)]
        workers: Option<usize>,
        /// Override mc.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Default output root.
        #[arg(long, env = "LAB_OUT", hide = true)]
        out_root: Option<PathBuf>,
    },
    /// Parse a config and check its hypotheses without running anything.
    Validate { config: PathBuf },
    /// List the Bernstein families with their formulas and parameter ranges.
    Families,
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn config_failure(e: &LabError) -> ExitCode {
    eprintln!("lab: {e}");
    let code = match e {
        LabError::Config(_) | LabError::Hypothesis(_) | LabError::Parameter(_) | LabError::Domain(_) => CONFIG_ERROR_CODE as u8,
        _ => RUN_ERROR_CODE,
    };
    ExitCode::from(code)
}

fn families() -> ExitCode {
    for f in Family::ALL {
        println!("{:<22} {}", f.tag(), f.formula());
        println!("{:<22} parameters: {}", "", f.parameter_ranges());
        if let Ok(phi) = f.default_params().build() {
            println!("{:<22} default: {}", "", phi.describe());
        }
    }
    ExitCode::SUCCESS
}

fn validate(path: &Path) -> ExitCode {
    let cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    match cfg.validate() {
        Ok(h) => {
            println!("{}: {} config is valid", path.display(), cfg.experiment);
            for v in &h.violations {
                println!("counterexample mode: {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => config_failure(&e),
    }
}

fn run(path: &Path, out: Option<PathBuf>, workers: Option<usize>, seed: Option<u64>, out_root: Option<PathBuf>) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if let Some(w) = workers {
        cfg.mc.workers = w;
    }
    if let Some(s) = seed {
        cfg.mc.seed = s;
    }
    let dir = out
        .or_else(|| cfg.out.clone())
        .or_else(|| out_root.map(|r| r.join(stem(path))))
        .unwrap_or_else(|| Path::new("runs").join(stem(path)));
    let output = match experiments::run(&cfg) {
        Ok(o) => o,
        Err(e @ (LabError::Config(_) | LabError::Hypothesis(_))) => return config_failure(&e),
        Err(e) => {
            eprintln!("lab: run failed: {e}");
            return ExitCode::from(RUN_ERROR_CODE);
        }
    };
    if let Err(e) = output.write(&dir, cfg.mc.workers) {
        eprintln!("lab: cannot write {}: {e}", dir.display());
        return ExitCode::from(RUN_ERROR_CODE);
    }
    let r = &output.report;
    for c in &r.checks {
        let mark = if c.expected_violation { " (expected violation)" } else { "" };
        println!("{:<13} {}{mark}", c.verdict.to_string(), c.name);
    }
    println!("overall: {} ({} checks, {:.1} s) -> {}", r.overall, r.checks.len(), output.wall_clock_s, dir.display());
    ExitCode::from(exit_code(r.overall) as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, workers, seed, out_root } => run(&config, out, workers, seed, out_root),
        Command::Validate { config } => validate(&config),
        Command::Families => families(),
    }
}
