use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spectral_cli::{run_config, write_outputs, CliError, Config, RunOptions, RunReport, KINDS};

const DEFAULT_OUT: &str = "spectral-out";

/// Eigenvalue experiments for weighted divergence-form operators.
#[derive(Debug, Parser)]
#[command(name = "spectral", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every experiment of a config and write the reports.
    Run {
        config: PathBuf,
        /// Grid for 1-D solves, cells per side for 2-D solves, sampling intervals for residuals.
        #[arg(long, value_name = "N", value_parser = parse_grid)]
        grid: Option<usize>,
        /// Richardson-extrapolate every 2-D spectrum.
        #[arg(long)]
        refine: bool,
        /// Output directory (default: the config's `output`, else `spectral-out`).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Treat warnings (not-applicable rows, optional failures) as failures.
        #[arg(long)]
        strict: bool,
    },
    /// List experiment kinds, or the experiments of a config.
    ListExperiments { config: Option<PathBuf> },
    /// Parse and validate a config without solving anything.
    ValidateConfig { config: PathBuf },
}

fn parse_grid(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 16 || n % 2 != 0 {
        return Err(format!("grid must be even and at least 16, got {n}"));
    }
    Ok(n)
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6e}")
    } else {
        "n/a".into()
    }
}

fn print_run(run: &RunReport) {
    for e in &run.experiments {
        let verdict = if e.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {} [{}]: {} reports, {} failed, {} warnings",
            e.name,
            e.kind,
            e.reports.len(),
            e.failures,
            e.warnings
        );
        for r in e.reports.iter().filter(|r| !r.pass || r.status != spectral_core::Status::Pass) {
            let k = r.k.map(|k| format!(" k={k}")).unwrap_or_default();
            let tag = if r.is_required_failure() { "fail" } else { "warn" };
            println!(
                "  {tag} {}{k}: lhs {} rhs {} margin {} {}",
                r.name,
                fmt(r.lhs),
                fmt(r.rhs),
                fmt(r.margin),
                r.note
            );
        }
    }
}

fn run(config: &Path, opts: RunOptions, out: Option<PathBuf>, strict: bool) -> Result<bool, CliError> {
    let cfg = Config::load(config)?;
    let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| DEFAULT_OUT.into());
    let report = run_config(&cfg, opts, strict)?;
    print_run(&report);
    for p in write_outputs(&dir, &report)? {
        println!("wrote {}", p.display());
    }
    println!("overall: {}", if report.pass { "PASS" } else { "FAIL" });
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            grid,
            refine,
            out,
            strict,
        } => run(&config, RunOptions { grid, refine }, out, strict),
        Command::ListExperiments { config: None } => {
            for (kind, what) in KINDS {
                println!("{kind:<11} {what}");
            }
            Ok(true)
        }
        Command::ListExperiments { config: Some(path) } => Config::load(&path).map(|cfg| {
            for e in &cfg.experiments {
                println!("{:<11} {}", e.kind(), e.name());
            }
            true
        }),
        Command::ValidateConfig { config } => Config::load(&config).map(|cfg| {
            println!("{}: {} experiments ok", config.display(), cfg.experiments.len());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
