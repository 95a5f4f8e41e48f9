//! Config-driven experiment runner for `spectral-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::thread;

pub use config::{Config, Experiment, KINDS};
pub use error::CliError;
pub use experiments::{run_experiment, ExperimentResult, RunOptions};
pub use output::{write_outputs, RunReport};

/// Run every experiment of a config. Experiments run on separate threads;
/// results keep config order, and the first error by position wins.
pub fn run_config(cfg: &Config, opts: RunOptions, strict: bool) -> Result<RunReport, CliError> {
    let built = cfg
        .experiments
        .iter()
        .map(|e| e.validate().expect("configs are validated on load"))
        .collect::<Vec<_>>();
    let results = thread::scope(|s| {
        let handles: Vec<_> = cfg
            .experiments
            .iter()
            .zip(&built)
            .map(|(e, b)| s.spawn(move || run_experiment(e, b.as_ref(), opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(RunReport::new(results, strict))
}
