//! Experiment runner on top of `arxid`: JSON configuration, single-run and
//! Monte Carlo pipelines, and the CSV/JSON artifacts they write.

use std::path::{Path, PathBuf};

pub mod commands;
pub mod config;
pub mod formats;
pub mod montecarlo;

pub use commands::{cmd_bode, cmd_montecarlo, cmd_single, BodeCurve};
pub use config::ExperimentConfig;
pub use montecarlo::{run_monte_carlo, MonteCarloSummary};

use arxid::{estimate_arx, recover, ArxEstimate, ArxOrders, ClosedLoopSimulator, RecoveredModel};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: arxid::Error,
    },
    #[error("{failed} of {runs} Monte Carlo runs failed (more than 10%)")]
    TooManyFailures { failed: usize, runs: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn run(context: impl Into<String>, source: arxid::Error) -> Self {
        CliError::Run {
            context: context.into(),
            source,
        }
    }
}

/// One simulate, estimate, recover pass.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub seed: u64,
    pub estimate: ArxEstimate,
    pub model: RecoveredModel,
}

pub fn run_pipeline(
    sim: &ClosedLoopSimulator,
    n: usize,
    orders: ArxOrders,
    seed: u64,
) -> arxid::Result<PipelineRun> {
    let rec = sim.run(n, seed)?;
    let estimate = estimate_arx(&rec.y, &rec.u, orders)?;
    let model = recover(&estimate)?;
    Ok(PipelineRun {
        seed,
        estimate,
        model,
    })
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
