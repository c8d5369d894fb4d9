//! The three subcommands. Each writes its artifacts into an output
//! directory and returns what it wrote.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use arxid::{compare_models, ClosedLoopSimulator, RationalTF};

use crate::config::{ExperimentConfig, DEFAULT_N_MONTECARLO, DEFAULT_N_SINGLE};
use crate::formats::{
    bode_csv, comparison_csv, to_json_pretty, EstimateJson, RecoveredJson, SingleSummary,
};
use crate::montecarlo::{run_monte_carlo, MonteCarloSummary};
use crate::{run_pipeline, write_file, CliError, PipelineRun};

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// One run seeded with `master_seed`. Writes `summary.json`,
/// `estimate.json`, `model.json`, `comparison.csv` and the Bode curves
/// `bode_G`, `bode_G_hat`, `bode_H`, `bode_H_hat`, `bode_H_uncorr`.
pub fn cmd_single(
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<(SingleSummary, PipelineRun), CliError> {
    let n = cfg.samples_or(DEFAULT_N_SINGLE);
    cfg.validate(n)?;
    let grid = cfg.grid.build()?;
    let sim = ClosedLoopSimulator::new(&cfg.spec)
        .map_err(|e| CliError::run("building the closed loop", e))?
        .with_warmup(cfg.warmup);
    let run = run_pipeline(&sim, n, cfg.orders, cfg.master_seed)
        .map_err(|e| CliError::run(format!("run with seed {}", cfg.master_seed), e))?;
    let cmp = compare_models(&run.model, &cfg.spec, &grid)
        .map_err(|e| CliError::run("frequency comparison", e))?;
    let ratio = cmp.uncorrected_ratio();

    let m = &run.model;
    let summary = SingleSummary {
        J_hat: m.j_hat,
        lambda_hat: m.lambda_hat,
        gain: m.gain,
        A_a_roots: m.anti_stable_roots().into_iter().map(Into::into).collect(),
        seed: cfg.master_seed,
        N: n,
        n_a: cfg.orders.n_a,
        n_b: cfg.orders.n_b,
        N_eff: run.estimate.n_eff,
        max_mag_error_G_db: cmp.max_mag_error_db_g(),
        max_mag_error_H_db: cmp.max_mag_error_db_h(),
        uncorrected_ratio_min: ratio.iter().copied().fold(f64::INFINITY, f64::min),
        uncorrected_ratio_max: ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };

    ensure_dir(out)?;
    write_file(out, "summary.json", &to_json_pretty(&summary))?;
    write_file(
        out,
        "estimate.json",
        &to_json_pretty(&EstimateJson::from(&run.estimate)),
    )?;
    write_file(out, "model.json", &to_json_pretty(&RecoveredJson::from(m)))?;
    write_file(out, "comparison.csv", &comparison_csv(&cmp))?;
    for (name, values) in [
        ("bode_G.csv", &cmp.g_true),
        ("bode_G_hat.csv", &cmp.g_hat),
        ("bode_H.csv", &cmp.h_true),
        ("bode_H_hat.csv", &cmp.h_hat),
        ("bode_H_uncorr.csv", &cmp.h_uncorrected),
    ] {
        write_file(out, name, &bode_csv(&cmp.omegas, values))?;
    }
    Ok((summary, run))
}

/// Writes `poles_n{n_a}.csv` and `mc_summary.json`.
pub fn cmd_montecarlo(
    cfg: &ExperimentConfig,
    out: &Path,
    threads: Option<usize>,
) -> Result<MonteCarloSummary, CliError> {
    let n = cfg.samples_or(DEFAULT_N_MONTECARLO);
    cfg.validate(n)?;
    let summary = run_monte_carlo(
        &cfg.spec,
        n,
        cfg.orders,
        cfg.runs,
        cfg.master_seed,
        cfg.warmup,
        threads,
    )?;
    ensure_dir(out)?;
    write_file(
        out,
        &format!("poles_n{}.csv", cfg.orders.n_a),
        &summary.poles_csv(),
    )?;
    write_file(out, "mc_summary.json", &to_json_pretty(&summary))?;
    Ok(summary)
}

/// True-system transfer functions that `bode` can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodeCurve {
    G,
    H,
    K,
    S,
    GS,
    HS,
    KHS,
}

impl BodeCurve {
    pub const ALL: [BodeCurve; 7] = [
        BodeCurve::G,
        BodeCurve::H,
        BodeCurve::K,
        BodeCurve::S,
        BodeCurve::GS,
        BodeCurve::HS,
        BodeCurve::KHS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BodeCurve::G => "G",
            BodeCurve::H => "H",
            BodeCurve::K => "K",
            BodeCurve::S => "S",
            BodeCurve::GS => "GS",
            BodeCurve::HS => "HS",
            BodeCurve::KHS => "KHS",
        }
    }
}

impl FromStr for BodeCurve {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        BodeCurve::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown transfer function {s:?}; expected one of G, H, K, S, GS, HS, KHS")
            })
    }
}

/// Writes `bode_{name}.csv` for each requested curve (default `G` and `H`).
pub fn cmd_bode(
    cfg: &ExperimentConfig,
    out: &Path,
    curves: &[BodeCurve],
) -> Result<Vec<PathBuf>, CliError> {
    let grid = cfg.grid.build()?;
    let spec = &cfg.spec;
    let cl = spec
        .closed_loop()
        .map_err(|e| CliError::run("building the closed loop", e))?;
    let curves = if curves.is_empty() {
        &[BodeCurve::G, BodeCurve::H][..]
    } else {
        curves
    };
    ensure_dir(out)?;
    let mut written = Vec::new();
    for &c in curves {
        let tf: RationalTF = match c {
            BodeCurve::G => spec.g(),
            BodeCurve::H => spec.h(),
            BodeCurve::K => spec.k.clone(),
            BodeCurve::S => cl.s.clone(),
            BodeCurve::GS => cl.gs.clone(),
            BodeCurve::HS => cl.hs.clone(),
            BodeCurve::KHS => cl.khs.clone(),
        };
        let values = tf
            .freq_response(&grid)
            .map_err(|e| CliError::run(format!("evaluating {}", c.name()), e))?;
        written.push(write_file(
            out,
            &format!("bode_{}.csv", c.name()),
            &bode_csv(grid.omegas(), &values),
        )?);
    }
    Ok(written)
}
