use std::path::PathBuf;

use anyhow::{Context, Result};
use arxid_cli::{cmd_bode, cmd_montecarlo, cmd_single, BodeCurve, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "arxid",
    version,
    about = "Closed-loop ARX identification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment configuration; the benchmark system when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    na: Option<usize>,
    #[arg(long, global = true)]
    nb: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One simulate, estimate, recover pass with summary and Bode curves.
    Single,
    /// Repeated runs with pooled root and noise-variance statistics.
    Montecarlo {
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Bode data of the true system's transfer functions.
    Bode {
        /// Curves to emit: G, H, K, S, GS, HS, KHS (repeatable).
        #[arg(long = "tf")]
        curves: Vec<BodeCurve>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = cli.na {
        cfg.orders.n_a = n;
    }
    if let Some(n) = cli.nb {
        cfg.orders.n_b = n;
    }
    let out = cli.out.unwrap_or_else(|| cfg.output_dir.clone());

    match cli.command {
        Command::Single => {
            let (s, _) = cmd_single(&cfg, &out).context("single run failed")?;
            println!("J_hat      {}", s.J_hat);
            println!("lambda_hat {}", s.lambda_hat);
            println!("gain       {}", s.gain);
            for r in &s.A_a_roots {
                println!("anti-stable root {:+.6} {:+.6}i", r.re, r.im);
            }
        }
        Command::Montecarlo { runs, threads } => {
            if let Some(r) = runs {
                cfg.runs = r;
            }
            let s = cmd_montecarlo(&cfg, &out, threads).context("Monte Carlo failed")?;
            println!(
                "{} runs, {} failed, N = {}, orders ({}, {})",
                s.runs, s.failures, s.N, s.n_a, s.n_b
            );
            if let Some(l) = s.lambda_hat {
                println!("lambda_hat mean {} std {:?}", l.mean, l.std);
            }
            for t in &s.unstable_roots {
                println!(
                    "root near {:+} {:+}i: re {} (std {:?}), im {} (std {:?})",
                    t.target.re, t.target.im, t.re.mean, t.re.std, t.im.mean, t.im.std
                );
            }
        }
        Command::Bode { curves } => {
            for p in cmd_bode(&cfg, &out, &curves).context("bode failed")? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
