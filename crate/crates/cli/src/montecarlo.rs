//! Independent simulate, estimate, recover runs and their pooled statistics.
//!
//! Run `k` is seeded with `derive_seed(master_seed, k)` and results are
//! collected in run order, so the summary does not depend on how many worker
//! threads executed the runs.
//!
//! High-order fits often place extra anti-stable roots just outside the unit
//! circle. The unstable poles being estimated are therefore tracked by
//! matching each true anti-stable root of `F` to the nearest unused
//! anti-stable root of each run's `A`.

use std::fmt::Write;

use arxid::{derive_seed, ArxOrders, ClosedLoopSimulator, Complex64, RootClass, SystemSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::formats::ComplexJson;
use crate::{run_pipeline, CliError};

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub J_hat: Option<f64>,
    pub lambda_hat: Option<f64>,
    pub gain: Option<f64>,
    pub antistable_roots: Vec<ComplexJson>,
    /// Matched to the true anti-stable roots, in the same order.
    pub tracked_roots: Vec<ComplexJson>,
    /// Every root of `A` with its class, multiplicities expanded.
    #[serde(skip)]
    pub roots: Vec<(Complex64, RootClass)>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    fn failed(run: usize, seed: u64, msg: String) -> Self {
        RunRecord {
            run,
            seed,
            failure: Some(msg),
            J_hat: None,
            lambda_hat: None,
            gain: None,
            antistable_roots: Vec::new(),
            tracked_roots: Vec::new(),
            roots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; absent with fewer than two values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.len() > 1)
            .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        Some(Stat { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackedRootStat {
    pub target: ComplexJson,
    pub re: Stat,
    pub im: Stat,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub n_a: usize,
    pub n_b: usize,
    pub N: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub failures: usize,
    pub J_hat: Option<Stat>,
    pub lambda_hat: Option<Stat>,
    pub unstable_roots: Vec<TrackedRootStat>,
    /// `sqrt` of the mean variance over tracked roots and coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unstable_pooled_std: Option<f64>,
    /// Same for the stable roots, each matched across runs to its nearest
    /// counterpart in the first successful run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable_pooled_std: Option<f64>,
    pub records: Vec<RunRecord>,
}

impl MonteCarloSummary {
    /// Largest per-coordinate std over the tracked unstable roots.
    pub fn max_unstable_std(&self) -> Option<f64> {
        self.unstable_roots
            .iter()
            .flat_map(|t| [t.re.std, t.im.std])
            .try_fold(0.0f64, |m, s| s.map(|s| m.max(s)))
            .filter(|_| !self.unstable_roots.is_empty())
    }

    /// `run,re,im,class` for every root of every successful run.
    pub fn poles_csv(&self) -> String {
        let mut s = String::from("run,re,im,class\n");
        for rec in self.records.iter().filter(|r| r.is_ok()) {
            for (z, class) in &rec.roots {
                writeln!(s, "{},{},{},{}", rec.run, z.re, z.im, class.as_str()).unwrap();
            }
        }
        s
    }
}

/// Pairs of `(index into a, index into b)`, closest pairs first.
fn greedy_match(a: &[Complex64], b: &[Complex64]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Targets in order; the nearest unused candidate for each, if any remain.
fn track(targets: &[Complex64], candidates: &[Complex64]) -> Option<Vec<Complex64>> {
    let mut used = vec![false; candidates.len()];
    targets
        .iter()
        .map(|t| {
            let (j, _) = candidates
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .min_by(|x, y| (x.1 - t).norm().total_cmp(&(y.1 - t).norm()))?;
            used[j] = true;
            Some(candidates[j])
        })
        .collect()
}

fn pooled_std(slots: &[Vec<Complex64>]) -> Option<f64> {
    let mut acc = 0.0;
    let mut count = 0usize;
    for slot in slots.iter().filter(|s| s.len() > 1) {
        let re: Vec<f64> = slot.iter().map(|z| z.re).collect();
        let im: Vec<f64> = slot.iter().map(|z| z.im).collect();
        for v in [re, im] {
            let s = Stat::of(&v)?.std?;
            acc += s * s;
            count += 1;
        }
    }
    (count > 0).then(|| (acc / count as f64).sqrt())
}

/// Pools the scatter of root sets whose members have no fixed identity:
/// every set is matched to the first one by nearest neighbour.
pub fn matched_pooled_std(sets: &[Vec<Complex64>]) -> Option<f64> {
    let (reference, rest) = sets.split_first()?;
    let mut slots: Vec<Vec<Complex64>> = reference.iter().map(|&z| vec![z]).collect();
    for set in rest {
        for (i, j) in greedy_match(reference, set) {
            slots[i].push(set[j]);
        }
    }
    pooled_std(&slots)
}

fn one_run(
    sim: &ClosedLoopSimulator,
    n: usize,
    orders: ArxOrders,
    run: usize,
    seed: u64,
    targets: &[Complex64],
) -> RunRecord {
    let out = match run_pipeline(sim, n, orders, seed) {
        Ok(out) => out,
        Err(e) => return RunRecord::failed(run, seed, e.to_string()),
    };
    let m = &out.model;
    let anti = m.anti_stable_roots();
    let Some(tracked) = track(targets, &anti) else {
        return RunRecord::failed(
            run,
            seed,
            "fewer anti-stable roots than the true system".into(),
        );
    };
    let roots = m
        .a_roots
        .iter()
        .flat_map(|r| std::iter::repeat_n((r.value, r.class), r.multiplicity))
        .collect();
    RunRecord {
        run,
        seed,
        failure: None,
        J_hat: Some(m.j_hat),
        lambda_hat: Some(m.lambda_hat),
        gain: Some(m.gain),
        antistable_roots: anti.into_iter().map(Into::into).collect(),
        tracked_roots: tracked.into_iter().map(Into::into).collect(),
        roots,
    }
}

/// Anti-stable roots of the true `F`, multiplicities expanded.
pub fn true_unstable_roots(spec: &SystemSpec) -> arxid::Result<Vec<Complex64>> {
    Ok(spec.f.roots()?.of_class(RootClass::AntiStable).collect())
}

pub fn summarize(
    spec: &SystemSpec,
    n: usize,
    orders: ArxOrders,
    master_seed: u64,
    records: Vec<RunRecord>,
) -> arxid::Result<MonteCarloSummary> {
    let targets = true_unstable_roots(spec)?;
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let j: Vec<f64> = ok.iter().filter_map(|r| r.J_hat).collect();
    let lam: Vec<f64> = ok.iter().filter_map(|r| r.lambda_hat).collect();

    let tracked_slots: Vec<Vec<Complex64>> = (0..targets.len())
        .map(|k| {
            ok.iter()
                .map(|r| Complex64::new(r.tracked_roots[k].re, r.tracked_roots[k].im))
                .collect()
        })
        .collect();
    let unstable_roots = targets
        .iter()
        .zip(&tracked_slots)
        .filter_map(|(t, slot)| {
            let re: Vec<f64> = slot.iter().map(|z| z.re).collect();
            let im: Vec<f64> = slot.iter().map(|z| z.im).collect();
            Some(TrackedRootStat {
                target: (*t).into(),
                re: Stat::of(&re)?,
                im: Stat::of(&im)?,
            })
        })
        .collect();
    let stable_sets: Vec<Vec<Complex64>> = ok
        .iter()
        .map(|r| {
            r.roots
                .iter()
                .filter(|(_, c)| *c == RootClass::Stable)
                .map(|(z, _)| *z)
                .collect()
        })
        .collect();

    Ok(MonteCarloSummary {
        n_a: orders.n_a,
        n_b: orders.n_b,
        N: n,
        runs: records.len(),
        master_seed,
        failures: records.len() - ok.len(),
        J_hat: Stat::of(&j),
        lambda_hat: Stat::of(&lam),
        unstable_roots,
        unstable_pooled_std: pooled_std(&tracked_slots),
        stable_pooled_std: matched_pooled_std(&stable_sets),
        records,
    })
}

/// Runs `runs` pipelines on `threads` workers (the global pool when `None`).
/// More than 10% failed runs is an error.
pub fn run_monte_carlo(
    spec: &SystemSpec,
    n: usize,
    orders: ArxOrders,
    runs: usize,
    master_seed: u64,
    warmup: usize,
    threads: Option<usize>,
) -> Result<MonteCarloSummary, CliError> {
    let sim = ClosedLoopSimulator::new(spec)
        .map_err(|e| CliError::run("building the closed loop", e))?
        .with_warmup(warmup);
    let targets = true_unstable_roots(spec).map_err(|e| CliError::run("factoring F", e))?;
    let work = || -> Vec<RunRecord> {
        (0..runs)
            .into_par_iter()
            .map(|run| {
                one_run(
                    &sim,
                    n,
                    orders,
                    run,
                    derive_seed(master_seed, run as u64),
                    &targets,
                )
            })
            .collect()
    };
    let records = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed * 10 > runs {
        return Err(CliError::TooManyFailures { failed, runs });
    }
    summarize(spec, n, orders, master_seed, records).map_err(|e| CliError::run("summarizing", e))
}
