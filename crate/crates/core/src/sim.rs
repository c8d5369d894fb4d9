//! Seeded Gaussian signals and closed-loop simulation.
//!
//! Every closed-loop path (`GS`, `HS`, `S`, `KHS`) runs as its own
//! direct-form difference equation from zero initial conditions; the first
//! `warmup` samples are discarded.
//!
//! Seeds: a record seeded with `s` draws its reference from
//! `derive_seed(s, 0)` and its innovations from `derive_seed(s, 1)`, each a
//! ChaCha20 stream. Monte Carlo runs use `derive_seed(master, run)`, so a
//! run's data never depends on which worker produced it.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::ltisys::{ClosedLoop, RationalTF, SystemSpec};
use crate::{Error, Result};

pub const DEFAULT_WARMUP: usize = 500;

const REFERENCE_STREAM: u64 = 0;
const INNOVATION_STREAM: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0x6A09_E667_F3BC_C909)))
}

/// `n` i.i.d. zero-mean Gaussian draws with the given variance.
pub fn gaussian_white(n: usize, variance: f64, seed: u64) -> Vec<f64> {
    if variance == 0.0 {
        return vec![0.0; n];
    }
    let sd = variance.sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            sd * z
        })
        .collect()
}

/// Runs `den(q) y = num(q) x` from rest. `den` must be monic.
pub fn filter(tf: &RationalTF, x: &[f64]) -> Vec<f64> {
    let b = tf.num().coeffs();
    let a = tf.den().coeffs();
    let mut y = vec![0.0; x.len()];
    for t in 0..x.len() {
        let mut acc = 0.0;
        for (k, &bk) in b.iter().enumerate().take(t + 1) {
            acc += bk * x[t - k];
        }
        for (k, &ak) in a.iter().enumerate().skip(1).take(t) {
            acc -= ak * y[t - k];
        }
        y[t] = acc;
    }
    y
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub e: Vec<f64>,
    pub seed: u64,
}

impl SignalRecord {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ClosedLoopSimulator {
    spec: SystemSpec,
    loop_tfs: ClosedLoop,
    warmup: usize,
}

impl ClosedLoopSimulator {
    /// Fails with [`Error::UnstableClosedLoop`] if `K` does not stabilize
    /// all four closed-loop paths.
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        let loop_tfs = spec.closed_loop()?;
        loop_tfs.check_stable()?;
        Ok(ClosedLoopSimulator {
            spec: spec.clone(),
            loop_tfs,
            warmup: DEFAULT_WARMUP,
        })
    }

    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn closed_loop(&self) -> &ClosedLoop {
        &self.loop_tfs
    }

    /// `n` retained samples driven by fresh white reference and innovations.
    pub fn run(&self, n: usize, seed: u64) -> Result<SignalRecord> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be positive"));
        }
        let total = n + self.warmup;
        let r = gaussian_white(
            total,
            self.spec.lambda_r,
            derive_seed(seed, REFERENCE_STREAM),
        );
        let e = gaussian_white(
            total,
            self.spec.lambda_e,
            derive_seed(seed, INNOVATION_STREAM),
        );
        let mut rec = self.run_with_signals(&r, &e)?;
        rec.seed = seed;
        Ok(rec)
    }

    /// Drives the loop with caller-supplied signals (warmup included); the
    /// returned record holds the last `len - warmup` samples.
    pub fn run_with_signals(&self, r: &[f64], e: &[f64]) -> Result<SignalRecord> {
        if r.len() != e.len() {
            return Err(Error::LengthMismatch(r.len(), e.len()));
        }
        if r.len() <= self.warmup {
            return Err(Error::InvalidArgument("signals shorter than the warmup"));
        }
        let cl = &self.loop_tfs;
        let gs_r = filter(&cl.gs, r);
        let hs_e = filter(&cl.hs, e);
        let s_r = filter(&cl.s, r);
        let khs_e = filter(&cl.khs, e);
        let w = self.warmup;
        Ok(SignalRecord {
            y: gs_r[w..]
                .iter()
                .zip(&hs_e[w..])
                .map(|(a, b)| a + b)
                .collect(),
            u: s_r[w..]
                .iter()
                .zip(&khs_e[w..])
                .map(|(a, b)| a - b)
                .collect(),
            r: r[w..].to_vec(),
            e: e[w..].to_vec(),
            seed: 0,
        })
    }
}

pub fn simulate_closed_loop(spec: &SystemSpec, n: usize, seed: u64) -> Result<SignalRecord> {
    ClosedLoopSimulator::new(spec)?.run(n, seed)
}
