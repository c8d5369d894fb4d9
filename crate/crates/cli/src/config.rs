//! Experiment configuration, read from a single JSON file.
//!
//! ```json
//! {
//!   "spec": {"L": [0, 1, -1.7], "Gamma": [1], "F": [1, -2, 2], "C": [1, 0.2],
//!            "D": [1, -0.9], "K_num": [1], "K_den": [1],
//!            "lambda_e": 1, "lambda_r": 1},
//!   "N": 100000, "n_a": 15, "n_b": 15, "runs": 50, "master_seed": 1,
//!   "grid": {"omega_min": 0.01, "omega_max": 3.141592653589793,
//!            "points": 200, "log_spaced": true},
//!   "warmup": 500, "output_dir": "out"
//! }
//! ```
//!
//! Every field is optional; missing fields take the benchmark values.
//! Polynomials are coefficient arrays, lowest order first.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use arxid::{ArxOrders, FreqGrid, Poly, RationalTF, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Samples per run when the config leaves `N` unset.
pub const DEFAULT_N_SINGLE: usize = 100_000;
pub const DEFAULT_N_MONTECARLO: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    #[serde(rename = "Gamma")]
    pub gamma: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    #[serde(rename = "K_num")]
    pub k_num: Vec<f64>,
    #[serde(rename = "K_den")]
    pub k_den: Vec<f64>,
    pub lambda_e: f64,
    #[serde(default = "one")]
    pub lambda_r: f64,
}

fn one() -> f64 {
    1.0
}

impl From<&SystemSpec> for SpecJson {
    fn from(s: &SystemSpec) -> Self {
        SpecJson {
            l: s.l.coeffs().to_vec(),
            gamma: s.gamma.coeffs().to_vec(),
            f: s.f.coeffs().to_vec(),
            c: s.c.coeffs().to_vec(),
            d: s.d.coeffs().to_vec(),
            k_num: s.k.num().coeffs().to_vec(),
            k_den: s.k.den().coeffs().to_vec(),
            lambda_e: s.lambda_e,
            lambda_r: s.lambda_r,
        }
    }
}

impl SpecJson {
    pub fn to_spec(&self) -> Result<SystemSpec, CliError> {
        let poly = |name: &str, c: &[f64]| {
            if c.is_empty() {
                Err(CliError::Config(format!(
                    "polynomial {name} has no coefficients"
                )))
            } else {
                Ok(Poly::new(c.to_vec()))
            }
        };
        let k = RationalTF::new(poly("K_num", &self.k_num)?, poly("K_den", &self.k_den)?)
            .map_err(|e| CliError::Config(format!("controller: {e}")))?;
        let spec = SystemSpec {
            l: poly("L", &self.l)?,
            gamma: poly("Gamma", &self.gamma)?,
            f: poly("F", &self.f)?,
            c: poly("C", &self.c)?,
            d: poly("D", &self.d)?,
            k,
            lambda_e: self.lambda_e,
            lambda_r: self.lambda_r,
        };
        spec.validate()
            .map_err(|e| CliError::Config(format!("system: {e}")))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub log_spaced: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            omega_min: 1e-2,
            omega_max: PI,
            points: 200,
            log_spaced: true,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<FreqGrid, CliError> {
        let g = if self.log_spaced {
            FreqGrid::log_spaced(self.omega_min, self.omega_max, self.points)
        } else {
            FreqGrid::linear(self.omega_min, self.omega_max, self.points)
        };
        g.map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    spec: Option<SpecJson>,
    #[serde(rename = "N")]
    n: Option<usize>,
    n_a: Option<usize>,
    n_b: Option<usize>,
    runs: Option<usize>,
    master_seed: Option<u64>,
    #[serde(default)]
    grid: GridConfig,
    warmup: Option<usize>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: SystemSpec,
    /// `None` picks [`DEFAULT_N_SINGLE`] or [`DEFAULT_N_MONTECARLO`].
    pub n: Option<usize>,
    pub orders: ArxOrders,
    pub runs: usize,
    pub master_seed: u64,
    pub grid: GridConfig,
    pub warmup: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            spec: SystemSpec::benchmark(),
            n: None,
            orders: ArxOrders::new(15, 15),
            runs: 50,
            master_seed: 1,
            grid: GridConfig::default(),
            warmup: arxid::sim::DEFAULT_WARMUP,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: ConfigFile = serde_json::from_str(text)?;
        let d = ExperimentConfig::default();
        let spec = match file.spec {
            Some(s) => s.to_spec()?,
            None => d.spec,
        };
        let cfg = ExperimentConfig {
            spec,
            n: file.n,
            orders: ArxOrders::new(
                file.n_a.unwrap_or(d.orders.n_a),
                file.n_b.unwrap_or(d.orders.n_b),
            ),
            runs: file.runs.unwrap_or(d.runs),
            master_seed: file.master_seed.unwrap_or(d.master_seed),
            grid: file.grid,
            warmup: file.warmup.unwrap_or(d.warmup),
            output_dir: file.output_dir.unwrap_or(d.output_dir),
        };
        cfg.validate(cfg.n.unwrap_or(DEFAULT_N_MONTECARLO))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    /// Checks `runs >= 1`, `N > 2 (n_a + n_b)` and the grid range.
    pub fn validate(&self, n: usize) -> Result<(), CliError> {
        if self.runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        if self.orders.n_a == 0 || self.orders.n_b == 0 {
            return Err(CliError::Config("n_a and n_b must be positive".into()));
        }
        if n <= 2 * self.orders.params() {
            return Err(CliError::Config(format!(
                "N = {n} must exceed 2 (n_a + n_b) = {}",
                2 * self.orders.params()
            )));
        }
        let g = &self.grid;
        if !(g.omega_min > 0.0 && g.omega_min < g.omega_max && g.omega_max <= PI) {
            return Err(CliError::Config(
                "grid must satisfy 0 < omega_min < omega_max <= pi".into(),
            ));
        }
        self.grid.build()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_benchmark() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.spec, SystemSpec::benchmark());
    }

    #[test]
    fn spec_round_trip() {
        let json = serde_json::to_string(&SpecJson::from(&SystemSpec::benchmark())).unwrap();
        assert!(json.contains("\"K_num\":[1.0]"));
        let back: SpecJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_spec().unwrap(), SystemSpec::benchmark());
    }

    #[test]
    fn overrides() {
        let cfg = ExperimentConfig::from_json(
            r#"{"N": 5000, "n_a": 3, "n_b": 4, "runs": 2, "master_seed": 9}"#,
        )
        .unwrap();
        assert_eq!(cfg.n, Some(5000));
        assert_eq!(cfg.orders, ArxOrders::new(3, 4));
        assert_eq!((cfg.runs, cfg.master_seed), (2, 9));
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            r#"{"runs": 0}"#,
            r#"{"N": 60}"#,
            r#"{"grid": {"omega_min": 0.0}}"#,
            r#"{"grid": {"omega_max": 4.0}}"#,
            r#"{"bogus": 1}"#,
            r#"{"spec": {"L": [0, 1], "Gamma": [1], "F": [2, 1], "C": [1], "D": [1], "K_num": [1], "K_den": [1], "lambda_e": 1}}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }
}
