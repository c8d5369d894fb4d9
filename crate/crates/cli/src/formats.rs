//! JSON and CSV encodings of estimates, recovered models and curves.
//!
//! Floats are written in their shortest round-trip form, so the same values
//! always produce the same bytes.

use std::fmt::Write;

use arxid::recover::{db, phase_deg};
use arxid::{ArxEstimate, Complex64, ModelComparison, RationalTF, RecoveredModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateJson {
    pub A: Vec<f64>,
    pub B: Vec<f64>,
    pub J_hat: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub N_eff: usize,
}

impl From<&ArxEstimate> for EstimateJson {
    fn from(e: &ArxEstimate) -> Self {
        EstimateJson {
            A: e.a.coeffs().to_vec(),
            B: e.b.coeffs().to_vec(),
            J_hat: e.j_hat,
            n_a: e.orders.n_a,
            n_b: e.orders.n_b,
            N_eff: e.n_eff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfJson {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl From<&RationalTF> for TfJson {
    fn from(tf: &RationalTF) -> Self {
        TfJson {
            num: tf.num().coeffs().to_vec(),
            den: tf.den().coeffs().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootJson {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub class: String,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredJson {
    pub G_hat: TfJson,
    pub H_hat: TfJson,
    pub H_uncorrected: TfJson,
    pub lambda_hat: f64,
    pub J_hat: f64,
    pub gain: f64,
    pub A_a: Vec<f64>,
    pub A_a_mirror: Vec<f64>,
    pub A_roots: Vec<RootJson>,
}

impl From<&RecoveredModel> for RecoveredJson {
    fn from(m: &RecoveredModel) -> Self {
        RecoveredJson {
            G_hat: (&m.g_hat).into(),
            H_hat: (&m.h_hat).into(),
            H_uncorrected: (&m.h_uncorrected).into(),
            lambda_hat: m.lambda_hat,
            J_hat: m.j_hat,
            gain: m.gain,
            A_a: m.a_anti.coeffs().to_vec(),
            A_a_mirror: m.a_anti_mirror.coeffs().to_vec(),
            A_roots: m
                .a_roots
                .iter()
                .map(|r| RootJson {
                    re: r.value.re,
                    im: r.value.im,
                    multiplicity: r.multiplicity,
                    class: r.class.as_str().to_string(),
                })
                .collect(),
        }
    }
}

/// Contents of `summary.json` for a single run.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleSummary {
    pub J_hat: f64,
    pub lambda_hat: f64,
    pub gain: f64,
    pub A_a_roots: Vec<ComplexJson>,
    pub seed: u64,
    pub N: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub N_eff: usize,
    pub max_mag_error_G_db: f64,
    pub max_mag_error_H_db: f64,
    pub uncorrected_ratio_min: f64,
    pub uncorrected_ratio_max: f64,
}

/// `omega,mag_db,phase_deg`, one row per frequency.
pub fn bode_csv(omegas: &[f64], values: &[Complex64]) -> String {
    let mut s = String::from("omega,mag_db,phase_deg\n");
    for (w, v) in omegas.iter().zip(values) {
        writeln!(s, "{},{},{}", w, db(*v), phase_deg(*v)).unwrap();
    }
    s
}

pub fn comparison_csv(cmp: &ModelComparison) -> String {
    let mut s = String::from(
        "omega,mag_G_true_db,mag_G_hat_db,mag_H_true_db,mag_H_hat_db,mag_H_uncorr_db\n",
    );
    for k in 0..cmp.len() {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            cmp.omegas[k],
            db(cmp.g_true[k]),
            db(cmp.g_hat[k]),
            db(cmp.h_true[k]),
            db(cmp.h_hat[k]),
            db(cmp.h_uncorrected[k])
        )
        .unwrap();
    }
    s
}

/// Parses a `omega,mag_db,phase_deg` file back into rows.
pub fn parse_bode_csv(text: &str) -> Option<Vec<[f64; 3]>> {
    let mut lines = text.lines();
    if lines.next()? != "omega,mag_db,phase_deg" {
        return None;
    }
    lines
        .map(|l| {
            let mut it = l.split(',').map(|f| f.parse::<f64>().ok());
            Some([it.next()??, it.next()??, it.next()??])
        })
        .collect()
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use arxid::{FreqGrid, Poly, SystemSpec};

    #[test]
    fn estimate_json_keys() {
        let est =
            ArxEstimate::from_polys(Poly::new(vec![1.0, -0.5]), Poly::new(vec![0.0, 2.0]), 0.25)
                .unwrap();
        let v = serde_json::to_value(EstimateJson::from(&est)).unwrap();
        for key in ["A", "B", "J_hat", "n_a", "n_b", "N_eff"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["A"], serde_json::json!([1.0, -0.5]));
    }

    #[test]
    fn identity_bode_is_flat() {
        let grid = FreqGrid::default_bode();
        let tf = RationalTF::one();
        let text = bode_csv(grid.omegas(), &tf.freq_response(&grid).unwrap());
        let rows = parse_bode_csv(&text).unwrap();
        assert_eq!(rows.len(), 200);
        assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
    }

    #[test]
    fn noise_model_low_frequency_gain() {
        let h = SystemSpec::benchmark().h();
        let rows = parse_bode_csv(&bode_csv(&[1e-4], &[h.eval_freq(1e-4).unwrap()])).unwrap();
        assert!((rows[0][1] - 20.0 * 12f64.log10()).abs() < 1e-3);
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(parse_bode_csv("omega,mag\n1,2\n").is_none());
        assert!(parse_bode_csv("omega,mag_db,phase_deg\n1,x,3\n").is_none());
    }
}
