use std::path::Path;
use std::process::Command;

use arxid::{derive_seed, ArxOrders, Poly, SystemSpec};
use arxid_cli::formats::{parse_bode_csv, SingleSummary};
use arxid_cli::{cmd_bode, cmd_montecarlo, cmd_single, BodeCurve, CliError, ExperimentConfig};

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn summary(dir: &Path) -> SingleSummary {
    serde_json::from_str(&read(dir, "summary.json")).unwrap()
}

#[test]
fn single_benchmark_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        master_seed: 3,
        ..Default::default()
    };
    cmd_single(&cfg, dir.path()).unwrap();
    let s = summary(dir.path());
    assert_eq!(s.N, 100_000);
    assert!((3.7..=4.3).contains(&s.J_hat), "{}", s.J_hat);
    assert!((0.95..=1.05).contains(&s.lambda_hat), "{}", s.lambda_hat);
    assert_eq!(s.A_a_roots.len(), 2);
    assert_eq!(s.J_hat / s.gain, s.lambda_hat);

    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    for key in ["J_hat", "lambda_hat", "gain", "A_a_roots"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for name in [
        "bode_G.csv",
        "bode_G_hat.csv",
        "bode_H.csv",
        "bode_H_hat.csv",
        "bode_H_uncorr.csv",
    ] {
        assert_eq!(
            parse_bode_csv(&read(dir.path(), name)).unwrap().len(),
            200,
            "{name}"
        );
    }
    assert!(read(dir.path(), "comparison.csv").starts_with(
        "omega,mag_G_true_db,mag_G_hat_db,mag_H_true_db,mag_H_hat_db,mag_H_uncorr_db\n"
    ));

    // The uncorrected noise model sits about 20 log10(1/2) below H.
    let h = parse_bode_csv(&read(dir.path(), "bode_H.csv")).unwrap();
    let hu = parse_bode_csv(&read(dir.path(), "bode_H_uncorr.csv")).unwrap();
    let mut offsets: Vec<f64> = h.iter().zip(&hu).map(|(a, b)| b[1] - a[1]).collect();
    offsets.sort_by(f64::total_cmp);
    let median = offsets[offsets.len() / 2];
    assert!((median + 6.02).abs() < 0.5, "{median}");
}

#[test]
fn stable_plant_needs_no_correction() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.spec.f = Poly::new(vec![1.0, -1.0, 0.8]);
    cmd_single(&cfg, dir.path()).unwrap();
    let s = summary(dir.path());
    assert_eq!(s.gain, 1.0);
    assert_eq!(s.lambda_hat, s.J_hat);
    assert!(s.A_a_roots.is_empty());
    assert_eq!(
        read(dir.path(), "bode_H_hat.csv"),
        read(dir.path(), "bode_H_uncorr.csv")
    );
}

#[test]
fn noise_free_data_is_fit_exactly_at_true_orders() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig {
        n: Some(2000),
        orders: ArxOrders::new(2, 2),
        ..Default::default()
    };
    cfg.spec.lambda_e = 0.0;
    let (s, run) = cmd_single(&cfg, dir.path()).unwrap();
    assert!(s.J_hat < 1e-10, "{}", s.J_hat);
    for (a, b) in run.estimate.a.coeffs().iter().zip([1.0, -2.0, 2.0]) {
        assert!((a - b).abs() < 1e-8);
    }

    // Above the true orders the noise-free regressors are collinear.
    cfg.orders = ArxOrders::new(15, 15);
    match cmd_single(&cfg, dir.path()) {
        Err(CliError::Run {
            source: arxid::Error::RankDeficient { .. },
            ..
        }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn montecarlo_single_run_matches_single_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n: Some(5000),
        runs: 1,
        master_seed: 21,
        ..Default::default()
    };
    let mc = cmd_montecarlo(&cfg, dir.path(), Some(1)).unwrap();
    let single_cfg = ExperimentConfig {
        master_seed: derive_seed(21, 0),
        ..cfg.clone()
    };
    let (s, _) = cmd_single(&single_cfg, &dir.path().join("single")).unwrap();

    assert_eq!(mc.J_hat.unwrap().mean, s.J_hat);
    assert_eq!(mc.lambda_hat.unwrap().mean, s.lambda_hat);
    assert!(mc.J_hat.unwrap().std.is_none());
    assert!(mc
        .unstable_roots
        .iter()
        .all(|t| t.re.std.is_none() && t.im.std.is_none()));
    let json = read(dir.path(), "mc_summary.json");
    assert!(!json.contains("\"std\""));
    assert!(!json.contains("pooled_std"));
}

#[test]
fn montecarlo_statistics_recompute_from_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n: Some(4000),
        runs: 8,
        master_seed: 5,
        ..Default::default()
    };
    let mc = cmd_montecarlo(&cfg, dir.path(), None).unwrap();
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "mc_summary.json")).unwrap();
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 8);
    let lam: Vec<f64> = records
        .iter()
        .map(|r| r["lambda_hat"].as_f64().unwrap())
        .collect();
    let mean = lam.iter().sum::<f64>() / 8.0;
    assert!((mean - mc.lambda_hat.unwrap().mean).abs() < 1e-15);
    for (k, r) in records.iter().enumerate() {
        assert_eq!(r["run"], k);
        assert_eq!(r["seed"], derive_seed(5, k as u64));
    }

    let poles = read(dir.path(), "poles_n15.csv");
    let mut lines = poles.lines();
    assert_eq!(lines.next(), Some("run,re,im,class"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8 * 15);
    assert!(rows
        .iter()
        .all(|r| r.ends_with(",stable") || r.ends_with(",antistable")));
}

#[test]
fn artifacts_do_not_depend_on_worker_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n: Some(3000),
        runs: 6,
        master_seed: 77,
        ..Default::default()
    };
    cmd_montecarlo(&cfg, a.path(), Some(1)).unwrap();
    cmd_montecarlo(&cfg, b.path(), Some(4)).unwrap();
    for name in ["mc_summary.json", "poles_n15.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    cmd_single(&cfg, a.path()).unwrap();
    cmd_single(&cfg, b.path()).unwrap();
    for name in [
        "summary.json",
        "model.json",
        "estimate.json",
        "bode_H_hat.csv",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn too_many_failures_abort() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig {
        n: Some(2000),
        runs: 5,
        ..Default::default()
    };
    cfg.spec.lambda_e = 0.0;
    match cmd_montecarlo(&cfg, dir.path(), None) {
        Err(CliError::TooManyFailures { failed: 5, runs: 5 }) => {}
        other => panic!("{other:?}"),
    }
    assert!(!dir.path().join("mc_summary.json").exists());
}

#[test]
fn bode_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::default();
    let written = cmd_bode(&cfg, dir.path(), &[]).unwrap();
    assert_eq!(written.len(), 2);
    cmd_bode(&cfg, dir.path(), &[BodeCurve::K, BodeCurve::S]).unwrap();
    let k = parse_bode_csv(&read(dir.path(), "bode_K.csv")).unwrap();
    assert!(k.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
    assert!("khs".parse::<BodeCurve>().is_ok());
    assert!("X".parse::<BodeCurve>().is_err());

    // F = 1 + q^-1 puts a pole of G at omega = pi, the last grid point.
    let mut polar = cfg.clone();
    polar.spec.f = Poly::new(vec![1.0, 1.0]);
    match cmd_bode(&polar, dir.path(), &[BodeCurve::G]) {
        Err(CliError::Run {
            source: arxid::Error::PoleOnGrid { .. },
            ..
        }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn binary_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"N": 3000, "n_a": 4, "n_b": 4, "runs": 3, "master_seed": 2}"#,
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_arxid");

    let ok = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let out = dir.path().to_str().unwrap();
    let cfg = config.to_str().unwrap();
    ok(&["single", "--config", cfg, "--out", out, "--seed", "9"]);
    assert_eq!(summary(dir.path()).seed, 9);
    ok(&[
        "montecarlo",
        "--config",
        cfg,
        "--out",
        out,
        "--runs",
        "2",
        "--na",
        "6",
        "--nb",
        "5",
    ]);
    assert!(dir.path().join("poles_n6.csv").exists());
    ok(&["bode", "--config", cfg, "--out", out, "--tf", "GS"]);
    assert!(dir.path().join("bode_GS.csv").exists());

    let bad = Command::new(bin)
        .args(["bode", "--tf", "nope", "--out", out])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    std::fs::write(&config, r#"{"runs": 0}"#).unwrap();
    let bad = Command::new(bin)
        .args(["single", "--config", cfg, "--out", out])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn unstable_root_means_do_not_depend_on_the_master_seed() {
    let spec = SystemSpec::benchmark();
    for master in [11, 22, 33, 44, 55] {
        let mc = arxid_cli::run_monte_carlo(
            &spec,
            10_000,
            ArxOrders::new(15, 15),
            50,
            master,
            500,
            None,
        )
        .unwrap();
        for t in &mc.unstable_roots {
            for (stat, truth) in [(t.re, t.target.re), (t.im, t.target.im)] {
                let se = stat.std.unwrap() / (mc.runs as f64).sqrt();
                assert!(
                    (stat.mean - truth).abs() < 3.0 * se,
                    "seed {master}: {} vs {truth} (se {se})",
                    stat.mean
                );
            }
        }
    }
}
