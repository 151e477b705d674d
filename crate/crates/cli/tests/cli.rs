use std::path::Path;
use std::process::{Command, Output};

use fblb::{CgfEvaluator, ChannelConfig, QuadratureSpec};
use serde_json::Value;

fn fblb(args: &[&str]) -> Output {
    fblb_env(args, &[])
}

fn fblb_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fblb"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("FBLB_")) {
        cmd.env_remove(k);
    }
    cmd.args(args).envs(env.iter().copied()).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn capacity_per_use(t: usize, l: usize, db: f64) -> f64 {
    let e = CgfEvaluator::new(ChannelConfig::from_db(t, l, db).unwrap(), QuadratureSpec::default());
    e.stats(1.0).unwrap().i_s / t as f64
}

#[test]
fn normal_approx_at_half_is_capacity() {
    let out = fblb(&["point", "--T", "12", "--L", "14", "--snr-db", "6", "--eps", "0.5", "--kinds", "na"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rate = v[0]["point"]["rate"].as_f64().unwrap();
    assert!((rate - capacity_per_use(12, 14, 6.0)).abs() < 1e-14);
    assert_eq!(v[0]["coherence"], 12);
    assert_eq!(v[0]["kind"], "na");
}

#[test]
fn rcus_point_lies_below_capacity() {
    let out = fblb(&["point", "--eps", "1e-5", "--kinds", "rcus-sp", "--T", "12", "--L", "14", "--snr-db", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rate = v[0]["point"]["rate"].as_f64().unwrap();
    assert!(rate > 0.0 && rate < capacity_per_use(12, 14, 6.0));
    assert!(v[0]["point"]["witness"]["s"].as_f64().is_some());
    assert!(v[0]["point"]["witness"]["tau"].as_f64().is_some());
}

#[test]
fn seeded_monte_carlo_points_repeat() {
    let args = ["point", "--rate", "0.5", "--kinds", "rcus-mc,mc-mc", "--samples", "20000", "--seed", "42"];
    let (a, b) = (fblb(&args), fblb(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v[0]["point"]["diagnostics"]["seed"], 42);
    assert_eq!(v[0]["point"]["diagnostics"]["n_samples"], 20000);
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["point", "--eps", "1e-3", "--kinds", ""][..],
        &["point", "--eps", "1e-3", "--kinds", "nope"],
        &["point", "--eps", "1e-3", "--rate", "0.2"],
        &["point", "--eps", "1.5"],
        &["point"],
        &["point", "--eps", "1e-3", "--n", "168", "--L", "5"],
        &["point", "--eps", "1e-3", "--snr-db", "60"],
        &["sweep", "--sweep", "eps", "--range", "-3:-1:1", "--eps", "1e-3"],
        &["sweep", "--sweep", "rate", "--range", "1:0:1"],
        &["sweep", "--sweep", "L", "--range", "1:2:0.5", "--eps", "1e-3"],
        &["sweep", "--sweep", "snr", "--range", "0:1:1", "--eps", "1e-3", "--kinds", ""],
        &["--no-such-flag"],
    ] {
        let out = fblb(args);
        assert_eq!(out.status.code(), Some(64), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn infeasible_targets_exit_2_with_a_record() {
    let out = fblb(&["point", "--rate", "5", "--kinds", "rcus-sp"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v[0]["error"]["type"], "infeasible");
    let hi = v[0]["error"]["feasible"][1].as_f64().unwrap();
    assert!((hi - capacity_per_use(12, 14, 6.0)).abs() < 1e-9);
    let sweep = fblb(&["sweep", "--sweep", "rate", "--range", "5:6:1", "--kinds", "rcus-sp"]);
    assert_eq!(sweep.status.code(), Some(2));
    let text = String::from_utf8(sweep.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",infeasible")), "{text}");
    let err: Value = serde_json::from_str(String::from_utf8(sweep.stderr).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(err["error"]["type"], "infeasible");
}

#[test]
fn mixed_sweeps_exit_0() {
    let out = fblb(&["sweep", "--sweep", "rate", "--range", "0.5:5:4.5", "--kinds", "rcus-sp"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let status: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(status, ["ok", "infeasible"]);
}

const GOLDEN_ARGS: [&str; 17] = [
    "sweep", "--sweep", "rate", "--range", "0.1:0.3:0.1", "--T", "2", "--L", "4", "--snr-db", "3", "--kinds",
    "na,rcus-sp,mc-sp,rcus-mc", "--samples", "20000", "--seed", "7",
];

#[test]
fn sweep_matches_golden_file() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/rate_sweep.csv");
    let out = fblb(&GOLDEN_ARGS);
    assert_eq!(out.status.code(), Some(0));
    if std::env::var_os("FBLB_BLESS").is_some() {
        std::fs::write(&golden, &out.stdout).unwrap();
    }
    let want = std::fs::read(&golden).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), String::from_utf8(want).unwrap());
}

#[test]
fn csv_header_is_fixed() {
    let out = fblb(&["sweep", "--sweep", "snr", "--range", "0:0:1", "--eps", "0.1", "--kinds", "na"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "axis,kind,rate,eps,s,tau,xi,exponent,prefactor,std_err,n_samples,status");
}

#[test]
fn output_is_independent_of_jobs() {
    let base = ["sweep", "--sweep", "L", "--range", "1:12:1", "--n", "24", "--snr-db", "0", "--eps", "1e-3", "--kinds",
        "rcus-sp,mc-sp,rcus-mc,mc-mc", "--samples", "20000"];
    let runs: Vec<Vec<u8>> = ["1", "2", "5"]
        .iter()
        .map(|j| {
            let mut args = base.to_vec();
            args.extend(["--jobs", j]);
            let out = fblb(&args);
            assert_eq!(out.status.code(), Some(0));
            out.stdout
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(runs[0].clone()).unwrap();
    let axes: Vec<&str> = text.lines().skip(1).step_by(4).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(axes, ["1", "2", "3", "4", "6", "8", "12"]);
}

#[test]
fn rates_grow_with_eps_along_an_eps_sweep() {
    let out = fblb(&["sweep", "--sweep", "eps", "--range", "-8:-2:2", "--kinds", "rcus-sp", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows[0]["axis"].as_f64(), Some(1e-8));
    let rates: Vec<f64> = rows.iter().map(|r| r["rate"].as_f64().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
}

#[test]
fn flags_beat_environment_beat_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("defaults.toml");
    std::fs::write(&file, "version = 1\n[run]\nblocks = 7\ncoherence = 4\n").unwrap();
    let cfg = file.to_str().unwrap();
    let blocks = |out: Output| json(&out)[0]["blocks"].as_u64().unwrap();
    let args = ["--config", cfg, "point", "--eps", "0.5", "--kinds", "na"];
    assert_eq!(blocks(fblb(&args)), 7);
    assert_eq!(blocks(fblb_env(&args, &[("FBLB_L", "9")])), 9);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--L", "11"]);
    assert_eq!(blocks(fblb_env(&with_flag, &[("FBLB_L", "9")])), 11);
    let from_env = fblb_env(&["point", "--eps", "0.5", "--kinds", "na"], &[("FBLB_CONFIG", cfg)]);
    assert_eq!(json(&from_env)[0]["coherence"], 4);
    std::fs::write(&file, "version = 3\n").unwrap();
    assert_eq!(fblb(&args).status.code(), Some(64));
}

#[test]
fn writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = fblb(&["point", "--eps", "0.5", "--kinds", "na", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("axis,kind,"));
}

#[test]
fn selftest_passes_with_stable_schema() {
    let out = fblb(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    for c in v["checks"].as_array().unwrap() {
        let mut keys: Vec<&str> = c.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["detail", "name", "passed", "seconds"]);
    }
}

#[test]
fn bench_reports_scaling() {
    let out = fblb(&["bench", "--samples", "20000", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["quadrature"]["n1"], 96);
    assert!(v["effective_quadrature"]["n2"].as_u64().unwrap() >= 24);
    assert!(v["saddlepoint"]["ratio"].as_f64().unwrap() > 0.0);
    assert!(v["montecarlo"]["ratio"].as_f64().unwrap() > 1.0);
}
