use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use selfsim_cli::output::read_csv;
use selfsim_core::{GridSpec, Hurst, Method, Process, Sampler, SamplerConfig};
use serde_json::Value;
use tempfile::TempDir;

fn selfsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfsim"))
        .args(args)
        .env_remove("SELFSIM_SEED")
        .output()
        .expect("binary runs")
}

fn simulate_to(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let mut args = vec!["simulate", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let result = selfsim(&args);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    fs::read_to_string(out).unwrap()
}

const LAMPERTI_1024: [&str; 14] = [
    "--process",
    "fbm",
    "--method",
    "lamperti",
    "--hurst",
    "0.8",
    "--n",
    "1024",
    "--paths",
    "1",
    "--seed",
    "42",
    "--format",
    "csv",
];

#[test]
fn csv_has_n_plus_one_rows_per_path() {
    let dir = TempDir::new().unwrap();
    let text = simulate_to(dir.path(), "a.csv", &LAMPERTI_1024);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path_id,t,value"));
    assert_eq!(lines.clone().count(), 1025);
    assert_eq!(lines.next(), Some("0,0,0"));
    assert!(text.lines().last().unwrap().starts_with("0,1,"));

    let text = simulate_to(
        dir.path(),
        "b.csv",
        &["--method", "davies-harte", "--n", "16", "--paths", "3"],
    );
    assert_eq!(text.lines().count(), 1 + 3 * 17);
}

#[test]
fn identical_commands_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let a = simulate_to(dir.path(), "a.csv", &LAMPERTI_1024);
    let b = simulate_to(dir.path(), "b.csv", &LAMPERTI_1024);
    assert_eq!(a, b);
    let c = simulate_to(
        dir.path(),
        "c.csv",
        &["--method", "lamperti", "--n", "1024", "--seed", "43"],
    );
    assert_ne!(a, c);
}

#[test]
fn csv_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let args = [
        "--process",
        "sfbm",
        "--method",
        "cholesky",
        "--hurst",
        "0.35",
        "--n",
        "32",
        "--paths",
        "5",
        "--seed",
        "9",
    ];
    simulate_to(dir.path(), "p.csv", &args);
    let paths = read_csv(BufReader::new(fs::File::open(dir.path().join("p.csv")).unwrap())).unwrap();
    let config = SamplerConfig::new(Process::Sfbm, Method::Cholesky, Hurst::new(0.35).unwrap());
    let batch = Sampler::prepare(config, GridSpec::new(32).unwrap())
        .unwrap()
        .batch(5, 9);
    assert_eq!(paths.len(), 5);
    for (read, path) in paths.iter().zip(batch.paths()) {
        assert_eq!(read[0], 0.0);
        assert_eq!(&read[1..], path.values.as_slice());
    }
}

#[test]
fn json_output_carries_meta_and_paths() {
    let dir = TempDir::new().unwrap();
    let text = simulate_to(
        dir.path(),
        "p.json",
        &[
            "--method",
            "lamperti",
            "--process",
            "sfbm",
            "--n",
            "64",
            "--paths",
            "2",
            "--format",
            "json",
        ],
    );
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["process"], "sfbm");
    assert_eq!(v["meta"]["seed"], 20240607);
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["meta"]["embedding"]["m"], 128);
    let paths = v["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 2);
    assert_eq!(paths[0].as_array().unwrap().len(), 65);
    assert_eq!(paths[0][0], 0.0);
}

#[test]
fn invalid_combination_exits_2() {
    let r = selfsim(&["simulate", "--process", "sfbm", "--method", "davies-harte", "--n", "8"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("davies-harte"));
    for args in [
        &["simulate", "--process", "sfbm", "--method", "circulant", "--n", "8"][..],
        &["simulate", "--process", "bm", "--method", "lamperti", "--n", "8"],
        &["simulate", "--hurst", "1.5"],
        &["simulate", "--bogus"],
        &["verify", "--n", "8"],
    ] {
        assert_eq!(selfsim(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn embedding_failure_exits_3() {
    let r = selfsim(&[
        "simulate",
        "--method",
        "lamperti",
        "--hurst",
        "0.9",
        "--n",
        "64",
        "--embedding-cap",
        "0",
    ]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("indefinite"));
}

#[test]
fn seed_sources_in_precedence_order() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, seed_flag: Option<&str>, env: Option<&str>, config: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_selfsim"));
        cmd.args(["simulate", "--n", "8", "--out", out.to_str().unwrap()])
            .env_remove("SELFSIM_SEED");
        if let Some(s) = seed_flag {
            cmd.args(["--seed", s]);
        }
        if let Some(e) = env {
            cmd.env("SELFSIM_SEED", e);
        }
        if let Some(c) = config {
            let path = dir.path().join(format!("{name}.conf"));
            fs::write(&path, c).unwrap();
            cmd.args(["--config", path.to_str().unwrap()]);
        }
        assert!(cmd.status().unwrap().success());
        fs::read_to_string(out).unwrap()
    };
    let default = run("d", None, None, None);
    assert_eq!(default, run("explicit", Some("20240607"), None, None));
    let five = run("five", Some("5"), None, None);
    assert_ne!(default, five);
    assert_eq!(five, run("env", None, Some("5"), None));
    assert_eq!(five, run("conf", None, Some("6"), Some("seed = 5\n")));
    assert_eq!(five, run("flag", Some("5"), Some("6"), Some("seed = 7\n")));
}

#[test]
fn config_file_supplies_options() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "# run\nprocess = sfbm\nmethod = cholesky\nhurst = 0.3\nn = 4\npaths = 2\nformat = json\n",
    )
    .unwrap();
    let text = simulate_to(
        dir.path(),
        "c.json",
        &["--config", conf.to_str().unwrap(), "--paths", "3"],
    );
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["method"], "cholesky");
    assert_eq!(v["meta"]["hurst"], 0.3);
    assert_eq!(v["paths"].as_array().unwrap().len(), 3);
}

fn verify(args: &[&str]) -> (Option<i32>, Value) {
    let mut all = vec!["verify"];
    all.extend_from_slice(args);
    let r = selfsim(&all);
    let v = serde_json::from_slice(&r.stdout).unwrap_or(Value::Null);
    (r.status.code(), v)
}

#[test]
fn error_bound_suite_passes() {
    let (code, v) = verify(&["--suite", "error-bound", "--hurst", "0.5", "--n", "256,1024,4096,16384"]);
    assert_eq!(code, Some(0));
    assert_eq!(v["verdict"], "pass");
    let report = &v["reports"][0];
    for key in [
        "check",
        "method",
        "process",
        "hurst",
        "n",
        "m_replicates",
        "verdict",
        "worst_deviation",
        "tolerance",
        "details",
    ] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn marginals_suite_passes_for_lamperti() {
    let (code, v) = verify(&[
        "--suite",
        "marginals",
        "--process",
        "fbm",
        "--method",
        "lamperti",
        "--hurst",
        "0.2",
        "--n",
        "256",
        "--paths",
        "20000",
        "--seed",
        "7",
    ]);
    assert_eq!(code, Some(0), "{v}");
    assert_eq!(v["reports"][0]["details"].as_array().unwrap().len(), 3);
}

#[test]
fn equivalence_suite_passes_for_davies_harte() {
    let (code, v) = verify(&[
        "--suite",
        "equivalence",
        "--method",
        "davies-harte",
        "--baseline",
        "cholesky",
        "--n",
        "64",
    ]);
    assert_eq!(code, Some(0), "{v}");
    assert_eq!(v["reports"][0]["method"], "davies-harte vs cholesky");
}

#[test]
fn lamperti_equivalence_full_matrix_is_informational() {
    let (code, v) = verify(&[
        "--suite",
        "equivalence",
        "--method",
        "lamperti",
        "--n",
        "32",
        "--paths",
        "5000",
    ]);
    assert_eq!(code, Some(0), "{v}");
    assert_eq!(v["reports"][1]["verdict"], "informational");
}

#[test]
fn failing_suite_exits_nonzero() {
    let (code, v) = verify(&[
        "--suite",
        "covariance",
        "--method",
        "ma-truncated",
        "--truncation",
        "2",
        "--hurst",
        "0.8",
        "--n",
        "16",
        "--paths",
        "5000",
    ]);
    assert_eq!(code, Some(1));
    assert_eq!(v["verdict"], "fail");
}

#[test]
fn normality_suite_checks_three_nodes() {
    let (code, v) = verify(&[
        "--suite",
        "normality",
        "--method",
        "lamperti",
        "--n",
        "64",
        "--paths",
        "2000",
    ]);
    assert_eq!(code, Some(0), "{v}");
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn bench_reports_deterministic_checksums() {
    let args = [
        "bench",
        "--method",
        "davies-harte,lamperti",
        "--n",
        "64,128",
        "--paths",
        "3",
        "--format",
        "json",
    ];
    let a: Value = serde_json::from_slice(&selfsim(&args).stdout).unwrap();
    let b: Value = serde_json::from_slice(&selfsim(&args).stdout).unwrap();
    let rows = a["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[1]["ratio"].is_number());
    for (x, y) in rows.iter().zip(b["rows"].as_array().unwrap()) {
        assert_eq!(x["checksum"], y["checksum"]);
    }
}
