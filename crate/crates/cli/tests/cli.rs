use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracpearson"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fracpearson-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn json(out: &Output) -> Value {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn column(v: &Value, name: &str) -> Vec<f64> {
    v["data"][name]
        .as_array()
        .unwrap_or_else(|| panic!("no column {name}"))
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr)
        .unwrap_or_else(|_| panic!("stderr not JSON: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn density_csv_integrates_to_one() {
    let out = run(&[
        "density", "--kind", "rg", "--theta", "1", "--beta", "5", "--gamma", "2", "--alpha", "1",
        "--t", "1", "--x0", "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("x,density,discrete,continuous,quad_error,flag")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 200);
    let mass: f64 = rows
        .windows(2)
        .map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][1] + w[1][1]))
        .sum();
    assert!((mass - 1.0).abs() < 2e-3, "mass {mass}");
    assert!(rows.iter().all(|r| r[5] == 0.0));
}

#[test]
fn ml_alpha_one_is_exponential() {
    let v = json(&run(&[
        "ml", "--alpha", "1", "--x-max", "30", "--n-x", "61", "--format", "json",
    ]));
    let (x, e) = (column(&v, "x"), column(&v, "ml"));
    assert_eq!(x.len(), 61);
    for (x, e) in x.iter().zip(&e) {
        assert!((e - (-x).exp()).abs() <= 1e-10 * (-x).exp(), "x={x} E={e}");
    }
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let out = run(&["ml", "--alpha", "0.5", "--n-x", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(
                mantissa.chars().filter(char::is_ascii_digit).count(),
                17,
                "{cell}"
            );
        }
    }
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let d = scratch("precedence");
    let cfg = d.join("run.cfg");
    std::fs::write(
        &cfg,
        "# ml run\nalpha = 0.5\nx_max = 2\nn-x = 3\nformat = json\n",
    )
    .unwrap();
    let v = json(&run(&[
        "ml",
        "--config",
        cfg.to_str().unwrap(),
        "--alpha",
        "1",
    ]));
    let c = &v["meta"]["config"];
    assert_eq!(c["alpha"].as_f64(), Some(1.0));
    assert_eq!(c["x-max"].as_f64(), Some(2.0));
    assert_eq!(c["n-x"].as_u64(), Some(3));
    assert_eq!(c["x-min"].as_f64(), Some(0.0));
    assert_eq!(column(&v, "x"), vec![0.0, 1.0, 2.0]);
    assert_eq!(v["meta"]["command"], "ml");
    assert!(v["meta"]["version"].is_string());
}

#[test]
fn config_errors_exit_two_with_json() {
    let d = scratch("errors");
    let unused = d.join("unused.cfg");
    std::fs::write(&unused, "seed = 3\n").unwrap();
    let bad_line = d.join("bad.cfg");
    std::fs::write(&bad_line, "alpha 0.5\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["ml", "--no-such-flag"],
        vec!["ml", "--format", "xml"],
        vec!["ml", "--alpha", "1.5"],
        vec!["density", "--kind", "ou"],
        vec!["paths", "--n-paths", "10"],
        vec!["ml", "--config", unused.to_str().unwrap()],
        vec!["ml", "--config", bad_line.to_str().unwrap()],
        vec!["acf", "--kind", "rg", "--beta", "1.5"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let e = error_json(&out);
        assert_eq!(e["error"]["kind"], "config", "{args:?}");
        assert_eq!(e["error"]["exit_code"], 2);
        assert!(!e["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn numeric_failure_exits_three_and_flags_rows() {
    let out = run(&[
        "density",
        "--alpha",
        "0.7",
        "--t",
        "1e-4",
        "--abs-tol",
        "1e-15",
        "--n-x",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["meta"]["partial"], true);
    assert!(v["meta"]["flagged_rows"].as_u64().unwrap() > 0);
    assert_eq!(error_json(&out)["error"]["kind"], "numeric");
}

#[test]
fn paths_are_reproducible_and_dumped() {
    let d = scratch("paths");
    let args = |tag: &str| -> Vec<String> {
        [
            "paths",
            "--alpha",
            "0.7",
            "--seed",
            "11",
            "--n-paths",
            "4",
            "--n-t",
            "5",
            "--t-end",
            "0.5",
            "--dt",
            "1e-3",
            "--x0",
            "1.0",
        ]
        .iter()
        .map(|s| s.to_string())
        .chain([
            "--csv-dir".into(),
            d.join(format!("csv-{tag}")).display().to_string(),
            "--binary".into(),
            d.join(format!("{tag}.bin")).display().to_string(),
            "--output".into(),
            d.join(format!("{tag}.csv")).display().to_string(),
        ])
        .collect()
    };
    for tag in ["a", "b"] {
        let out = bin().args(args(tag)).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let read = |p: PathBuf| std::fs::read(p).unwrap();
    assert_eq!(read(d.join("a.csv")), read(d.join("b.csv")));
    assert_eq!(read(d.join("a.bin")), read(d.join("b.bin")));
    assert!(read(d.join("a.bin")).starts_with(b"FPPATHS\0"));
    let files: Vec<_> = std::fs::read_dir(d.join("csv-a")).unwrap().collect();
    assert_eq!(files.len(), 4);
    let first = std::fs::read_to_string(d.join("csv-a").join("path_000000.csv")).unwrap();
    assert_eq!(first.lines().next(), Some("t,value"));
    assert_eq!(first.lines().count(), 7);
    assert_eq!(
        first,
        std::fs::read_to_string(d.join("csv-b").join("path_000000.csv")).unwrap()
    );
    let summary = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(summary.lines().next(), Some("t,mean,stderr,min,max"));
    // every path starts at x0
    assert!(summary
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0"));
}

#[test]
fn paths_do_not_depend_on_worker_count() {
    let args = [
        "paths",
        "--alpha",
        "0.6",
        "--seed",
        "5",
        "--n-paths",
        "16",
        "--n-t",
        "4",
        "--dt",
        "1e-3",
    ];
    let one = bin()
        .env("RAYON_NUM_THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    let many = bin()
        .env("RAYON_NUM_THREADS", "4")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn acf_and_cauchy_tables() {
    let v = json(&run(&[
        "acf", "--alpha", "1", "--theta", "2", "--s", "1", "--t-list", "1.5,3", "--format", "json",
    ]));
    for (t, a) in column(&v, "t").iter().zip(column(&v, "acf")) {
        assert!((a - (-2.0 * (t - 1.0)).exp()).abs() < 1e-8);
    }
    let v = json(&run(&[
        "cauchy",
        "--function",
        "invariant",
        "--alpha",
        "1",
        "--t",
        "1",
        "--n-y",
        "3",
        "--format",
        "json",
    ]));
    assert_eq!(column(&v, "q").len(), 3);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
