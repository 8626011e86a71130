use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quanta-timing"));
    c.env_remove("QUANTA_TIMING_SEED");
    c
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn bounds_csv_is_stable_and_well_formed() {
    let a = run_ok(&["bounds"]);
    let b = run_ok(&["bounds"]);
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "chi,cq_simple,cq_series,ct_simple,ct_series"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 64);
    assert_eq!(rows[0][0], 0.25);
    assert_eq!(rows[63][0], 32.0);
    for r in &rows {
        if r[0] >= 1.0 {
            assert!(r[2] >= r[1], "series below simple at χ={}", r[0]);
        }
    }
}

#[test]
fn e_row_has_unit_simple_bound() {
    let out = run_ok(&[
        "bounds",
        "--chi-min",
        "2.718281828459045",
        "--chi-max",
        "2.718281828459045",
        "--chi-points",
        "1",
    ]);
    let row: Vec<f64> = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(row[1], 1.0);
}

#[test]
fn finite_m_rows_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fm.csv");
    let path_str = path.to_str().unwrap();
    run_ok(&[
        "finite-m",
        "--m-list",
        "1,2,4,16384",
        "--chi-min",
        "2",
        "--chi-max",
        "2",
        "--chi-points",
        "1",
        "--out",
        path_str,
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "M,chi,lambda_tau,mi_ordered_lower,cq_finite");
    assert_eq!(lines.len(), 5);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 1.0);
    assert!((first[4] - (1.0 + 2.0 / std::f64::consts::E).ln()).abs() < 1e-15);
    let cq: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(cq.windows(2).all(|w| w[1] >= w[0]));
    let json = run_ok(&[
        "finite-m",
        "--m-list",
        "3",
        "--chi-points",
        "2",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v[0]["M"], 3);
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["bounds", "--chi-min", "-1"],
        vec!["bounds", "--chi-points", "0"],
        vec!["finite-m", "--m-list", "0,4"],
        vec!["validate", "--samples", "500"],
        vec!["validate", "--format", "csv"],
        vec!["bounds", "--lambda", "0"],
        vec!["nonsense"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_names_the_path() {
    let out = bin()
        .args(["bounds", "--out", "/nonexistent-dir/curve.csv"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/curve.csv"));
}

#[test]
fn validate_is_deterministic_and_passes() {
    let args = ["validate", "--samples", "10000", "--seed", "5"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 5);
    let suites = report["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    let degenerate = suites
        .iter()
        .find(|s| s["name"] == "degenerate_density")
        .unwrap();
    assert_eq!(degenerate["passed"], true);
}

#[test]
fn seed_comes_from_the_environment() {
    let args = ["validate", "--samples", "10000"];
    let env = bin()
        .env("QUANTA_TIMING_SEED", "9")
        .args(args)
        .output()
        .unwrap();
    let flag = bin()
        .args(["validate", "--samples", "10000", "--seed", "9"])
        .output()
        .unwrap();
    assert_eq!(env.stdout, flag.stdout);
    let report: serde_json::Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(report["seed"], 9);
}
