use std::fs;
use std::process::{Command, Output};

use catlab::{PrimeContext, ToralAutomorphism};

fn catlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catlab"))
        .args(args)
        .env_remove("CATLAB_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn classify_examples() {
    let o = catlab(&["classify", "-m", "3,2,4,3", "-n", "7"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("kind=split r=3 M=6"), "{s}");

    let o = catlab(&["classify", "-m", "3,2,4,3", "-n", "5"]);
    assert!(stdout(&o).contains("kind=inert r=6 M=6"));

    let o = catlab(&["classify", "-m", "3,2,4,3", "-n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not odd"));

    let o = catlab(&["classify", "-m", "2,1,1,1", "-n", "7"]);
    assert_eq!(o.status.code(), Some(2));

    let o = catlab(&["classify", "-n", "13", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["order"], 14);
    assert_eq!(v["kind"], "inert");
}

#[test]
fn scan_orders_against_oracle() {
    let o = catlab(&["scan-orders", "-m", "3,2,4,3", "--nmax", "120"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,r,r_over_sqrtN"));
    let rows: Vec<(u64, u64)> = lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[0].parse().unwrap(), cols[1].parse().unwrap())
        })
        .collect();
    assert!(rows.contains(&(7, 3)));
    assert!(rows.contains(&(5, 6)));
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    let a = ToralAutomorphism::new(3, 2, 4, 3).unwrap();
    for &(n, r) in &rows {
        assert!((n - 1) % r == 0 || (n + 1) % r == 0);
        if n >= 50 {
            // oracle: smallest t with A^t = I by repeated multiplication
            let m = a.to_mod(n);
            let mut acc = m;
            let mut t = 1;
            while !acc.is_identity(n) {
                acc = acc.mul(&m, n);
                t += 1;
            }
            assert_eq!(t, r, "N={n}");
        }
    }
    assert_eq!(
        catlab(&["scan-orders", "--nmax", "2000000"]).status.code(),
        Some(2)
    );
}

#[test]
fn variance_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("var.csv");
    let o = catlab(&[
        "variance",
        "--nmin",
        "100",
        "--nmax",
        "160",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("N,r,kind,L,var_fourier,var_quadrature,c_arith,bound,ratio\n"));
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 9);
        let ratio: f64 = cols[8].parse().unwrap();
        assert!(ratio > 0.8 && ratio < 1.2, "{line}");
    }
    // determinism across thread counts
    let again = catlab(&["variance", "--nmin", "100", "--nmax", "160", "--jobs", "1"]);
    assert_eq!(stdout(&again), csv);
}

#[test]
fn variance_of_cocycle_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("cocycle.json");
    // 2cos(2 pi x1) - 2cos(2 pi (3 x1 + 2 x2)), i.e. g - g o A
    fs::write(
        &obs,
        r#"[{"k": [1, 0], "re": 1.0}, {"k": [-1, 0], "re": 1.0},
            {"k": [3, 2], "re": -1.0}, {"k": [-3, -2], "re": -1.0}]"#,
    )
    .unwrap();
    let o = catlab(&[
        "variance",
        "--obs",
        obs.to_str().unwrap(),
        "--nmin",
        "100",
        "--nmax",
        "200",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for line in stdout(&o).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[4].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cols[6].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn corrupted_observable_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("bad.json");
    fs::write(&obs, r#"[{"k": [1, 0], "re": 1.0}, {"k": [2"#).unwrap();
    let o = catlab(&["variance", "--obs", obs.to_str().unwrap(), "-n", "101"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error:"), "{err}");
    assert!(!err.contains("panicked"));

    fs::write(&obs, r#"[{"k": [0, 0], "re": 1.0}]"#).unwrap();
    assert_eq!(
        catlab(&["hecke", "-n", "11", "--obs", obs.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let missing = dir.path().join("missing.json");
    assert_eq!(
        catlab(&["variance", "--obs", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn window_and_rule_validation() {
    assert_eq!(
        catlab(&["variance", "-n", "101", "--window", "boxcar"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        catlab(&["variance", "-n", "101", "--l-exp", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        catlab(&["variance", "-n", "101", "--tail-eps", "-1"])
            .status
            .code(),
        Some(2)
    );
    let o = catlab(&["variance", "-n", "101", "--window", "triangle"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn charsum_scan_and_hecke() {
    let o = catlab(&["charsum-scan", "--nmax", "60"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("N,kind,m,abs_E,bound2sqrtN,slack\n"));
    for line in text.lines().skip(1) {
        let slack: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(slack > 0.0);
    }

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("elements.csv");
    let o = catlab(&["hecke", "-n", "31", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("vectors=31"));
    let csv = fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 32);
    let ctx = PrimeContext::new(ToralAutomorphism::new(3, 2, 4, 3).unwrap(), 31).unwrap();
    let total: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!(
        total.abs() < 1e-9,
        "sum of matrix elements {total} (r = {})",
        ctx.order
    );
}

#[test]
fn selftest_quick() {
    let o = catlab(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("all suites passed"));
}

#[test]
fn jobs_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_catlab"))
        .args(["classify", "-n", "7"])
        .env("CATLAB_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
