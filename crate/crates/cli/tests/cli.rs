use std::f64::consts::PI;
use std::process::{Command, Output};

use cuboid_core::report;

fn cuboid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuboid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn cube_spectrum_ends_at_nine_pi_squared() {
    let o = cuboid(&["spectrum", "--a1", "1", "--a2", "1", "--k", "5", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let rows = report::parse_spectrum_csv(&o.stdout).unwrap();
    assert_eq!(rows.len(), 5);
    let multiples: Vec<_> = rows.iter().map(|r| r.pi2_multiple.unwrap()).collect();
    assert_eq!(multiples, [3, 6, 6, 6, 9]);
    let last = rows.last().unwrap();
    assert!((last.value - 9.0 * PI * PI).abs() < 1e-9);
    assert_eq!(last.multiplicity, 3);
}

#[test]
fn spectrum_json_and_alias() {
    let o = cuboid(&["spectrum", "--a1", "0.5", "--a2", "1", "--k-max", "1"]);
    assert_eq!(code(&o), 0);
    let doc = report::parse_spectrum_json(&o.stdout).unwrap();
    assert_eq!(doc.rows.len(), 1);
    assert!((doc.rows[0].value - 5.25 * PI * PI).abs() < 1e-9);
    assert_eq!(doc.rows[0].pi2_multiple, None);
}

#[test]
fn invalid_geometry_is_bad_input() {
    assert_eq!(code(&cuboid(&["spectrum", "--a1", "0", "--a2", "1", "--k", "1"])), 2);
    assert_eq!(code(&cuboid(&["spectrum", "--a1", "-1", "--a2", "1", "--k", "1"])), 2);
    assert_eq!(code(&cuboid(&["spectrum", "--a1", "1", "--a2", "1", "--k", "0"])), 2);
}

#[test]
fn oversized_rank_hits_resource_cap() {
    let o = cuboid(&["spectrum", "--a1", "1", "--a2", "1", "--k", "1000000000000"]);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
}

#[test]
fn count_on_cube() {
    let lambda = (3.0 * PI * PI).to_string();
    let o = cuboid(&["count", "--a1", "1", "--a2", "1", "--lambda", &lambda]);
    assert_eq!(code(&o), 0);
    let doc = report::parse_count_json(&o.stdout).unwrap();
    assert_eq!(doc.bundle.t, 27);
    assert_eq!(doc.bundle.n, 1);
    assert!(doc.identity_ok);

    let o = cuboid(&["count", "--a1", "1", "--a2", "1", "--lambda", "0", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let doc = report::parse_count_csv(&o.stdout).unwrap();
    assert_eq!((doc.bundle.t, doc.bundle.n), (1, 0));
}

#[test]
fn negative_lambda_is_bad_input() {
    assert_eq!(code(&cuboid(&["count", "--a1", "1", "--a2", "1", "--lambda", "-1"])), 2);
}

#[test]
fn optimize_first_rank_is_the_cube() {
    let o = cuboid(&["optimize", "--k", "1"]);
    assert_eq!(code(&o), 0);
    let rows = report::parse_optimize_csv(&o.stdout).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    for side in [r.a1, r.a2, r.a3] {
        assert!((side.unwrap() - 1.0).abs() <= 1e-6);
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("max a3*"));
}

#[test]
fn dyadic_range_has_five_rows() {
    let o = cuboid(&["optimize", "--k-min", "1", "--k-max", "16", "--dyadic"]);
    assert_eq!(code(&o), 0);
    let rows = report::parse_optimize_csv(&o.stdout).unwrap();
    let ks: Vec<_> = rows.iter().map(|r| r.k).collect();
    assert_eq!(ks, [1, 2, 4, 8, 16]);
    assert!(rows.iter().all(|r| !r.is_failure()));
}

#[test]
fn optimize_rejects_bad_ranks_and_tolerances() {
    assert_eq!(code(&cuboid(&["optimize", "--k", "0"])), 2);
    assert_eq!(code(&cuboid(&["optimize", "--k", "3", "--side-tol", "1e-20"])), 2);
    assert_eq!(code(&cuboid(&["optimize", "--k", "3", "--grid", "1"])), 2);
    assert_eq!(code(&cuboid(&["optimize", "--k-min", "5", "--k-max", "4"])), 2);
}

#[test]
fn verify_suites_pass() {
    for suite in ["identity", "lemma41"] {
        let o = cuboid(&["verify", "--suite", suite, "--samples", "1000"]);
        assert_eq!(code(&o), 0, "{suite}: {}", String::from_utf8_lossy(&o.stderr));
        let rows = report::parse_verify_csv(&o.stdout).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        let stderr = String::from_utf8_lossy(&o.stderr);
        assert!(stderr.contains("C ~") && stderr.contains("D ~"));
    }
}

#[test]
fn verify_rejects_empty_pool_and_unknown_suite() {
    assert_eq!(code(&cuboid(&["verify", "--suite", "all", "--samples", "0"])), 2);
    assert_eq!(code(&cuboid(&["verify", "--suite", "lemma99"])), 2);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str, args: &[&str]| {
        let path = dir.path().join(name);
        let mut full = vec!["--threads", threads, "--out", path.to_str().unwrap()];
        full.extend_from_slice(args);
        let o = cuboid(&full);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let sweep = ["optimize", "--k-min", "1", "--k-max", "64", "--dyadic"];
    assert_eq!(run("1", "a.csv", &sweep), run("4", "b.csv", &sweep));
    let suite = ["verify", "--suite", "all", "--samples", "50", "--seed", "9", "--format", "json"];
    let a = run("1", "a.json", &suite);
    assert_eq!(a, run("3", "b.json", &suite));
    let doc = report::parse_verify_json(&a).unwrap();
    assert!(doc.rows.iter().all(|r| r.pass));
    let count: serde_json::Value =
        serde_json::from_slice(&run("1", "c.json", &["count", "--a1", "0.5", "--a2", "1", "--lambda", "500"])).unwrap();
    assert_eq!(count["schema_version"], 1);
    assert_eq!(count["identity_ok"], true);
}
