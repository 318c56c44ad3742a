use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enstrophy")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn identities_pass_at_16() {
    let o = bin(&["identities", "--n", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    for name in ["coupling_sum_full", "coupling_sum_third", "q_isotropy", "ito_correction_safe_band"] {
        assert!(s.lines().any(|l| l.starts_with(name) && l.contains("pass")), "{name} missing:\n{s}");
    }
    assert!(!s.contains("FAIL"));
}

#[test]
fn constants_report() {
    let o = bin(&["constants", "--tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["s"].as_f64().unwrap() - 6.02681).abs() < 1e-5);
    assert!(v["certified"].as_bool().unwrap());
    assert!((v["thresholds"]["lattice_s"].as_f64().unwrap() - 1.1124).abs() < 1e-4);
    assert_eq!(v["thresholds"]["four_pi_printed"], "1.6062760518");
    assert_eq!(v["thresholds"]["reference_printed"], "1.6062760546");
    assert_eq!(v["eps_table"].as_array().unwrap().len(), 64);
}

#[test]
fn evolve_without_nu_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "n = 4\ndt = 1e-3\nt_end = 0.01\n").unwrap();
    let o = bin(&["evolve", "--config", c.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`nu`"));
}

#[test]
fn usage_and_io_exit_codes() {
    assert_eq!(bin(&["bogus"]).status.code(), Some(2));
    assert_eq!(bin(&["coeffs", "--j", "0,0", "--n", "3"]).status.code(), Some(2));
    assert_eq!(bin(&["evolve", "--config", "/nonexistent/c.txt", "--out", "/tmp/x"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "nu = 1\nn = 4\ndt = 1e-3\nt_end = 0.01\n").unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = bin(&["evolve", "--config", c.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn evolve_output_regenerates_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "nu = 1.2\nn = 6\ndt = 2e-3\nt_end = 0.02\npaths = 3\nseed = 77\nsystem = limit\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = bin(&["evolve", "--config", c.to_str().unwrap(), "--set", "threads=2", "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = bin(&["evolve", "--config", a.join("config.txt").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["trajectories.csv", "summary.json", "config.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("trajectories.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "path,time,\"w(1,0)\",\"w(0,1)\",enstrophy");
    assert_eq!(csv.lines().count(), 1 + 3 * 11);
    let s: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["seeds"]["master_seed"], 77);
    assert!(s.get("runtime_seconds").is_none());
}

#[test]
fn sample_and_coeffs_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.csv");
    let o = bin(&["sample", "--n", "3", "--seed", "4", "--basis", "complex", "--out", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let field = enstrophy::io::read_field(fs::File::open(&f).unwrap()).unwrap();
    assert!(matches!(field, enstrophy::io::Field::Complex(_)));
    let o = bin(&["coeffs", "--j", "-1,1", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("j1,j2,k1,k2,l1,l2,re,im\n-1,1,"));
}

#[test]
fn report_and_compare_emit_json() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "nu = 1.2\nn = 4\ndt = 5e-3\nt_end = 0.05\npaths = 120\nsystem = limit\nmax_lag = 0.02\ngaps = 1 2\nmin_slope = -100\n").unwrap();
    let o = bin(&["report", "--config", c.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["paths"], 120);
    let tests = v["tests"].as_array().unwrap();
    assert!(tests.iter().any(|t| t["name"].as_str().unwrap().starts_with("qv_rate")));
    assert!(tests.iter().all(|t| t["band"].as_array().unwrap().len() == 2));
    assert_eq!(o.status.code(), Some(if v["all_pass"].as_bool().unwrap() { 0 } else { 1 }));

    let o = bin(&["compare", "--config", c.to_str().unwrap(), "--against", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["heuristic"], true);
    assert_eq!(v["comparisons"][0]["distance"].as_f64().unwrap(), 0.0);
}
