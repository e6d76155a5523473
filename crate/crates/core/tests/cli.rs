use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use qorient::cli::{self_check, RunConfig};
use qorient::expansion::{build_grid, Domain, GridSamples};
use serde_json::Value;
use tempfile::TempDir;

fn qorient(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qorient")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn components(result: &Value) -> Vec<f64> {
    result["tensor"]["components"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn circle_samples(dir: &Path, f: impl Fn(f64) -> f64) -> String {
    let g = build_grid(Domain::S1, 8).unwrap();
    let v = g.nodes().iter().map(|n| f(n[0])).collect();
    let s = GridSamples::new(g, "f", v).unwrap();
    let p = dir.join("circle.csv");
    s.write_csv(std::fs::File::create(&p).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn mixed_spin_state_has_zero_order() {
    let dir = TempDir::new().unwrap();
    let mixed = write(&dir, "mixed.json", r#"{"dim":3,"re":[[0.3333333333333333,0,0],[0,0.3333333333333334,0],[0,0,0.3333333333333333]],"im":[[0,0,0],[0,0,0],[0,0,0]]}"#);
    let r = json_of(&qorient(&["order-params", "--system", "spin", "--spin", "1", "--state", &mixed, "--ranks", "1,2"]));
    for res in r["results"].as_array().unwrap() {
        assert!(components(res).iter().all(|x| x.abs() < 1e-12));
    }
}

#[test]
fn spin_half_nematic_is_zero_with_note() {
    let dir = TempDir::new().unwrap();
    let up = write(&dir, "up.json", r#"{"dim":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}"#);
    let r = json_of(&qorient(&["order-params", "--system", "spin", "--spin", "1/2", "--state", &up, "--ranks", "2"]));
    let res = &r["results"][0];
    assert!(components(res).iter().all(|x| x.abs() < 1e-12));
    assert!(res["note"].as_str().unwrap().contains("spin-1/2"));
}

#[test]
fn ellipse_director_along_x() {
    let r = json_of(&qorient(&["order-params", "--system", "fermi", "--profile", "ellipse:1.2,1.0,0", "--ranks", "2"]));
    let eigen = &r["results"][0]["eigen"];
    let d: Vec<f64> = eigen["director"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((d[0] - 1.0).abs() < 1e-12 && d[1].abs() < 1e-12, "{d:?}");
    assert!(eigen["strength"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_filter_and_tolerance_plumbing() {
    let out = qorient(&["verify", "--only", "spin-roundtrip"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("PASS spin-roundtrip"));

    let out = qorient(&["verify", "--only", "spin-roundtrip,closed-form", "--tolerance", "1e-16"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stdout).unwrap().lines().any(|l| l.starts_with("FAIL")));

    assert_eq!(qorient(&["verify", "--only", "no-such-criterion"]).status.code(), Some(1));
}

#[test]
fn verify_json_report_has_provenance() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("verify.json");
    let out = qorient(&["verify", "--only", "orderwise", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS orderwise"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    self_check(&v).unwrap();
    assert_eq!(v["criteria"][0]["name"], "orderwise");
}

#[test]
fn expand_uniform_circle() {
    let dir = TempDir::new().unwrap();
    let input = circle_samples(dir.path(), |_| 1.0 / (2.0 * PI));
    let r = json_of(&qorient(&["expand", "--input", &input, "--band-limit", "2"]));
    let tensors = r["coefficients"]["tensors"].as_array().unwrap();
    let data = |t: &Value| -> Vec<f64> { t["data"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
    assert_eq!(tensors.len(), 3);
    let rank0 = data(&tensors[0]);
    assert!((rank0[0] - 1.0 / (2.0 * PI)).abs() < 1e-15, "{rank0:?}");
    for t in &tensors[1..] {
        assert!(data(t).iter().all(|x| x.abs() < 1e-15));
    }
    assert!(r["residual"].as_f64().unwrap() < 1e-14);
}

#[test]
fn classical_nematic_and_polar_densities() {
    let dir = TempDir::new().unwrap();
    // Two peaks at φ0 and φ0 + π: no polarization, nonzero nematic order.
    let phi0 = 0.3f64;
    let two = circle_samples(dir.path(), |p| (1.0 + (2.0 * (p - phi0)).cos()) / (2.0 * PI));
    let r = json_of(&qorient(&["order-params", "--system", "classical", "--input", &two, "--ranks", "1,2"]));
    let p = components(&r["results"][0]);
    let q = components(&r["results"][1]);
    assert!(p.iter().all(|x| x.abs() < 1e-14));
    assert!(q.iter().map(|x| x.abs()).fold(0.0, f64::max) > 0.1);
    let d: Vec<f64> = r["results"][1]["eigen"]["director"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((d[1].atan2(d[0]) - phi0).abs() < 1e-12);

    // One peak: polarization dominates.
    let one = circle_samples(dir.path(), |p| (1.0 + 0.9 * (p - phi0).cos()) / (2.0 * PI));
    let r = json_of(&qorient(&["order-params", "--system", "classical", "--input", &one, "--ranks", "1,2"]));
    let p = components(&r["results"][0]).iter().map(|x| x.abs()).fold(0.0, f64::max);
    let q = components(&r["results"][1]).iter().map(|x| x.abs()).fold(0.0, f64::max);
    assert!(p > 0.1 && q < 1e-14, "P {p}, Q {q}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    // Malformed input.
    assert_eq!(qorient(&["order-params", "--system", "spin"]).status.code(), Some(1));
    assert_eq!(qorient(&["order-params", "--system", "spin", "--spin", "x"]).status.code(), Some(1));
    assert_eq!(qorient(&["order-params", "--system", "fermi", "--profile", "blob:1"]).status.code(), Some(1));
    assert_eq!(qorient(&["frobnicate"]).status.code(), Some(1));
    let short = write(&dir, "short.json", r#"{"dim":2,"re":[[1,0]],"im":[[0,0],[0,0]]}"#);
    assert_eq!(qorient(&["order-params", "--system", "spin", "--spin", "1/2", "--state", &short]).status.code(), Some(1));
    // Physics invariant: negative eigenvalue far beyond tolerance.
    let bad = write(&dir, "bad.json", r#"{"dim":2,"re":[[1.5,0],[0,-0.5]],"im":[[0,0],[0,0]]}"#);
    let out = qorient(&["order-params", "--system", "spin", "--spin", "1/2", "--state", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative eigenvalue"));
    // Wrong dimension for the spin.
    let up = write(&dir, "up.json", r#"{"dim":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}"#);
    assert_eq!(qorient(&["order-params", "--system", "spin", "--spin", "1", "--state", &up]).status.code(), Some(1));
}

#[test]
fn output_is_bit_identical_across_runs_and_thread_counts() {
    let args = ["order-params", "--system", "molecular", "--density", "vmf-so3:3,0.2,0.9,1.4", "--ranks", "1,2", "--band-limit", "16"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qorient")).args(args).env("QORIENT_THREADS", threads).output().unwrap()
    };
    let a = run("1");
    let b = run("4");
    let c = run("4");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_qorient")).args(args).env("QORIENT_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn reports_carry_config_that_round_trips() {
    let r = json_of(&qorient(&["order-params", "--system", "fermi", "--profile", "disk:1", "--mode", "fermi_surface", "--ranks", "0,2,4"]));
    self_check(&r).unwrap();
    let config: RunConfig = serde_json::from_value(r["provenance"]["config"].clone()).unwrap();
    let text = config.to_json().unwrap();
    assert_eq!(RunConfig::from_json(&text).unwrap(), config);
    assert_eq!(config.ranks, vec![0, 2, 4]);

    let mut stripped = r.clone();
    stripped.as_object_mut().unwrap().remove("provenance");
    assert!(self_check(&stripped).is_err());
}

#[test]
fn wigner_samples_feed_expand() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("w.csv");
    let out = qorient(&["wigner", "--system", "spin", "--spin", "1", "--state", "m=1", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let r = json_of(&qorient(&["expand", "--input", path.to_str().unwrap()]));
    // ∫μ W dΩ = 1 with μ = 3/4π, so f₀ = (1/4π) ∫W dΩ = 1/3.
    let rank0 = r["coefficients"]["tensors"][0]["data"][0].as_f64().unwrap();
    assert!((rank0 - 1.0 / 3.0).abs() < 1e-12, "{rank0}");
    assert!(r["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn clebsch_table() {
    let out = qorient(&["clebsch", "--j1", "1", "--j2", "1/2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("j1,m1,j2,m2,J,M,value"));
    assert!(text.lines().any(|l| l == "1,1,1/2,1/2,3/2,3/2,1"));
}
