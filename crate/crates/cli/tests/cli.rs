use std::path::Path;
use std::process::{Command, Output};

fn degenfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degenfem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sidecar(mesh: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(format!("{}.json", mesh.display())).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn triangle_count(mesh: &Path) -> usize {
    let text = std::fs::read_to_string(mesh).unwrap();
    let tri = degenfem::Triangulation::read_native(text.as_bytes()).unwrap();
    tri.num_triangles()
}

#[test]
fn gen_uniform_writes_128_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("u.txt");
    let out = degenfem(&["gen", "uniform", "--n", "8", "--out", mesh.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(triangle_count(&mesh), 128);
    assert_eq!(sidecar(&mesh)["family"], "uniform");
}

#[test]
fn gen_ba_reports_one_band_per_strip() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("ba.txt");
    let out = degenfem(&["gen", "ba", "--nx", "8", "--ny", "64", "--out", mesh.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(sidecar(&mesh)["bands"].as_array().unwrap().len(), 64);
}

#[test]
fn gen_band_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("band.txt");
    let m = mesh.to_str().unwrap();
    let out = degenfem(&["gen", "band", "--nx", "8", "--hbar", "0.001953125", "--out", m]);
    assert!(out.status.success());
    assert_eq!(sidecar(&mesh)["bands"].as_array().unwrap().len(), 1);

    let out = degenfem(&["report", "--mesh", m]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["t2_count"].as_u64().unwrap() > 0);
    assert_eq!(report["sufficient"]["verdict"], false);
    let lhs = report["necessary"]["aggregate"].as_f64().unwrap();
    let closed = report["necessary"]["aggregate_closed_form"].as_f64().unwrap();
    assert!(lhs >= closed * (1.0 - 1e-12), "{lhs} < {closed}");
}

#[test]
fn gen_subdivided_report_is_admissible() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("sub.txt");
    let m = mesh.to_str().unwrap();
    let out = degenfem(&["gen", "subdivided", "--nx", "8", "--hbar", "0.001953125", "--out", m]);
    assert!(out.status.success());
    let out = degenfem(&["report", "--mesh", m]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["sufficient"]["verdict"], true);
}

#[test]
fn gen_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("c.txt");
    let m = mesh.to_str().unwrap();
    let out = degenfem(&["gen", "cluster", "--n", "8", "--block", "3,3,2", "--rows", "6", "--out", m]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!sidecar(&mesh)["clusters"][0].as_array().unwrap().is_empty());
}

#[test]
fn solve_writes_field() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("u.txt");
    let field = dir.path().join("u.field");
    let m = mesh.to_str().unwrap();
    assert!(degenfem(&["gen", "uniform", "--n", "8", "--out", m]).status.success());
    let out = degenfem(&["solve", "--mesh", m, "--solution", "quadratic", "--out", field.to_str().unwrap()]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let err = summary["h1_error"].as_f64().unwrap();
    assert!((err - 1.0206e-1).abs() < 1e-4, "{err}");
    let text = std::fs::read_to_string(&field).unwrap();
    let values = degenfem::interp::NodalField::read_text(text.as_bytes()).unwrap();
    assert_eq!(values.values.len(), 81);
}

#[test]
fn verify_suites_exit_zero() {
    for suite in ["identities", "interp", "correction", "necessary"] {
        let out = degenfem(&["verify", suite, "--seed", "7"]);
        assert!(out.status.success(), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(!text.contains("FAIL"), "{text}");
    }
}

#[test]
fn study_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("run{run}.csv"));
        let out = degenfem(&[
            "study", "--family", "ba", "--beta", "1.5", "--n", "8,16", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].starts_with(b"h,hbar,"));
}

#[test]
fn study_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.json");
    let out = degenfem(&[
        "study", "--family", "uniform", "--n", "8,16,32", "--format", "json", "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    let slope = v["rate"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
}

#[test]
fn invalid_parameters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("x.txt");
    let m = m.to_str().unwrap();
    assert_eq!(degenfem(&["gen", "ba", "--nx", "0", "--ny", "4", "--out", m]).status.code(), Some(2));
    assert_eq!(degenfem(&["gen", "band", "--nx", "8", "--hbar", "0.7", "--out", m]).status.code(), Some(2));
    assert_eq!(degenfem(&["study", "--family", "nonsense"]).status.code(), Some(2));
    assert_eq!(degenfem(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(degenfem(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(degenfem(&["solve", "--mesh", "/nonexistent/mesh.txt"]).status.code(), Some(2));
}
