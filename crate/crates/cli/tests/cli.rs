use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prodsamp"))
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: serde_json::Value) -> PathBuf {
    let f = fixtures();
    let mut body = body;
    body["factors"] = serde_json::json!([p(&f.join("toy_a1.mtx")), p(&f.join("toy_a2.mtx"))]);
    let path = dir.join("config.json");
    fs::write(&path, body.to_string()).unwrap();
    path
}

#[test]
fn toy_plan_reports_projection() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    ok(&["plan", "--config", p(&fixtures().join("toy_config.json")), "-o", p(&plan)]);
    let v = json(&plan);
    assert_eq!(v["r"][0], serde_json::json!([1, 3, 4]));
    assert_eq!(v["r"][1].as_array().unwrap().len(), 2);
    assert_eq!(v["s"], 6);
    assert_eq!(v["k"], 3);
    assert_eq!(v["sample_sets"], serde_json::json!([[1, 3, 4], [2, 3]]));
    assert_eq!(
        v["sample_tuples"],
        serde_json::json!([[1, 2], [1, 3], [3, 2], [3, 3], [4, 2], [4, 3]])
    );
    assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["seed"], 0);
    assert_eq!(v["sigma_min"].as_array().unwrap().len(), 2);
}

#[test]
fn synth_sample_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d, serde_json::json!({"kind": "strong", "support": {"top_k": 4}, "seed": 3}));
    let plan = d.join("plan.json");
    ok(&["plan", "--config", p(&cfg), "-o", p(&plan)]);
    for ext in ["csv", "bin"] {
        let x = d.join(format!("x.{ext}"));
        let xm = d.join(format!("xm.{ext}"));
        let xr = d.join(format!("xr.{ext}"));
        ok(&["synth", "--config", p(&cfg), "--seed", "11", "-o", p(&x)]);
        ok(&["sample", "--plan", p(&plan), "--signal", p(&x), "-o", p(&xm)]);
        let out = ok(&["reconstruct", "--plan", p(&plan), "--samples", p(&xm), "-o", p(&xr), "--reference", p(&x)]);
        let e: f64 = out.trim().strip_prefix("relative_error ").unwrap().parse().unwrap();
        assert!(e <= 1e-9, "{ext}: {e}");
    }
    let head = fs::read_to_string(d.join("x.csv")).unwrap();
    assert!(head.starts_with(&format!("# prodsamp {} seed=11", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn top_k_beyond_graph_size_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({"kind": "kron", "support": {"top_k": 13}}));
    let out = run(&["plan", "--config", p(&cfg), "-o", p(&dir.path().join("plan.json"))]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("out of range"), "{err}");
}

#[test]
fn bad_sample_set_names_the_factor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({"kind": "kron", "support": {"tuples": [[1, 1], [4, 3], [3, 3]]}, "sample_sets": [[1, 3, 4], [2, 2]]}),
    );
    let out = run(&["plan", "--config", p(&cfg), "-o", p(&dir.path().join("plan.json"))]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("prodsamp: plan: factor 2:"), "{err}");
}

#[test]
fn missing_factor_file_names_the_factor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"factors": ["nope.mtx"], "kind": "kron", "support": {"top_k": 1}}"#).unwrap();
    let out = run(&["plan", "--config", p(&cfg), "-o", p(&dir.path().join("plan.json"))]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("prodsamp: config: factor 1:") && err.contains("nope.mtx"), "{err}");
}

#[test]
fn product_and_spectrum_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.mtx");
    let path4 = fixtures().join("path4.mtx");
    ok(&["product", "--kind", "cart", p(&path4), p(&path4), "-o", p(&out)]);
    let text = ok(&["spectrum", p(&out), "--top", "3"]);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "index,eigenvalue");
    assert_eq!(rows.len(), 4);
    // largest eigenvalue of P4 x P4 (Cartesian) is 2 * 2cos(pi/5)
    let top: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((top - 4.0 * (std::f64::consts::PI / 5.0).cos()).abs() < 1e-12);
    let bad = run(&["spectrum", p(&out), "--top", "17"]);
    assert!(!bad.status.success());
}

#[test]
fn study_and_bench_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let study = d.join("study.csv");
    ok(&["study-cartesian", "--n1", "8", "--n2", "8", "--kmax", "10", "-o", p(&study)]);
    let text = fs::read_to_string(&study).unwrap();
    assert!(text.starts_with("# prodsamp"));
    assert!(text.contains("ordering: descending adjacency eigenvalue sum"));
    assert_eq!(text.lines().count(), 12);

    let cfg = d.join("bench.json");
    fs::write(
        &cfg,
        r#"{"scenarios": [{"id": "small", "factors": [{"n": 6, "model": "erdos_renyi", "p": 0.5, "seed": 1},
                                                      {"n": 5, "model": "cycle", "seed": 0}],
                            "kind": "kron", "k": 3, "seed": 2}]}"#,
    )
    .unwrap();
    let csv = d.join("results.csv");
    let out = bin()
        .args(["bench", "--config", p(&cfg), "-o", p(&csv)])
        .env("PRODSAMP_DENSE_CAP", "10")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = prodsamp::bench::read_bench_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].dense_spectral_s.is_none(), "cap of 10 nodes skips N = 30");
    assert!(rows[0].fact_error <= 1e-9);
}
