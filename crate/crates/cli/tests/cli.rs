use std::path::Path;
use std::process::{Command, Output};

fn beurling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beurling"))
        .args(args)
        .env("BEURLING_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const LOG_LINE: &str = r#"{
    "experiment_id": "log-line",
    "space": {"type": "log_metric_line"},
    "kernel": {"type": "paley_wiener_box", "widths": [1.0]},
    "pointset": {"type": "lattice", "steps": [1.0], "window": 4.0},
    "radii": [1.0, 2.0],
    "audit": {"wl_radii": [1.0, 2.0, 3.0], "hap_radii": [0.5, 1.0, 2.0]}
}"#;

#[test]
fn list_names_the_canonical_experiments() {
    let o = beurling(&["list"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(names.len(), 8);
    assert!(names.contains(&"gabor-ab-1.2".to_string()));
}

#[test]
fn verdict_on_dense_paley_wiener_lattice_is_sampling_like() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = beurling(&["run", "--canonical", "pw-alpha-0.8", "--stage", "verdict", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["empirical_class"], "sampling-like");
    assert_eq!(r["consistent"], true);
    assert_eq!(r["config"]["thresholds"]["tau"], 0.5);
    assert!(dir.path().join("manifest.json").exists());
    // the verdict stage writes no curves
    assert!(!dir.path().join("csv").exists());
}

#[test]
fn audit_on_log_metric_line_is_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("log.json");
    std::fs::write(&cfg, LOG_LINE).unwrap();
    let out = dir.path().join("out");
    let o = beurling(&["audit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let wad = stdout(&o).lines().find(|l| l.starts_with("WAD")).unwrap().to_owned();
    assert!(wad.contains("false"), "{wad}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("WAD"));
}

#[test]
fn input_errors_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(code(&beurling(&["run", "--canonical", "nope", "--out", out])), 4);
    assert_eq!(code(&beurling(&["run", "--canonical", "pw-alpha-1", "--stage", "plot", "--out", out])), 4);
    assert_eq!(code(&beurling(&["run", "--out", out])), 4);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, LOG_LINE.replace("\"radii\"", "\"radius\"")).unwrap();
    assert_eq!(code(&beurling(&["density", "--config", bad.to_str().unwrap(), "--out", out])), 4);

    let jitter = dir.path().join("jitter.json");
    let text = LOG_LINE
        .replace("log_metric_line\"", "euclidean_lebesgue\", \"dim\": 1")
        .replace("\"type\": \"lattice\"", "\"type\": \"jittered_lattice\", \"jitter\": 0.6")
        .replace("\"window\": 4.0", "\"window\": 40.0");
    std::fs::write(&jitter, text).unwrap();
    let o = beurling(&["density", "--config", jitter.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));

    let o = Command::new(env!("CARGO_BIN_EXE_beurling"))
        .args(["list"])
        .env("BEURLING_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "listing needs no thread pool");
}

#[test]
fn all_stage_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = beurling(&["all", "--canonical", "pw-alpha-1.25", "--seed", "11", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    let outputs: Vec<String> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_owned()).collect();
    assert!(outputs.iter().any(|f| f.ends_with("gram_spectra.csv")));
    for f in outputs.iter().filter(|f| *f != "manifest.json") {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    assert_eq!(manifest["seed"], 11);
}

#[test]
fn every_canonical_experiment_exits_consistent() {
    for name in [
        "pw-alpha-0.8",
        "pw-alpha-1",
        "pw-alpha-1.25",
        "fock-s-0.8",
        "fock-s-1.2",
        "gabor-ab-0.8",
        "gabor-ab-1.2",
        "synthetic-poly-decay",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let o = beurling(&["verdict", "--canonical", name, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(report(dir.path())["consistent"], true, "{name}");
    }
}
