use std::path::Path;
use std::process::{Command, Output};

fn phasesynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasesynth")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn states_binomial() {
    let out = phasesynth(&["states", "--binomial", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    // (1, sqrt3, sqrt3, 1)/sqrt8
    assert!(text.contains("0.353553390593274"));
    assert!(text.contains("0.612372435695795"));
    assert!(text.contains("mean photon number: 1.500000"));
}

#[test]
fn states_coherent_mean() {
    let out = phasesynth(&["states", "--coherent-mean", "0.5", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["mean_photon_number"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn states_squeezed_approx() {
    let out = phasesynth(&["states", "--squeezed-approx", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1.0146"), "{text}");
    assert!(text.contains("4.77 dB"));
}

#[test]
fn states_from_spec() {
    let out = phasesynth(&[
        "states",
        "--spec",
        r#"{"kind":"ensemble","members":[{"weight":0.5,"state":{"kind":"number","n":0}},{"weight":0.5,"state":{"kind":"number","n":2}}]}"#,
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("mean photon number: 1.000000"));
}

#[test]
fn states_rejects_bad_spec() {
    let out = phasesynth(&["states", "--spec", r#"{"kind":"coherent"}"#]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    assert!(!phasesynth(&["states"]).status.success());
}

#[test]
fn simulate_fig2_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasesynth(&["simulate", "--preset", "fig2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let points = data_rows(&dir.path().join("points.csv"));
    assert_eq!(points.len(), 16);
    assert!(points.iter().all(|r| r.len() == 3 && r[2] == 0.0));
    let curve = data_rows(&dir.path().join("analytic.csv"));
    assert_eq!(curve.len(), 721);
    let header = std::fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert!(header.starts_with("# theta in radians"));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["point_count"], 16);
    assert_eq!(summary["minimum_point_count"], 12);
    assert!(summary["deviation_from_canonical"]["max_abs"].as_f64().unwrap() < 4.82e-4);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    for key in ["points", "analytic", "summary"] {
        let name = manifest["outputs"][key].as_str().unwrap();
        assert!(dir.path().join(name).exists());
    }
    assert_eq!(manifest["source"], "preset:fig2");
    assert_eq!(manifest["config"]["sweep_settings"], 4);
}

#[test]
fn simulate_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    let out = phasesynth(&[
        "simulate",
        "--config",
        presets.join("fig3.json").to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 11);
    assert_eq!(summary["config"]["signal"]["mean_photons"], 0.5);
}

#[test]
fn simulate_mc_is_byte_identical_for_a_seed() {
    let run = |dir: &Path, threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_phasesynth"))
            .env("PHASESYNTH_THREADS", threads)
            .args(["simulate", "--preset", "fig4", "--mode", "mc", "--trials", "30000", "--seed", "5"])
            .args(["--out", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(dir.join("points.csv")).unwrap(), std::fs::read(dir.join("analytic.csv")).unwrap())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(a.path(), "1");
    let second = run(b.path(), "3");
    assert_eq!(first, second);
    let rows = data_rows(&a.path().join("points.csv"));
    assert!(rows.iter().all(|r| r[2] > 0.0));
}

#[test]
fn csv_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert!(phasesynth(&["simulate", "--preset", "fig2", "--out", dir.path().to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(dir.path().join("points.csv")).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        for field in line.split(',') {
            let x: f64 = field.parse().unwrap();
            assert_eq!(x.to_string(), field);
            assert_eq!(format!("{x:.16e}").parse::<f64>().unwrap(), x);
        }
    }
}

#[test]
fn simulate_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"signal":{"kind":"binomial","n":3},"reference":{"kind":"binomial","n":3},"sweep_settings":0}"#,
    )
    .unwrap();
    let out = phasesynth(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep_settings"));
    let missing = phasesynth(&["simulate", "--config", "/nonexistent.json", "--out", dir.path().to_str().unwrap()]);
    assert!(!missing.status.success());
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_phasesynth"))
        .env("PHASESYNTH_THREADS", "zero")
        .args(["states", "--binomial", "2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("PHASESYNTH_THREADS"));
}

#[test]
fn validate_passes() {
    let out = phasesynth(&["validate"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("all checks passed"));
}

#[test]
fn validate_json_and_fault_injection() {
    let out = phasesynth(&["validate", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 6);

    for fault in ["unitarity", "dft-network", "engine-equivalence", "event-rate", "bernoulli-round-trip", "parseval"] {
        let out = phasesynth(&["validate", "--json", "--inject-fault", fault]);
        assert!(!out.status.success(), "{fault}");
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        for check in v["checks"].as_array().unwrap() {
            assert_eq!(check["passed"], check["name"] != fault, "{fault}");
        }
    }
}
