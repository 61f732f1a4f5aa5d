use std::path::{Path, PathBuf};
use std::process::Command;

use subeq::report::to_json_string;
use subeq::{run_pipeline, SystemConfig};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn shipped() -> Vec<(String, SystemConfig)> {
    let mut out: Vec<(String, SystemConfig)> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), SystemConfig::load(&p).unwrap()))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Report plus tables, as file name and contents.
fn payload(config: &SystemConfig) -> Vec<(String, String)> {
    let run = run_pipeline(config).unwrap();
    assert_eq!(run.exit_code(), 0);
    let mut files = vec![("report.json".to_string(), to_json_string(&run.report))];
    files.extend(run.tables.into_iter().map(|t| (t.file, t.contents)));
    files
}

#[test]
fn shipped_configs_are_deterministic() {
    for (name, config) in shipped() {
        assert_eq!(payload(&config), payload(&config), "{name}");
    }
}

#[test]
fn shipped_configs_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (name, config) in shipped() {
        let dir = golden_dir().join(&name);
        if update {
            let _ = std::fs::remove_dir_all(&dir);
            std::fs::create_dir_all(&dir).unwrap();
        }
        for (file, contents) in payload(&config) {
            let path = dir.join(&file);
            if update {
                std::fs::write(&path, &contents).unwrap();
            } else {
                let expected = std::fs::read_to_string(&path)
                    .unwrap_or_else(|e| panic!("{}: {e}; regenerate with UPDATE_GOLDEN=1", path.display()));
                assert!(expected == contents, "{name}/{file} differs from its golden file");
            }
        }
    }
}

#[test]
fn golden_mean_pressure_matches_perron_root() {
    let config = SystemConfig::load(&configs_dir().join("golden_identity.json")).unwrap();
    let run = run_pipeline(&config).unwrap();
    let p = run.report["results"][0]["result"]["extrapolated"].as_f64().unwrap();
    let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!((p - log_phi).abs() < 5e-7, "{p}");
}

fn subeq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subeq"))
}

#[test]
fn non_square_adjacency_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"adjacency": [[1, 1], [1]],
            "cocycle": {"d": 1, "k": 0, "alpha": 1.0, "entries": [{"window": "0", "matrix": [[1.0]]}]},
            "analyses": [{"kind": "pressure", "n_max": 4}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = subeq().arg("run").arg(&config).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn divergence_exits_3_with_marker() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("unbunched.json");
    // diag(4, 1) breaks bunching, so the radius-one holonomy is refused.
    std::fs::write(
        &config,
        r#"{"adjacency": [[1, 1], [1, 1]],
            "cocycle": {"d": 2, "k": 1, "alpha": 1.0, "entries": [
                {"window": "00", "matrix": [[4.0, 0.0], [0.0, 1.0]]},
                {"window": "01", "matrix": [[1.0, 0.0], [0.0, 1.0]]},
                {"window": "10", "matrix": [[1.0, 0.0], [0.0, 1.0]]},
                {"window": "11", "matrix": [[1.0, 0.0], [0.0, 1.0]]}]},
            "analyses": [{"kind": "bunching", "mode": "fiber"},
                         {"kind": "holonomy", "x": "0/1/0", "y": "1/0/0", "side": "s", "n": 10}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = subeq().arg("run").arg(&config).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["failed_after"], "bunching#0");
    assert_eq!(report["failure"]["analysis"], "holonomy#1");
    assert!(out.join("timings.json").exists());
}

#[test]
fn run_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let status = subeq()
        .arg("run")
        .arg(configs_dir().join("scalar_1_2.json"))
        .arg("--out")
        .arg(dir.path())
        .env("SUBEQ_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for f in ["report.json", "timings.json", "pressure.csv", "gibbs_n10.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let gibbs = std::fs::read_to_string(dir.path().join("gibbs_n10.csv")).unwrap();
    assert_eq!(gibbs.lines().count(), 1 + 1024);
}

#[test]
fn per_analysis_subcommands() {
    let config = configs_dir().join("scalar_1_2.json");
    let out = subeq().args(["pressure", "--n-max", "4", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["upper_bound"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-12);

    let out = subeq().args(["qm", "--n", "2", "--k-max", "1", "--potential", "sv:1", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success());

    let out = subeq().args(["pressure", "--n-max", "1", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dbar_subcommand_reads_csv() {
    let dir = tempfile::tempdir().unwrap();
    let left = dir.path().join("l.csv");
    let right = dir.path().join("r.csv");
    std::fs::write(&left, "sequence,mass\n0,0.2\n1,0.8\n").unwrap();
    std::fs::write(&right, "sequence,mass\n0,0.7\n1,0.3\n").unwrap();
    let coupling = dir.path().join("coupling.csv");
    let out = subeq()
        .args(["dbar", "--n", "1", "--left"])
        .arg(&left)
        .arg("--right")
        .arg(&right)
        .arg("--coupling")
        .arg(&coupling)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(std::fs::read_to_string(&coupling).unwrap().starts_with("left,right,mass"));
}
