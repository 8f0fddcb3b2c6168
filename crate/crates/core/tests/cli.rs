use std::fs;
use std::path::Path;
use std::process::Command;

use gencarve::synth;

const BIN: &str = env!("CARGO_BIN_EXE_gencarve");

fn workspace(images: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    synth::write_bmp_corpus(&dir.path().join("corpus"), images, 21).unwrap();
    synth::write_decoys(&dir.path().join("decoys"), 2, 22).unwrap();
    dir
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    let text = format!(
        "seed = 3\nper_ratio_count = 2\n[pool]\nsize = 10\ndecoy_dir = \"decoys\"\n[matching]\nper_ratio_sample = 1\n{extra}"
    );
    fs::write(&path, text).unwrap();
    path
}

fn run(config: &Path, args: &[&str]) -> i32 {
    let out = Command::new(BIN)
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .unwrap();
    out.status.code().unwrap_or(-1)
}

fn external(mode: &str, after: usize) -> String {
    format!(
        "[predictor]\nkind = \"external\"\ncommand = [{BIN:?}, \"mock-predictor\", \"--mode\", \"{mode}\", \"--after\", \"{after}\"]\ntimeout_ms = 2000\n"
    )
}

#[test]
fn builtin_pipeline_exits_zero() {
    let dir = workspace(10);
    let cfg = write_config(dir.path(), "");
    for step in ["prepare", "train", "predict", "analyze", "match", "report"] {
        assert_eq!(run(&cfg, &[step]), 0, "{step}");
    }
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("Correct match ranked 1st"));
}

#[test]
fn missing_config_is_exit_two() {
    let dir = workspace(1);
    assert_eq!(run(&dir.path().join("nope.toml"), &["prepare"]), 2);
    let bad = write_config(dir.path(), "[weights]\nalpha = \"x\"\n");
    assert_eq!(run(&bad, &["prepare"]), 2);
}

#[test]
fn too_small_corpus_is_exit_two() {
    let dir = workspace(4);
    let cfg = write_config(dir.path(), "");
    assert_eq!(run(&cfg, &["prepare"]), 2);
    assert!(fs::read_to_string(dir.path().join("out/run.log"))
        .unwrap()
        .contains("prepare: error"));
}

#[test]
fn flags_override_config() {
    let dir = workspace(6);
    let cfg = write_config(dir.path(), "");
    let other = dir.path().join("elsewhere");
    assert_eq!(
        run(
            &cfg,
            &["--out", other.to_str().unwrap(), "--seed", "9", "prepare"]
        ),
        0
    );
    let manifest = fs::read_to_string(other.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 9"));
}

#[test]
fn echo_predictor_completes() {
    let dir = workspace(6);
    let cfg = write_config(dir.path(), &external("echo", 0));
    assert_eq!(run(&cfg, &["prepare"]), 0);
    assert_eq!(run(&cfg, &["--jobs", "2", "predict"]), 0);
    let p = dir.path().join("out/predictions/ratio_2_5");
    for entry in fs::read_dir(p).unwrap() {
        let bytes = fs::read(entry.unwrap().path()).unwrap();
        assert_eq!(bytes.len(), 1876);
        assert!(bytes.iter().all(|&b| b == 0x41));
    }
    assert_eq!(run(&cfg, &["analyze"]), 0);
}

#[test]
fn crash_mid_run_is_partial() {
    let dir = workspace(6);
    let cfg = write_config(dir.path(), &external("crash", 1));
    assert_eq!(run(&cfg, &["prepare"]), 0);
    assert_eq!(run(&cfg, &["--jobs", "1", "predict"]), 1);
    let index = fs::read_to_string(dir.path().join("out/predictions/index.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&index).unwrap();
    let entries: Vec<&serde_json::Value> = v["sets"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["entries"].as_array().unwrap())
        .collect();
    assert_eq!(entries.len(), 6);
    let failed = entries.iter().filter(|e| !e["error"].is_null()).count();
    // every respawned process answers one request and crashes on the next
    assert_eq!(failed, 3);
    assert_eq!(run(&cfg, &["analyze"]), 1);
}

#[test]
fn hanging_predictor_times_out() {
    let dir = workspace(6);
    let cfg = write_config(dir.path(), &external("hang", 0).replace("2000", "300"));
    assert_eq!(run(&cfg, &["prepare"]), 0);
    let start = std::time::Instant::now();
    assert_eq!(run(&cfg, &["--jobs", "3", "predict"]), 1);
    assert!(start.elapsed().as_secs() < 20);
}

#[test]
fn analyze_unknown_record_is_exit_two() {
    let dir = workspace(10);
    let cfg = write_config(dir.path(), "");
    for step in ["prepare", "train", "predict"] {
        assert_eq!(run(&cfg, &[step]), 0);
    }
    assert_eq!(run(&cfg, &["analyze", "--heatmap", "no_such_image"]), 2);
}
