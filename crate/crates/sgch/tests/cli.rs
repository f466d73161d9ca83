use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: [&str; 10] = [
    "--points",
    "512",
    "--half-length",
    "20",
    "--t-final",
    "0.5",
    "--n",
    "4,8",
    "--dt",
    "0.01",
];

fn sgch(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgch"))
        .current_dir(dir)
        .env_remove("SGCH_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn small_run(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "exit-stability"];
    args.extend(SMALL);
    args.extend(extra);
    sgch(dir, &args)
}

#[test]
fn lists_presets() {
    let dir = TempDir::new().unwrap();
    let out = sgch(dir.path(), &["presets"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "verify-operators",
        "lemma-asymptotics",
        "instability",
        "wave-breaking",
        "noise-regularization",
        "exit-stability",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn unknown_preset_exits_4() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&sgch(dir.path(), &["run", "peakons"])), 4);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&sgch(dir.path(), &["run", "exit-stability", "--no-such-flag"])), 2);
    assert_eq!(
        code(&sgch(dir.path(), &["run", "exit-stability", "--points", "many"])),
        2
    );
    // a flag the preset has no key for
    assert_eq!(code(&sgch(dir.path(), &["run", "wave-breaking", "--radius", "3"])), 2);
    // a value the solver rejects
    assert_eq!(code(&small_run(dir.path(), &["--dt=-1"])), 2);
    assert_eq!(code(&small_run(dir.path(), &["--perturbation", "wobble"])), 2);
    assert_eq!(code(&sgch(dir.path(), &["run"])), 2);
}

#[test]
fn malformed_config_exits_5() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("syntax.toml", "points = [1,"),
        ("unknown.toml", "wobble = 1"),
        ("type.toml", "points = \"many\""),
        ("schema.toml", "schema = \"sgch.config/0\""),
    ];
    for (name, body) in cases {
        fs::write(dir.path().join(name), body).unwrap();
        let out = sgch(dir.path(), &["run", "exit-stability", "--config", name]);
        assert_eq!(code(&out), 5, "{name}");
    }
    let out = sgch(dir.path(), &["run", "exit-stability", "--config", "missing.toml"]);
    assert_eq!(code(&out), 5);
}

#[test]
fn config_for_another_preset_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.toml"), "preset = \"wave-breaking\"\n").unwrap();
    assert_eq!(
        code(&sgch(dir.path(), &["run", "exit-stability", "--config", "c.toml"])),
        2
    );
}

#[test]
fn breakdown_in_a_strict_preset_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = sgch(dir.path(), &["run", "verify-operators", "--dt", "0.5"]);
    assert_eq!(code(&out), 3);
    let summary = fs::read_to_string(dir.path().join("sgch-out/verify-operators/summary.json")).unwrap();
    assert!(summary.contains("breakdown"));
}

#[test]
fn unwritable_output_exits_6() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("file"), "").unwrap();
    assert_eq!(code(&small_run(dir.path(), &["--out", "file"])), 6);
}

#[test]
fn run_writes_schema_tagged_outputs() {
    let dir = TempDir::new().unwrap();
    let out = small_run(dir.path(), &["--perturbation", "identity"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.path().join("sgch-out/exit-stability");

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "sgch.summary/1");
    assert_eq!(summary["preset"], "exit-stability");
    assert_eq!(summary["passed"], true);
    assert!(summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"] == "identity family has no gap"));

    let records = fs::read_to_string(root.join("records.jsonl")).unwrap();
    assert!(!records.is_empty());
    for line in records.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["schema"], "sgch.record/1");
        assert!(row["kind"].is_string());
    }

    let mut csv = csv::Reader::from_path(root.join("exit_stability.csv")).unwrap();
    assert_eq!(&csv.headers().unwrap()[0], "schema");
    let rows: Vec<csv::StringRecord> = csv.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[0] == "sgch.table/1"));

    let config = fs::read_to_string(root.join("config.toml")).unwrap();
    assert!(config.starts_with("schema = \"sgch.config/1\"\npreset = \"exit-stability\"\n"));
    assert!(config.contains("points = 512"));
    assert!(config.contains("n = [4, 8]"));
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&small_run(dir.path(), &["--out", "first", "--threads", "1"])), 0);
    let first = read_outputs(&dir.path().join("first/exit-stability"));
    let echo = dir.path().join("first/exit-stability/config.toml");
    let out = sgch(
        dir.path(),
        &[
            "run",
            "exit-stability",
            "--config",
            echo.to_str().unwrap(),
            "--out",
            "second",
            "--threads",
            "2",
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(read_outputs(&dir.path().join("second/exit-stability")), first);
}

#[test]
fn output_root_from_environment() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["run", "exit-stability"];
    args.extend(SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_sgch"))
        .current_dir(dir.path())
        .env("SGCH_OUT_DIR", "from-env")
        .args(&args)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("from-env/exit-stability/summary.json").exists());
    assert!(!dir.path().join("sgch-out").exists());
}
