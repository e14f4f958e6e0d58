use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fracsnap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracsnap")).args(args).output().expect("binary runs")
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn error_line(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {text}");
    serde_json::from_str(lines[0]).expect("stderr is JSON")
}

#[test]
fn usage_errors_exit_2_and_write_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = fracsnap(&["--out-dir", out.to_str().unwrap(), "couple", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "usage");
    assert!(!out.exists());

    let o = fracsnap(&["--out-dir", out.to_str().unwrap(), "couple", "--set", "not_a_key=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["exit_code"], 2);
    assert!(!out.exists());

    let o = fracsnap(&["--out-dir", out.to_str().unwrap(), "couple", "--mfd", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = fracsnap(&[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compute_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    // cell larger than width / 8 cannot resolve the wire
    let o = fracsnap(&["--out-dir", out.to_str().unwrap(), "solve-current", "--set", "cell_size_nm=10"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let e = error_line(&o);
    assert_eq!(e["error"], "compute");
    assert!(e["message"].as_str().unwrap().len() > 0);
    assert!(!out.join("crowding.json").exists());
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(fracsnap(&["--help"]).status.code(), Some(0));
    assert_eq!(fracsnap(&["--version"]).status.code(), Some(0));
    assert_eq!(fracsnap(&["reproduce", "--help"]).status.code(), Some(0));
}

#[test]
fn manifest_reruns_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let runs: [&[&str]; 4] = [
        &["couple", "--mfd", "10.7", "--set", "sweep_max_um=2"],
        &["absorptance", "--set", "lambda_step_nm=5"],
        &["fit-jitter", "--seed", "3"],
        &["pulse-sim", "--set", "horizon_ns=40"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let a = tmp.path().join(format!("a{k}"));
        let b = tmp.path().join(format!("b{k}"));
        let mut first = vec!["--out-dir", a.to_str().unwrap()];
        first.extend_from_slice(args);
        let o = fracsnap(&first);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let manifest = a.join("manifest.toml");
        let o = fracsnap(&["--out-dir", b.to_str().unwrap(), args[0], "--config", manifest.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(read_dir(&a), read_dir(&b), "{args:?}");
    }
}

#[test]
fn manifest_for_another_command_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    assert_eq!(fracsnap(&["--out-dir", a.to_str().unwrap(), "couple"]).status.code(), Some(0));
    let m = a.join("manifest.toml");
    let o = fracsnap(&["--out-dir", tmp.path().join("b").to_str().unwrap(), "sde", "--config", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_outputs_have_sorted_keys() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let o = fracsnap(&["--out-dir", a.to_str().unwrap(), "couple", "--set", "oracle_samples=1000", "--set", "budget_target=0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(a.join("coupling.json")).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(keys.contains(&"efficiency"));
    assert!(text.ends_with('\n'));
}

#[test]
fn outputs_stay_inside_out_dir() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("nested").join("out");
    let o = fracsnap(&["--out-dir", a.to_str().unwrap(), "geometry", "--set", "side_nm=2400"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = read_dir(&a).into_keys().collect();
    assert!(names.contains(&"manifest.toml".to_string()));
    assert!(names.contains(&"layout.svg".to_string()));
    let top: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(top, vec![std::ffi::OsString::from("nested")]);
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, jobs) in [(&a, "1"), (&b, "4")] {
        let o = fracsnap(&["--out-dir", dir.to_str().unwrap(), "--jobs", jobs, "reproduce", "fig4"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(read_dir(&a), read_dir(&b));
}
