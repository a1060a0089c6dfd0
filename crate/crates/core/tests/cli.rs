use std::fs;
use std::path::Path;
use std::process::Command;

fn lspec(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lspec")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn tmp(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("lspec-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn exit_codes() {
    assert_eq!(lspec(&["spectrum", "--g", "3*cos(q)+4*sin(q)"]).0, 0);
    assert_eq!(lspec(&["positivity", "--g", "t*cos(q)"]).0, 2);
    assert_eq!(lspec(&["spectrum", "--g", "3*cos("]).0, 1);
    assert_eq!(lspec(&["spectrum", "--g", "cos(q)", "--region", "sin(t)"]).0, 1);
    assert_eq!(lspec(&["lambda-k", "--c", "1", "--k", "3"]).0, 0);
}

#[test]
fn spectrum_json_on_stdout() {
    let (code, out) = lspec(&["spectrum", "--g", "-2*sin(q)", "--n-q", "1024"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let vals = v["values"].as_array().unwrap();
    assert!((vals[0].as_f64().unwrap() + 2.0).abs() < 1e-3);
    assert!((vals[1].as_f64().unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let runs: [&[&str]; 3] = [
        &["spectrum", "--g", "cos(q) + 0.5*w1*sin(2*q)", "--K", "1", "--n-q", "128"],
        &["cerf", "--g", "cos(q) + t*(2 + sin(q))", "--n-t", "32", "--positive"],
        &["lambda-scan", "--g", "2 + 0.3*sin(q)", "--f", "cos(3*q)", "--n-lambda", "200"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let (a, b) = (tmp(&format!("{i}-a")), tmp(&format!("{i}-b")));
        let mut one = vec!["--threads", "1", "--out", a.to_str().unwrap()];
        one.extend_from_slice(args);
        let mut four = vec!["--threads", "4", "--out", b.to_str().unwrap()];
        four.extend_from_slice(args);
        let (c1, o1) = lspec(&one);
        let (c4, o4) = lspec(&four);
        assert_eq!((c1, c4), (0, 0), "{args:?}");
        assert_eq!(o1, o4);
        let (fa, fb) = (read_all(&a), read_all(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{args:?}");
        let _ = fs::remove_dir_all(&a);
        let _ = fs::remove_dir_all(&b);
    }
}

#[test]
fn run_config_matches_flags() {
    let dir = tmp("config");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    fs::write(
        &cfg,
        r#"{"schema": 1, "command": {"lambda-k": {"c": 1.0, "k": 2, "samples": 720}}}"#,
    )
    .unwrap();
    let (code, from_file) = lspec(&["run", "--config", cfg.to_str().unwrap()]);
    let (code2, from_flags) = lspec(&["lambda-k", "--c", "1", "--k", "2"]);
    assert_eq!((code, code2), (0, 0), "{from_file}");
    assert_eq!(from_file, from_flags);
    let v: serde_json::Value = serde_json::from_str(&from_file).unwrap();
    assert_eq!(v["count"], 4);
    fs::write(&cfg, r#"{"schema": 7, "command": {"lambda-k": {"c": 1.0, "k": 2}}}"#).unwrap();
    assert_eq!(lspec(&["run", "--config", cfg.to_str().unwrap()]).0, 1);
    let _ = fs::remove_dir_all(&dir);
}
