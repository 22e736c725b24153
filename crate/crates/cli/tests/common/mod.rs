#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Commands run inside the fixture directory so that relative paths, and
/// therefore config hashes, are stable.
pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn argclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argclust"))
        .args(args)
        .current_dir(fixture(""))
        .env_remove("ARGCLUST_DATA_DIR")
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Runs `args` with `--out <dir>` and returns every artifact as
/// `(file name, bytes)`, sorted by name.
pub fn artifacts(args: &[&str], dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut full: Vec<&str> = args.to_vec();
    let d = dir.to_str().expect("utf-8 temp path");
    full.extend(["--out", d, "--quiet"]);
    let out = argclust(&full);
    assert!(out.status.success(), "{args:?} failed: {}", stderr(&out));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("output dir")
        .map(|e| {
            let e = e.expect("dir entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("artifact"))
        })
        .collect();
    files.sort();
    files
}

/// The determinism check shared by the CLI tests and the acceptance run:
/// two identical invocations, then `--jobs 1` against `--jobs 4`.
pub fn deterministic(args: &[&str]) -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str, extra: &[&str]| {
        let mut a = args.to_vec();
        a.extend_from_slice(extra);
        artifacts(&a, &tmp.path().join(name))
    };
    let first = run("a", &[]);
    if first != run("b", &[]) {
        return Err(format!("{args:?}: repeated runs differ"));
    }
    if run("j1", &["--jobs", "1"]) != run("j4", &["--jobs", "4"]) {
        return Err(format!("{args:?}: --jobs 1 and --jobs 4 differ"));
    }
    Ok(())
}
