#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bridgestop"))
        .args(args)
        .env_remove("BRIDGESTOP_THREADS")
        .output()
        .expect("binary runs")
}

pub fn stdout(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
        .join(name)
}

/// Compares `actual` with the stored golden file. `UPDATE_GOLDEN=1`
/// rewrites the file instead.
pub fn check_golden(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some_and(|v| v == "1") {
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!(
            "{name} differs from golden ({} vs {} bytes)",
            actual.len(),
            expected.len()
        ))
    }
}

pub const BETA_SWEEP_SVG: &[&str] = &[
    "beta",
    "--alpha-min",
    "0",
    "--alpha-max",
    "3",
    "--points",
    "31",
    "--format",
    "svg",
];

pub const PATHS_SVG: &[&str] = &[
    "paths", "--alpha", "0.5,1,2", "--paths", "4", "--steps", "200", "--seed", "7", "--format",
    "svg",
];
