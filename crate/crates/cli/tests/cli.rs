mod common;

use common::{check_golden, run, stdout, BETA_SWEEP_SVG, PATHS_SVG};
use serde_json::Value;

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&stdout(args)).expect("valid JSON")
}

fn csv_rows(bytes: &[u8]) -> Vec<Vec<String>> {
    String::from_utf8(bytes.to_vec())
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn beta_single_values() {
    let rows = csv_rows(&stdout(&["beta", "--alpha", "1"]));
    assert_eq!(rows[0], ["alpha", "beta", "x_alpha", "residual"]);
    let b: f64 = rows[1][1].parse().unwrap();
    assert!((b - 0.839924).abs() <= 1e-5);
    let rows = csv_rows(&stdout(&["beta", "--alpha", "0"]));
    assert_eq!(rows[1][1], "1.0");
    assert_eq!(rows[1][2], "");
}

#[test]
fn beta_sweep_csv() {
    let rows = csv_rows(&stdout(&[
        "beta",
        "--alpha-min",
        "0.1",
        "--alpha-max",
        "3",
        "--points",
        "30",
        "--format",
        "csv",
    ]));
    assert_eq!(rows.len(), 31);
    for row in &rows[1..] {
        let residual: f64 = row[3].parse().unwrap();
        assert!(residual.abs() <= 1e-10, "{row:?}");
    }
    assert_eq!(rows[1][0], "0.1");
    assert_eq!(rows[30][0], "3.0");
}

#[test]
fn json_envelope_is_stable() {
    let doc = json(&[
        "beta",
        "--alpha-min",
        "0.5",
        "--alpha-max",
        "2",
        "--points",
        "4",
        "--format",
        "json",
    ]);
    let keys: Vec<&str> = doc
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(keys, ["config", "diagnostics", "results"]);
    assert_eq!(doc["config"]["command"], "beta");
    assert_eq!(doc["results"].as_array().unwrap().len(), 4);
    assert!(doc["diagnostics"]["max_abs_residual"].as_f64().unwrap() <= 1e-10);
    let bytes = stdout(&[
        "beta",
        "--alpha-min",
        "0.5",
        "--alpha-max",
        "2",
        "--points",
        "4",
        "--format",
        "json",
    ]);
    check_golden("beta_sweep.json", &bytes).unwrap();
    check_golden("value.json", &stdout(&["value", "--format", "json"])).unwrap();
}

#[test]
fn value_reports() {
    let doc = json(&["value", "--format", "json"]);
    let v = doc["results"]["value"].as_f64().unwrap();
    assert!((v - 0.3691364).abs() <= 1e-6, "{v}");
    assert_eq!(doc["results"]["region"], "continue");

    let doc = json(&["value", "--x", "2", "--t", "0.5", "--format", "json"]);
    assert_eq!(doc["results"]["value"].as_f64().unwrap(), 2.0);
    assert_eq!(doc["results"]["region"], "stop");

    let doc = json(&[
        "value",
        "--alpha",
        "0.5",
        "--gamma-final",
        "0.3",
        "--x",
        "-1e6",
        "--format",
        "json",
    ]);
    assert!((doc["results"]["value"].as_f64().unwrap() - 0.3).abs() <= 1e-6);

    let rows = csv_rows(&stdout(&[
        "value",
        "--curve",
        "linear",
        "--curve-scale",
        "2",
        "--x",
        "-0.5",
        "--t",
        "0.25",
    ]));
    assert_eq!(rows[0], ["alpha", "beta", "x", "t", "value", "region"]);
    assert_eq!(rows[1][3], "0.25");
}

#[test]
fn paths_band_and_pinning() {
    let doc = json(&[
        "paths", "--alpha", "1", "--paths", "3", "--steps", "100", "--seed", "5", "--format",
        "json",
    ]);
    assert_eq!(doc["diagnostics"]["pinned"], true);
    let panel = &doc["results"][0];
    let times = panel["times"].as_array().unwrap();
    for (k, t) in times.iter().enumerate() {
        let s = t.as_f64().unwrap();
        assert_eq!(panel["mean"][k].as_f64().unwrap(), 0.0);
        let std = panel["std"][k].as_f64().unwrap();
        assert!((std - (s * (1.0 - s)).sqrt()).abs() <= 1e-12, "s={s}");
    }
    let doc = json(&[
        "paths", "--alpha", "2", "--paths", "1", "--steps", "50", "--format", "json",
    ]);
    assert!(doc["results"][0]["mean"]
        .as_array()
        .unwrap()
        .iter()
        .all(|m| m.as_f64() == Some(0.0)));
}

#[test]
fn paths_csv_layouts() {
    let rows = csv_rows(&stdout(&["paths", "--paths", "2", "--steps", "10"]));
    assert_eq!(rows[0], ["path_id", "t", "x"]);
    assert_eq!(rows.len(), 1 + 2 * 11);
    let rows = csv_rows(&stdout(&[
        "paths", "--alpha", "0.5,2", "--paths", "2", "--steps", "10",
    ]));
    assert_eq!(rows[0], ["alpha", "path_id", "t", "x"]);
    assert_eq!(rows.len(), 1 + 2 * 2 * 11);
}

#[test]
fn svg_goldens_are_byte_stable() {
    let first = stdout(BETA_SWEEP_SVG);
    assert_eq!(first, stdout(BETA_SWEEP_SVG));
    check_golden("beta_sweep.svg", &first).unwrap();
    let first = stdout(PATHS_SVG);
    assert_eq!(first, stdout(PATHS_SVG));
    check_golden("paths.svg", &first).unwrap();
    let single = stdout(&["paths", "--paths", "1", "--seed", "3", "--format", "svg"]);
    assert_eq!(
        single,
        stdout(&["paths", "--paths", "1", "--seed", "3", "--format", "svg"])
    );
    let text = String::from_utf8(single).unwrap();
    assert!(text.starts_with(r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="500""#));
}

#[test]
fn verify_passes_and_reports() {
    let out = run(&[
        "verify", "--paths", "4000", "--steps", "400", "--seed", "3", "--format", "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["diagnostics"]["passed"], true);
    assert_eq!(doc["results"]["scan"]["rows"].as_array().unwrap().len(), 5);

    let out = run(&[
        "verify", "--scales", "1", "--paths", "4000", "--steps", "400",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out.stdout);
    assert_eq!(
        rows[0],
        ["c", "mean", "std_error", "n_paths", "n_steps", "seed"]
    );
    assert_eq!(rows.len(), 2);
}

#[test]
fn verify_exits_one_when_the_check_fails() {
    // On a 100-step grid, crossings are seen late and a slightly lower
    // barrier beats c = 1 by many paired standard errors.
    let out = run(&[
        "verify",
        "--scales",
        "0.9,0.95,1",
        "--paths",
        "200000",
        "--steps",
        "100",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
    assert_eq!(csv_rows(&out.stdout).len(), 4);
}

#[test]
fn deterministic_given_seed() {
    let args = [
        "verify", "--paths", "500", "--steps", "200", "--seed", "9", "--format", "json",
    ];
    assert_eq!(stdout(&args), stdout(&args));
    let threaded = std::process::Command::new(env!("CARGO_BIN_EXE_bridgestop"))
        .args(args)
        .env("BRIDGESTOP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(threaded.stdout, stdout(&args));
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["beta", "--alpha", "9"],
        &["beta", "--alpha", "-1"],
        &["value", "--curve", "power"],
        &["value", "--curve-exp", "2"],
        &["value", "--format", "svg"],
        &["value", "--t", "1.5"],
        &["paths", "--paths", "0"],
        &["verify", "--scales", "0.5,2"],
        &["verify", "--paths", "10"],
        &["verify", "--curve", "file"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
    let bad_threads = std::process::Command::new(env!("CARGO_BIN_EXE_bridgestop"))
        .args(["beta", "--alpha", "1"])
        .env("BRIDGESTOP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn invalid_curve_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,gamma\n0,1.0\n0.5,1.2\n1,0.5\n").unwrap();
    let out = run(&[
        "verify",
        "--curve",
        "file",
        "--curve-file",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not decreasing"));

    let missing = dir.path().join("missing.csv");
    let out = run(&[
        "value",
        "--curve",
        "file",
        "--curve-file",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let good = dir.path().join("good.csv");
    std::fs::write(&good, "t,gamma\n0,1.5\n0.5,1.2\n1,1.0\n").unwrap();
    let out_file = dir.path().join("v.json");
    let out = run(&[
        "value",
        "--curve",
        "file",
        "--curve-file",
        good.to_str().unwrap(),
        "--x",
        "1.0",
        "--format",
        "json",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_slice(&std::fs::read(out_file).unwrap()).unwrap();
    assert_eq!(doc["diagnostics"]["curve"]["gamma_final"], 1.0);
}
