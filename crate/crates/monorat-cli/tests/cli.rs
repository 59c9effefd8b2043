//! End-to-end checks of the binary: exit codes, file outputs, round-trip
//! fidelity and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use monorat::ratcore::from_json_str;

fn monorat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monorat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn construct_base_case_reports_unit_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f1.json");
    let run = monorat(&["construct", "--n", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    assert!(text.contains("ratio=1 "), "stdout: {text}");
    assert!(out.exists());
    assert!(dir.path().join("f1.report.json").exists());
}

#[test]
fn construct_rejects_zero_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let run = monorat(&["construct", "--n", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 1);
    assert!(String::from_utf8_lossy(&run.stderr).contains("--n"));
}

#[test]
fn construct_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f3.json");
    let run = monorat(&["construct", "--n", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let text = fs::read_to_string(&out).unwrap();
    let f = from_json_str(&text).expect("emitted function parses");
    let emitted = monorat::ratcore::to_json_string(&f).unwrap();
    let g = from_json_str(&emitted).unwrap();
    for i in 0..=1000 {
        let x = -1.0 + 0.002 * i as f64;
        let a = f.eval(x).unwrap();
        let b = g.eval(x).unwrap();
        assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
    }
}

#[test]
fn construct_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for (path, _) in [(&out_a, 0), (&out_b, 1)] {
        let run = monorat(&[
            "construct",
            "--n",
            "4",
            "--rho",
            "0.01",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&run), 0);
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.report.json")).unwrap(),
        fs::read(dir.path().join("b.report.json")).unwrap()
    );
}

#[test]
fn construct_past_the_scale_floor_writes_partial_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("deep.json");
    let run = monorat(&["construct", "--n", "25", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 3);
    assert!(stdout(&run).contains("partial=true"));
    let report = fs::read_to_string(dir.path().join("deep.report.json")).unwrap();
    assert!(report.contains("\"partial\": true"));
    // The partial function is still a valid, loadable construction.
    let f = from_json_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(f.eval(1.0).unwrap().is_finite());
}

fn write_identity(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("identity.json");
    fs::write(
        &path,
        r#"{"form":"rational","numer":[0.0,1.0],"denom":[1.0],"declared_degree":1}"#,
    )
    .unwrap();
    path
}

#[test]
fn verify_identity_passes_both_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_identity(dir.path());
    let run = monorat(&["verify", "--input", input.to_str().unwrap(), "--n", "1"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    assert!(text.contains("\"verdict\": \"PASS\""), "stdout: {text}");
}

#[test]
fn verify_non_odd_increasing_runs_envelope_only() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tilted.json");
    // x + 0.1x²: increasing on [-1, 1] (slope 1 + 0.2x > 0), not odd.
    fs::write(
        &input,
        r#"{"form":"rational","numer":[0.0,1.0,0.1],"denom":[1.0],"declared_degree":2}"#,
    )
    .unwrap();
    let run = monorat(&["verify", "--input", input.to_str().unwrap(), "--n", "2"]);
    assert_eq!(code(&run), 0, "stderr: {}", String::from_utf8_lossy(&run.stderr));
    let text = stdout(&run);
    assert!(text.contains("\"odd\": false"));
    assert!(text.contains("\"center_bound\": null"));
    assert!(text.contains("\"verdict\": \"PASS\""));
}

#[test]
fn verify_rejects_non_monotone_with_code_5() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("peak.json");
    // 0.5·x/(x² + 0.25): slope changes sign at |x| = 0.5.
    fs::write(
        &input,
        r#"{"form":"rational","numer":[0.0,0.5],"denom":[0.25,0.0,1.0],"declared_degree":2}"#,
    )
    .unwrap();
    let run = monorat(&["verify", "--input", input.to_str().unwrap(), "--n", "2"]);
    assert_eq!(code(&run), 5);
    assert!(stdout(&run).contains("NOT_APPLICABLE"));
}

#[test]
fn verify_malformed_json_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("broken.json");
    fs::write(&input, "{\n  \"form\": \"rational\",\n  oops\n}").unwrap();
    let run = monorat(&["verify", "--input", input.to_str().unwrap(), "--n", "1"]);
    assert_eq!(code(&run), 2);
    let err = String::from_utf8_lossy(&run.stderr).into_owned();
    assert!(err.contains("line 3"), "stderr: {err}");
}

#[test]
fn verify_constructed_function_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f4.json");
    let run = monorat(&["construct", "--n", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let run = monorat(&["verify", "--input", out.to_str().unwrap(), "--n", "7"]);
    assert_eq!(code(&run), 0, "stderr: {}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout(&run).contains("\"verdict\": \"PASS\""));
}

#[test]
fn nodes_writes_threshold_and_node_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nodes.csv");
    let run = monorat(&[
        "nodes",
        "--n",
        "1",
        "--delta",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    assert!(stdout(&run).starts_with("residual_inf="));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("i,u_i,v_i,z_i,residual_i"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    let u: f64 = row[1].parse().unwrap();
    let v: f64 = row[2].parse().unwrap();
    assert!((u - 0.266_666_666_666_666_66).abs() < 1e-9);
    assert_eq!(v, 1.0);
}

#[test]
fn nodes_rejects_shallow_target_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nodes.csv");
    let run = monorat(&[
        "nodes",
        "--n",
        "1",
        "--delta",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 4);
}

#[test]
fn table_rows_carry_the_sandwich() {
    let run = monorat(&["table", "--max-n", "3", "--rho", "0.01"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let mut prev: Option<f64> = None;
    for row in rows {
        let cols: Vec<&str> = row.split_whitespace().collect();
        let achieved: f64 = cols[1].parse().unwrap();
        let lower: f64 = cols[2].parse().unwrap();
        let upper: f64 = cols[3].parse().unwrap();
        assert!(0.8 * lower <= achieved && achieved <= upper);
        if let Some(p) = prev {
            // At rho = 0.01 each row grows by the stage factor 9 − 16rho.
            let growth = achieved / p;
            assert!((growth - 8.84).abs() < 0.1, "growth {growth}");
        }
        prev = Some(achieved);
    }
}

#[test]
fn sample_identity_emits_unit_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_identity(dir.path());
    let out = dir.path().join("samples.csv");
    let run = monorat(&[
        "sample",
        "--input",
        input.to_str().unwrap(),
        "--points",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,r,r_prime,envelope");
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        let value: f64 = cols[1].parse::<f64>().unwrap();
        let x: f64 = cols[0].parse().unwrap();
        assert!((value - x).abs() < 1e-12, "identity samples its argument");
        assert_eq!(cols[2], "1");
        let envelope: f64 = cols[3].parse().unwrap();
        let r_prime: f64 = cols[2].parse().unwrap();
        assert!(envelope >= r_prime);
    }
}

#[test]
fn sample_constructed_function_peaks_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f2.json");
    let run = monorat(&["construct", "--n", "2", "--out", f.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let out = dir.path().join("s.csv");
    let run = monorat(&[
        "sample",
        "--input",
        f.to_str().unwrap(),
        "--points",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    let csv = fs::read_to_string(&out).unwrap();
    let middle = csv.lines().nth(3).unwrap();
    let cols: Vec<&str> = middle.split(',').collect();
    assert_eq!(cols[0], "0");
    assert_eq!(cols[2], "8.84");
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let r_prime: f64 = cols[2].parse().unwrap();
        let envelope: f64 = cols[3].parse().unwrap();
        assert!(envelope >= r_prime, "envelope dominates the slope");
    }
}
