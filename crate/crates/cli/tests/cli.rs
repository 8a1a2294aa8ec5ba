use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use depshap::attribution::{adl, AttributionRequest};
use depshap::dependence::Measure;
use depshap::dgp;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depshap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, args: &[&str]) -> PathBuf {
    let mut full = vec!["simulate", "--output-dir", path(dir)];
    full.extend_from_slice(args);
    let out = run(&full);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    PathBuf::from(String::from_utf8(out.stdout).unwrap().trim())
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn values(report: &Value) -> Vec<f64> {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["value"].as_f64().unwrap())
        .collect()
}

fn write_csv(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn help_lists_defaults() {
    let out = run(&["attribute", "--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "[default: y]",
        "[default: dc]",
        "[default: exact]",
        "[default: 1000]",
        "[default: 0]",
    ] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn malformed_config_exits_2_with_one_line() {
    let out = run(&["attribute", "--measure", "pearson", "--input", "x.csv"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error kind=config message="), "{err}");

    assert_eq!(code(&run(&["reproduce", "--scenario", "fig9"])), 2);
    assert_eq!(
        code(&run(&["simulate", "--dgp", "xor", "--coeffs", "1,2"])),
        2
    );
}

#[test]
fn bad_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = run(&[
        "attribute",
        "--input",
        path(&missing),
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error kind=data"));

    let text = write_csv(dir.path(), "bad.csv", "y,x1\n1,2\n2,abc\n3,1\n");
    let out = run(&[
        "attribute",
        "--input",
        path(&text),
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 3);

    let no_label = write_csv(dir.path(), "nolabel.csv", "a,x1\n1,2\n2,3\n3,1\n");
    let out = run(&[
        "attribute",
        "--input",
        path(&no_label),
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 3);
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn singular_design_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(
        dir.path(),
        "dup.csv",
        "y,x1,x2\n1,1,1\n3,2,2\n2,3,3\n5,4,4\n4,5,5\n",
    );
    let out = run(&[
        "attribute",
        "--input",
        path(&input),
        "--measure",
        "r2",
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error kind=numeric"));
}

#[test]
fn refuses_to_overwrite_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "report.json", "y,x1\n1,2\n2,3\n3,1\n");
    let out = run(&[
        "attribute",
        "--input",
        path(&input),
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(fs::read_to_string(&input).unwrap(), "y,x1\n1,2\n2,3\n3,1\n");
}

#[test]
fn xor_distance_correlation_shares() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path(), &["--dgp", "xor", "--n", "10000", "--seed", "1"]);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "attribute",
        "--input",
        path(&input),
        "--output-dir",
        path(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let vals = values(&report(&out_dir));
    assert_eq!(vals.len(), 2);
    for v in vals {
        assert!((v - 0.265).abs() <= 0.02, "{v}");
    }
}

#[test]
fn residuals_of_perfect_predictions_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(
        dir.path(),
        "perfect.csv",
        "y,p,x1,x2\n1,1,0.5,2\n2,2,0.1,1\n3,3,0.7,0\n4,4,0.2,5\n5,5,0.9,3\n",
    );
    for measure in ["dc", "hsic", "r2", "aidc"] {
        let out_dir = dir.path().join(measure);
        let out = run(&[
            "attribute",
            "--input",
            path(&input),
            "--pred-col",
            "p",
            "--kind",
            "residuals",
            "--measure",
            measure,
            "--output-dir",
            path(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{measure}: {}", stderr(&out));
        assert_eq!(values(&report(&out_dir)), vec![0.0, 0.0], "{measure}");
    }
}

#[test]
fn residuals_need_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "d.csv", "y,x1\n1,2\n2,3\n3,1\n");
    let out = run(&[
        "attribute",
        "--input",
        path(&input),
        "--kind",
        "residuals",
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn feature_scope_limits_records() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path(), &["--dgp", "drift", "--n", "100", "--seed", "2"]);
    let (header, _) = read_csv(&input);
    assert_eq!(header.len(), 51);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "attribute",
        "--input",
        path(&input),
        "--features",
        "x1,x2,x3,x4",
        "--output-dir",
        path(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = report(&out_dir);
    let names: Vec<&str> = rep["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["x1", "x2", "x3", "x4"]);
    let (csv_header, rows) = read_csv_text(&out_dir.join("attributions.csv"));
    assert_eq!(csv_header, ["name", "value", "lower", "upper"]);
    assert_eq!(rows, 4);
}

fn read_csv_text(p: &Path) -> (Vec<String>, usize) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    (header, r.records().count())
}

#[test]
fn simulate_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let xor = simulate(dir.path(), &["--dgp", "xor", "--n", "4", "--seed", "9"]);
    let (header, rows) = read_csv(&xor);
    assert_eq!(header, ["y", "x1", "x2"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[0] == 0.0 || r[0] == 1.0));

    let quad = simulate(
        dir.path(),
        &["--dgp", "quadratic", "--n", "50", "--coeffs", "0,2,4,6,8"],
    );
    let (header, rows) = read_csv(&quad);
    assert_eq!(header, ["y", "x1", "x2", "x3", "x4", "x5"]);
    assert!(rows
        .iter()
        .all(|r| r[1..].iter().all(|v| (-1.0..=1.0).contains(v))));

    let inter = simulate(dir.path(), &["--dgp", "interaction", "--n", "10"]);
    assert_eq!(read_csv(&inter).0, ["y", "x1", "x2", "x3", "x4", "x5"]);

    let narrow = simulate(dir.path(), &["--dgp", "drift", "--n", "10", "--narrow"]);
    assert_eq!(read_csv(&narrow).0, ["y", "x1", "x2", "x3", "x4"]);
}

#[test]
fn drift_steps_share_features() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(
        dir.path(),
        &["--dgp", "drift", "--n", "200", "--seed", "5", "--t", "0"],
    );
    let b = simulate(
        dir.path(),
        &["--dgp", "drift", "--n", "200", "--seed", "5", "--t", "10"],
    );
    let (_, ra) = read_csv(&a);
    let (_, rb) = read_csv(&b);
    assert!(ra.iter().zip(&rb).all(|(p, q)| p[1..] == q[1..]));
    assert!(ra.iter().zip(&rb).any(|(p, q)| p[0] != q[0]));
}

#[test]
fn csv_round_trip_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(
        dir.path(),
        &["--dgp", "quadratic", "--n", "300", "--seed", "3"],
    );
    let sample = dgp::gen_quadratic(300, &[0.0, 2.0, 4.0, 6.0, 8.0], 3).unwrap();
    for measure in [Measure::Dc, Measure::Aidc, Measure::Hsic, Measure::R2] {
        let out_dir = dir.path().join(measure.name());
        let out = run(&[
            "attribute",
            "--input",
            path(&input),
            "--measure",
            measure.name(),
            "--output-dir",
            path(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let expected =
            adl(&AttributionRequest::new(sample.x.clone(), measure).with_labels(sample.y.clone()))
                .unwrap()
                .values;
        assert_eq!(values(&report(&out_dir)), expected, "{measure}");
    }
}

#[test]
fn reruns_are_identical_and_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(
        dir.path(),
        &["--dgp", "interaction", "--n", "120", "--seed", "4"],
    );
    let mut reports = Vec::new();
    let mut tables = Vec::new();
    for run_id in 0..2 {
        let out_dir = dir.path().join(format!("run{run_id}"));
        let out = run(&[
            "attribute",
            "--input",
            path(&input),
            "--method",
            "mc",
            "--permutations",
            "40",
            "--seed",
            "7",
            "--bootstrap-resamples",
            "20",
            "--resample-size",
            "80",
            "--normalize",
            "--output-dir",
            path(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let text = fs::read_to_string(out_dir.join("report.json")).unwrap();
        let mut value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&value).unwrap(), text);
        assert_eq!(value["schema_version"], 1);
        value.as_object_mut().unwrap().remove("generated_at");
        reports.push(value);
        tables.push(fs::read(out_dir.join("attributions.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(tables[0], tables[1]);
    let vals = values(&reports[0]);
    assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for r in reports[0]["records"].as_array().unwrap() {
        assert!(r["lower"].as_f64().unwrap() <= r["upper"].as_f64().unwrap());
    }
}

#[test]
fn block_method_and_delta_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(
        dir.path(),
        "d.csv",
        "y,p,a,b,c\n1,1.2,0.3,1,4\n2,1.8,0.9,0,3\n3,3.1,0.1,1,1\n4,4.4,0.5,0,5\n5,4.9,0.8,1,2\n6,6.2,0.6,0,6\n",
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "attribute",
        "--input",
        path(&input),
        "--pred-col",
        "p",
        "--method",
        "block",
        "--blocks",
        "a,b;c",
        "--delta",
        "0.05",
        "--output-dir",
        path(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = report(&out_dir);
    assert_eq!(rep["metadata"]["method"]["kind"], "block");
    let cmp = &rep["metadata"]["comparison"];
    assert_eq!(cmp["differences"].as_array().unwrap().len(), 3);

    let out = run(&[
        "attribute",
        "--input",
        path(&input),
        "--pred-col",
        "p",
        "--method",
        "block",
        "--blocks",
        "a,zz",
        "--output-dir",
        path(&out_dir),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reproduce_writes_report_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "reproduce",
        "--scenario",
        "table1_xor",
        "--seed",
        "1",
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("table1_xor.json")).unwrap())
            .unwrap();
    assert_eq!(rep["scenario"], "table1_xor");
    assert_eq!(rep["passed"], true);
    assert!(!rep["checks"].as_array().unwrap().is_empty());
    let (header, rows) = read_csv_text(&dir.path().join("table1_xor_plot.csv"));
    assert_eq!(
        header,
        ["series", "feature", "t", "value", "lower", "upper"]
    );
    assert!(rows > 0);
}
