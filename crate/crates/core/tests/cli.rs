use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ratiolim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratiolim"))
        .args(args)
        .env_remove("RATIOLIM_DIGITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn phis(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn coeffs_hand_values() {
    let o = ratiolim(&["coeffs", "--kernel", "cpoisson:q=[1];measure=full", "--n", "10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(phis(&stdout(&o)), (1..=10).map(f64::from).collect::<Vec<_>>());
    let o = ratiolim(&["coeffs", "--kernel", "binomial:m=1", "--n", "3"]);
    assert_eq!(phis(&stdout(&o)), vec![1.0, 3.0, 4.0]);
    let o = ratiolim(&["coeffs", "--kernel", "conjugate:geometric", "--n", "5"]);
    assert_eq!(phis(&stdout(&o)), vec![1.0; 5]);
    assert!(stdout(&o).starts_with("n,phi,route,digits\n1,1.0"));
    assert!(stdout(&o).ends_with(",closed,60\n"));
}

#[test]
fn exit_codes() {
    let o = ratiolim(&["coeffs", "--kernel", "binomial:m=1", "--n", "3", "--route", "closed"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not applicable"));
    assert_eq!(code(&ratiolim(&["coeffs", "--kernel", "poisson:x", "--n", "3"])), 1);
    assert_eq!(code(&ratiolim(&["coeffs", "--kernel", "binomial:m=1"])), 1);
    assert_eq!(code(&ratiolim(&["coeffs", "--frobnicate"])), 1);
    assert_eq!(code(&ratiolim(&["--help"])), 0);
    assert_eq!(code(&ratiolim(&["--version"])), 0);
    assert_eq!(code(&ratiolim(&[])), 1);
    assert_eq!(code(&ratiolim(&["asym", "--kernel", "conjugate:log"])), 2);
    assert_eq!(code(&ratiolim(&["coeffs", "--kernel", "binomial:m=1", "--n", "3", "--digits", "5"])), 1);
}

#[test]
fn digits_from_flag_config_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"kernel": "binomial:m=2", "n": 4, "digits": 25}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let o = ratiolim(&["coeffs", "--config", c]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with(",recurrence,25\n"));
    let o = ratiolim(&["coeffs", "--config", c, "--digits", "20", "--n", "2"]);
    assert!(stdout(&o).ends_with("2,2.5000000000000000000e0,recurrence,20\n"), "{}", stdout(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_ratiolim"))
        .args(["coeffs", "--kernel", "binomial:m=2", "--n", "1"])
        .env("RATIOLIM_DIGITS", "18")
        .output()
        .unwrap();
    assert!(stdout(&o).ends_with(",recurrence,18\n"));
    let o = Command::new(env!("CARGO_BIN_EXE_ratiolim"))
        .args(["coeffs", "--config", c])
        .env("RATIOLIM_DIGITS", "18")
        .output()
        .unwrap();
    assert!(stdout(&o).ends_with(",recurrence,25\n"));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"kernel": "binomial:m=2", "order": 4}"#).unwrap();
    let o = ratiolim(&["coeffs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("order"));
}

#[test]
fn output_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = ratiolim(&["coeffs", "--kernel", "binomial:m=3", "--n", "50", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1, "temporary files left behind: {names:?}");
}

#[test]
fn asym_two_root_quadratic() {
    let o = ratiolim(&["asym", "--kernel", "cpoisson:q=[1,1];measure=full"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let m = &v["model"];
    assert_eq!(m["leading"]["status"], "exact");
    // C = ((3/2)^(4/3) Gamma(5/3))^-1
    assert!((num(&m["leading"]["value"]) - 0.6451287877526713).abs() < 1e-14);
    let terms = m["terms"].as_array().unwrap();
    assert!((num(&terms[0]["power_re"]) - 2.0 / 3.0).abs() < 1e-15);
    assert!((num(&terms[1]["power_re"]) + 1.0 / 3.0).abs() < 1e-15);
    assert!((num(&terms[1]["constant_re"]) - 5.0 / 27.0).abs() < 1e-15);
    let o = ratiolim(&["asym", "--kernel", "cpoisson:q=[1,1];measure=full", "--terms", "1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["model"]["terms"].as_array().unwrap().len(), 1);
}

#[test]
fn asym_binomial_and_tail() {
    let o = ratiolim(&["asym", "--kernel", "binomial:m=2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = 4.0 / (3.0 * (2.0 - 3f64.ln()));
    assert!((num(&v["model"]["leading"]["value"]) - c).abs() < 1e-14);
    assert_eq!(v["model"]["terms"][1]["periodic"]["period"], 3);

    let o = ratiolim(&["asym", "--kernel", "cpoisson:q=[1];measure=tail:2", "--digits", "30"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let m = &v["model"];
    assert_eq!(m["leading"]["status"], "unknown");
    assert!((num(&m["terms"][0]["power_re"]) - 1.469874943242969).abs() < 1e-14);
    assert!((num(&m["terms"][1]["power_re"]) - 0.469874943242969).abs() < 1e-14);
    // C1 = (alpha+1)(alpha/2 - D) at a = 2
    assert!((num(&m["terms"][1]["constant_re"]) + 0.17354452965709504).abs() < 1e-12);
}

#[test]
fn asym_estimates_unknown_constants() {
    let o = ratiolim(&[
        "asym", "--kernel", "cpoisson:q=[1];measure=tail:2", "--digits", "30", "--estimate-n", "4000",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["model"]["leading"]["status"], "estimated");
    assert!((num(&v["model"]["leading"]["value"]) / 1.281889848285 - 1.0).abs() < 1e-5);
}

#[test]
fn roots_commands() {
    let o = ratiolim(&["roots", "--binomial-m", "3", "--count", "1", "--digits", "30"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("re,im,residual\n"));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!((rows[3][0] - 1.0698293988781813).abs() < 1e-14 && (rows[3][1] - 5.361490035297498).abs() < 1e-14);

    let o = ratiolim(&["roots", "--tail-a", "2", "--count", "1"]);
    let text = stdout(&o);
    assert!(text.contains("-2.46987494324296"));
    assert!(text.contains("4.38645551777719"));

    let o = ratiolim(&["roots", "--binomial-m", "1", "--count", "1"]);
    let last: Vec<f64> = stdout(&o).lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(last[0] > 1.0);

    assert_eq!(code(&ratiolim(&["roots", "--binomial-m", "1", "--tail-a", "2"])), 1);
    assert_eq!(code(&ratiolim(&["roots"])), 1);
    let o = ratiolim(&["roots", "--kernel", "binomial:m=4", "--count", "1"]);
    assert!(stdout(&o).contains("8.70774007425338"));
}

#[test]
fn validate_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = ratiolim(&[
        "validate", "--kernel", "cpoisson:q=[1,1];measure=full", "--n", "2000", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v = json_file(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["routes"].as_array().unwrap().len(), 4);

    let o = ratiolim(&["validate", "--kernel", "binomial:m=2", "--n", "900", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json_file(&out);
    let identity = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "sum_identity").unwrap();
    assert!(num(&identity["measured"]) < 1e-40);
}

#[test]
fn validate_flags_a_corrupted_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let report = dir.path().join("r.json");
    let t = table.to_str().unwrap();
    assert_eq!(code(&ratiolim(&["coeffs", "--kernel", "binomial:m=1", "--n", "120", "--out", t])), 0);
    let args = ["validate", "--kernel", "binomial:m=1", "--n", "120", "--table", t, "--out", report.to_str().unwrap()];
    assert_eq!(code(&ratiolim(&args)), 0);

    let text = fs::read_to_string(&table).unwrap();
    let bad: String = text
        .lines()
        .map(|l| if l.starts_with("77,") { l.replacen("77,", "77,1", 1) } else { l.to_string() })
        .map(|l| l + "\n")
        .collect();
    fs::write(&table, bad).unwrap();
    assert_eq!(code(&ratiolim(&args)), 3);
    let v = json_file(&report);
    assert_eq!(v["passed"], false);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"table_agreement"));
    assert!(failed.contains(&"table:sum_identity"));
}

#[test]
fn oscillations_identity_kernel_is_exact() {
    let o = ratiolim(&["oscillations", "--kernel", "cpoisson:q=[1];measure=full", "--n", "300"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().skip(1).all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 0.0));
}

#[test]
fn oscillations_tail_fit() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit.json");
    let o = ratiolim(&[
        "oscillations", "--kernel", "cpoisson:q=[1];measure=tail:2", "--n", "5000", "--digits", "30",
        "--fit-out", fit.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v = json_file(&fit);
    assert!((num(&v["fit"]["im_alpha"]) - 4.38645551777719).abs() < 1e-12);
    assert!(num(&v["fit"]["rms_error"]) < num(&v["max_abs_residual"]));
}

#[test]
fn oscillations_binomial_long_phase_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit.json");
    let o = ratiolim(&[
        "oscillations", "--kernel", "binomial:m=4", "--n", "20000", "--digits", "30", "--fit-out",
        fit.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v = json_file(&fit);
    assert!(v["residual"].as_str().unwrap().contains("n^8.7077"));
    assert!(num(&v["max_abs_residual"]) < 10.0);
    let o = ratiolim(&["oscillations", "--kernel", "binomial:m=2", "--n", "2000", "--mode", "sideways"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn julia_images() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("j.pgm");
    let o = ratiolim(&["julia", "--width", "120", "--height", "96", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let bytes = fs::read(&out).unwrap();
    let header = b"P5\n120 96\n255\n";
    assert!(bytes.starts_with(header));
    let pixels = &bytes[header.len()..];
    assert_eq!(pixels.len(), 120 * 96);
    assert!(pixels.contains(&255));
    assert!(pixels.iter().any(|&p| p < 255));

    let o = ratiolim(&[
        "julia", "--width", "1", "--height", "1", "--re-min", "-0.5", "--re-max", "0.5", "--im-min", "-0.5",
        "--im-max", "0.5",
    ]);
    assert_eq!(o.stdout, b"P5\n1 1\n255\n\xff");
}

#[test]
fn repeated_runs_are_identical() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["coeffs", "--kernel", "cpoisson:q=[1,0,1];measure=full", "--n", "40"],
        vec!["asym", "--kernel", "cpoisson:q=[1];measure=dirac:1", "--estimate-n", "800", "--digits", "30"],
        vec!["roots", "--tail-a", "1", "--count", "2"],
        vec!["validate", "--kernel", "cpoisson:q=[1,1];measure=unit", "--n", "40"],
        vec!["oscillations", "--kernel", "binomial:m=1", "--n", "900"],
        vec!["julia", "--width", "64", "--height", "48"],
    ];
    for args in runs {
        let a = ratiolim(&args);
        let b = ratiolim(&args);
        assert_eq!(code(&a), 0, "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
