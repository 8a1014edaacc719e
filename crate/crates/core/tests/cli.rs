use std::process::Command;
use tamelab::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["tamelab"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn exact_values_and_header() {
    let (code, out, _) = call(&["exact", "--kind", "R", "--n", "0,2,3", "--source", "uniform-binary"]);
    assert_eq!(code, 0);
    assert!(out.contains("# schema: tamelab.exact/1"));
    assert!(out.contains("# tool: tamelab"));
    assert!(out.contains("# precision_bits:"));
    assert!(out.contains("# budgets:"));
    assert!(out.contains("kind,n,method,value,abs_error,runtime_ms"));
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[1][3].parse::<f64>().unwrap(), 2.0);
    assert!((r[2][3].parse::<f64>().unwrap() - 10.0 / 3.0).abs() < 1e-14);
    assert!(r.iter().all(|row| row[5] == "-"));
}

#[test]
fn exact_methods_agree() {
    let (code, out, _) = call(&[
        "exact",
        "--kind",
        "B",
        "--n",
        "12",
        "--method",
        "alternating,direct,rice",
        "--source",
        "biased-binary",
    ]);
    assert_eq!(code, 0);
    let v: Vec<f64> = rows(&out).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(v.len(), 3);
    for x in &v[1..] {
        assert!((x - v[0]).abs() < 1e-9 * v[0]);
    }
}

#[test]
fn precision_override_is_recorded() {
    let (code, out, _) = call(&[
        "exact",
        "--kind",
        "C",
        "--n",
        "40",
        "--precision-bits",
        "200",
        "--source",
        "dyadic",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("# precision_bits: 200"));
}

#[test]
fn rice_on_dynamical_source_is_a_config_error() {
    let (code, out, err) = call(&["exact", "--method", "rice", "--n", "2", "--source", "gauss"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("rice requires closed-form Λ"));
    assert!(err.contains("exact["));
}

#[test]
fn unknown_source_and_bad_flags() {
    let (code, _, err) = call(&["exact", "--n", "2", "--source", "/nonexistent/source.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("stage source"));
    let (code, _, _) = call(&["exact", "--n", "2", "--kind", "Q", "--source", "dyadic"]);
    assert_eq!(code, 2);
    let (code, _, _) = call(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn json_source_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("src.json");
    std::fs::write(&path, r#"{"type":"memoryless","probs":["1/2","1/2"]}"#).unwrap();
    let (code, out, _) = call(&["exact", "--kind", "C", "--n", "2", "--source", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(rows(&out)[0][3].parse::<f64>().unwrap(), 4.0);
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--source",
        "biased-binary",
        "--n",
        "1,8",
        "--trials",
        "500",
        "--seed",
        "11",
    ];
    let (c1, a, _) = call(&args);
    let (c2, b, _) = call(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert!(a.contains("kind,n,trials,mean,stddev,stderr,seed"));
    for r in rows(&a).iter().filter(|r| r[1] == "1") {
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn simulate_mean_is_close() {
    let (code, out, _) = call(&[
        "simulate",
        "--source",
        "uniform-binary",
        "--n",
        "2",
        "--trials",
        "20000",
    ]);
    assert_eq!(code, 0);
    let r = rows(&out);
    let mean: f64 = r[0][3].parse().unwrap();
    let se: f64 = r[0][5].parse().unwrap();
    assert!((mean - 2.0).abs() < 4.0 * se);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let (code, out, _) = call(&[
        "exact",
        "--n",
        "2",
        "--source",
        "dyadic",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("R,2,alternating"));
}

#[test]
fn classify_reports() {
    let (code, out, _) = call(&["classify", "--source", "uniform-binary"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "periodic");
    assert_eq!(v["regime"], "periodic");
    assert!(!v["evidence"].as_array().unwrap().is_empty());
    let (_, again, _) = call(&["classify", "--source", "uniform-binary"]);
    assert_eq!(out, again);
}

#[test]
fn asymptote_residuals() {
    let (code, out, _) = call(&[
        "asymptote",
        "--source",
        "uniform-binary",
        "--kind",
        "R",
        "--n",
        "16,32,64,128,256,512,1024",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("# regime: periodic"));
    for r in rows(&out) {
        let n: f64 = r[1].parse().unwrap();
        let res: f64 = r[4].parse().unwrap();
        // constant term -1 plus a fluctuation of relative size below 1e-5
        assert!((res + 1.0).abs() < 1e-5 * n + 0.5, "{r:?}");
    }
}

#[test]
fn spectrum_and_probe() {
    let (code, out, _) = call(&["spectrum", "--source", "gauss", "--s", "1,2", "--order", "16"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert!((r[0][3].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);

    let (code, out, _) = call(&["probe", "--source", "binary-shift", "--t", "9.064720283654388,3"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r[0][3], "true");
    assert_eq!(r[1][3], "false");

    let (code, _, err) = call(&["probe", "--source", "dyadic"]);
    assert_eq!(code, 2);
    assert!(err.contains("dynamical"));
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_tamelab");
    let ok = Command::new(exe)
        .args(["exact", "--kind", "R", "--n", "2", "--source", "uniform-binary"])
        .env("TAMELAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(exe)
        .args(["exact", "--n", "2", "--source", "uniform-binary"])
        .env("TAMELAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("stage threads"));
    let help = Command::new(exe).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn numeric_failure_exits_three() {
    let (code, out, err) = call(&[
        "exact",
        "--kind",
        "R",
        "--n",
        "200",
        "--precision-bits",
        "40",
        "--source",
        "biased-binary",
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(out.is_empty());
    assert!(err.contains("truncation budget"));
}
