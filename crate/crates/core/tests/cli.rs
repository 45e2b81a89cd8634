use std::path::Path;
use std::process::{Command, Output};

fn phvfe(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phvfe"))
        .args(args)
        .env("PHVFE_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_gl1_line_writes_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let out = dir.path().join("r.json");
    let o = phvfe(
        &["verify", "--instance", "gl1_line", "--q", "5", "--table", table.to_str().unwrap(), "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&table).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let r = json(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["pass"], true);
    assert_eq!(r["table"]["rows"].as_array().unwrap().len(), 4);
    // floats are strings
    assert!(r["table"]["rows"][1]["abs_c"].is_string());
    assert_eq!(r["table"]["rows"][1]["chi"], serde_json::json!({"q": 5, "k": 1}));
    // the Gauss table was cached
    assert!(std::fs::read_dir(dir.path()).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with("gauss_p5")));
}

#[test]
fn fit_matrix_det_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let o = phvfe(&["fit", "--instance", "matrix_det_2", "--q", "5", "--m-max", "2", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["fit"]["m"], 0);
    assert_eq!(r["fit"]["lambdas"].as_array().unwrap().len(), 2);
    assert!(r["fit"]["mus"].as_array().unwrap().is_empty());
}

#[test]
fn identities_and_catalog_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = phvfe(&["identities", "--q", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict: pass"));
    let o = phvfe(&["identities", "--p", "3", "--e", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = phvfe(&["catalog"], dir.path());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("sym_det_2") && text.contains("gl1_square"));
}

#[test]
fn scan_cross_validate() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["scan", "--instance", "sym_det_2", "--q", "7"][..],
        &["cross", "--instance", "gl1_square", "--rho", "sign", "--q", "5", "--q2", "25"],
        &["validate", "--instance", "quadratic_2", "--q", "7"],
        &["verify", "--instance", "matrix_det_2", "--q", "3", "--naive-dft", "--threads", "2"],
    ] {
        let o = phvfe(args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn reports_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.json"));
        let table = dir.path().join(format!("t{i}.csv"));
        let o = phvfe(
            &["scan", "--instance", "quadratic_2", "--q", "9", "--seed", "4", "--out", out.to_str().unwrap(), "--table", table.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0));
        outputs.push((std::fs::read(&out).unwrap(), std::fs::read(&table).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("line.txt");
    std::fs::write(&cfg, "name: scaled_line\nn: 1\nf: 3*x1\nf_dual: solve\ngroup: scalar\n").unwrap();
    let o = phvfe(&["scan", "--config", cfg.to_str().unwrap(), "--q", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&cfg, "name: bad\nn: 1\nf: x1\nf_dual: x1\nf_dual_scale: 3\n").unwrap();
    let o = phvfe(&["verify", "--config", cfg.to_str().unwrap(), "--q", "7"], dir.path());
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("witness"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| phvfe(args, dir.path()).status.code();
    assert_eq!(code(&["verify", "--q", "5"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["verify", "--instance", "cubic", "--q", "5"]), Some(3));
    assert_eq!(code(&["verify", "--instance", "gl1_line", "--q", "5", "--rho", "spin"]), Some(3));
    assert_eq!(code(&["verify", "--instance", "matrix_det_3", "--q", "31"]), Some(4));
    assert_eq!(code(&["verify", "--instance", "sym_det_2", "--q", "8"]), Some(5));
    assert_eq!(code(&["verify", "--instance", "gl1_line", "--q", "6"]), Some(6));
    assert_eq!(code(&["fit", "--instance", "gl1_line", "--q", "5", "--fit-tol", "1e-300"]), Some(1));
    let help = phvfe(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("PHVFE_CACHE_DIR"));
}
