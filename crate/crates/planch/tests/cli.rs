use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use planch_core::arith::{fmt_q, qi};
use planch_core::forms_orbits::build_odd_so;
use planch_core::linalg::QMat;
use serde_json::Value;

fn planch(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_planch"));
    c.args(args);
    match threads {
        Some(t) => c.env("PLANCH_THREADS", t),
        None => c.env_remove("PLANCH_THREADS"),
    };
    c.output().expect("runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn gamma_trivial_character() {
    let dir = tempfile::tempdir().unwrap();
    let rep = write(dir.path(), "r.json", r#"{"atoms":[{"angle":"0","sp":1}]}"#);
    let out = planch(&["gamma", "--rep", rep.to_str().unwrap(), "--q", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["gamma_star_exact"], "3/2");
    assert_eq!(v["ord_at_zero"], 1);
    assert_eq!(v["field"]["q"], 3);
    assert!(v["formula"].is_string() && v["version"].is_string());
}

#[test]
fn steinberg_exterior_square_is_one_block() {
    let dir = tempfile::tempdir().unwrap();
    let rep = write(dir.path(), "r.json", r#""0*Sp(2)""#);
    let v = json(&planch(&["gamma", "--rep", rep.to_str().unwrap(), "--r", "wedge2"], None));
    assert_eq!(v["applied"], "0*Sp(1)");
}

#[test]
fn malformed_input_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let rep = write(dir.path(), "r.json", "{\n  \"atoms\": [,]\n}");
    let out = planch(&["gamma", "--rep", rep.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r.json:2:"));
    let out = planch(&["gamma", "--rep", "/nonexistent/file.json"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_d1_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let pt = write(dir.path(), "p.json", r#"{"blocks":[{"k":1,"angle":"0"}]}"#);
    let v = json(&planch(&["density", "--point", pt.to_str().unwrap(), "--q", "3"], None));
    assert_eq!(num(&v["mu"]["re"]), 1.5);
    assert!((num(&v["mu_chi"]["re"]) - 1.0).abs() < 1e-15);
    assert_eq!(v["central_quotient_check"], true);
    let st = write(dir.path(), "s.json", r#"{"blocks":[{"k":2,"angle":"0"}]}"#);
    let v = json(&planch(&["density", "--point", st.to_str().unwrap()], None));
    assert!(num(&v["mu"]["re"]) > 0.0);
    let out = planch(&["density", "--point", pt.to_str().unwrap(), "--chi", "1/2"], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn component_group_of_two_characters() {
    let dir = tempfile::tempdir().unwrap();
    let rep = write(dir.path(), "r.json", r#"{"atoms":[{"angle":"0","sp":1},{"angle":"1/2","sp":1}]}"#);
    let v = json(&planch(&["component-group", "--rep", rep.to_str().unwrap()], None));
    assert_eq!((v["s_plus"].as_i64(), v["s"].as_i64(), v["ratio"].as_i64()), (Some(4), Some(2), Some(1)));
}

#[test]
fn fd_rhs_steinberg() {
    let dir = tempfile::tempdir().unwrap();
    let rep = write(dir.path(), "r.json", r#""0*Sp(3)""#);
    let out = planch(&["fd-rhs", "--rep", rep.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["s"], 1);
}

#[test]
fn classify_worked_example_and_charpoly() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "B.json", r#"[["-1","1"],["-1","0"]]"#);
    let v = json(&planch(&["classify-form", "--matrix", m.to_str().unwrap(), "--p", "3"], None));
    assert_eq!(v["orbit"], "gamma_t(1)");
    let v = json(&planch(&["charpoly", "--matrix", m.to_str().unwrap()], None));
    assert_eq!(v["char_poly_twisted"], "T^2 + 2T + 1");
    let alt = write(dir.path(), "A.json", r#"[["0","1"],["-1","0"]]"#);
    let v = json(&planch(&["classify-form", "--matrix", alt.to_str().unwrap(), "--p", "3"], None));
    assert_eq!(v["orbit"], "gamma_0");
    let out = planch(&["classify-form", "--matrix", m.to_str().unwrap(), "--p", "4"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn so_embed_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let emb = build_odd_so(2);
    let mut a = QMat::zeros(2, 2);
    a[(0, 1)] = qi(3);
    a[(1, 0)] = qi(-3);
    let u = emb.nbar_element(&[qi(1), qi(2)], &a);
    let rows: Vec<Vec<String>> = u.to_rows().iter().map(|r| r.iter().map(fmt_q).collect()).collect();
    let path = write(dir.path(), "U.json", &serde_json::to_string(&rows).unwrap());
    let out = planch(&["so-embed", "--d", "2", "--ubar", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["round_trip"], true);
    assert_eq!(v["symmetric_part_is_minus_ell_squared"], true);
    let id = write(dir.path(), "I.json", r#"[["1","0"],["0","1"]]"#);
    assert_eq!(planch(&["so-embed", "--d", "2", "--ubar", id.to_str().unwrap()], None).status.code(), Some(3));
}

#[test]
fn limit_verify_d1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.json", r#"{"orthogonal":[{"angle":"1/2","sp":1,"mult":1}]}"#);
    let phi = write(dir.path(), "phi.json", r#"{"cos_sum":{"c0":1.0,"c1":0.5}}"#);
    let report = dir.path().join("out.json");
    let out = planch(
        &["limit-verify", "--triple", t.to_str().unwrap(), "--phi", phi.to_str().unwrap(), "--q", "3", "--psi-level", "0",
          "--s-seq", "0.1,8", "--tol", "1e-3", "--grid", "4096", "--report", report.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(num(&v["abs_discrepancy"]) < 1e-10);
}

#[test]
fn limit_verify_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.json", r#"{"orthogonal":[{"angle":"0","sp":1,"mult":1},{"angle":"1/2","sp":1,"mult":1}]}"#);
    let phi = write(dir.path(), "phi.json", r#"{"constant":1.0}"#);
    let args = ["limit-verify", "--triple", t.to_str().unwrap(), "--phi", phi.to_str().unwrap(), "--s-seq", "0.1,4"];
    let a = planch(&args, Some("1"));
    let b = planch(&args, Some("4"));
    assert!(a.status.code() == Some(0) || a.status.code() == Some(1));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn limit_verify_budget_and_bad_phi() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.json", r#"{"pairs":[{"angle":"1/5","sp":1,"m":1,"n":1}]}"#);
    let phi = write(dir.path(), "phi.json", r#"{"constant":1.0}"#);
    let out = planch(&["limit-verify", "--triple", t.to_str().unwrap(), "--phi", phi.to_str().unwrap(), "--max-nodes", "10"], None);
    assert_eq!(out.status.code(), Some(4));
    let bad = write(dir.path(), "bad.json", r#"{"trig_poly":{"terms":[{"coef":1.0,"freq":[1,0]}]}}"#);
    let out = planch(&["limit-verify", "--triple", t.to_str().unwrap(), "--phi", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
    let out = planch(&["limit-verify", "--triple", t.to_str().unwrap(), "--phi", phi.to_str().unwrap(), "--tol", "0"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_and_table_formats() {
    let dir = tempfile::tempdir().unwrap();
    let rep = write(dir.path(), "r.json", r#"{"atoms":[{"angle":"0","sp":1}]}"#);
    let out = planch(&["gamma", "--rep", rep.to_str().unwrap(), "--format", "csv"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("gamma_star.re,1.50000000000e0"));
    let out = planch(&["gamma", "--rep", rep.to_str().unwrap(), "--format", "table"], None);
    assert!(String::from_utf8(out.stdout).unwrap().contains("gamma_star_exact"));
}
