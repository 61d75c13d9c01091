use std::process::{Command, Output};

use a2planar::algebra::WebSum;
use a2planar::rewrite::Normalizer;
use a2planar::web::compose;
use a2planar::{LaurentScalar, Web};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_a2planar")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn gram_rank_at_a_root() {
    let o = run(&["gram", "--sigma=-+-+-+", "--n", "5", "--rank"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "5");
}

#[test]
fn dims_counts_basis() {
    let o = run(&["dims", "--sigma=------"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "5");
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(run(&["gram", "--sigma=-x", "--n", "5"]).status.code(), Some(2));
    assert_eq!(run(&["normalize", "--in", "/nonexistent/web.json"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["relcheck", "--suite", "bogus"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_a2planar"))
        .args(["dims", "--sigma=--"])
        .env("A2P_PRECISION", "128")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn passing_suites_exit_zero() {
    let o = run(&["relcheck", "--suite", "hecke", "--m", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    let o = run(&["pathalg", "relcheck", "--suite", "hecke", "--m", "4", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failed_check_exits_one() {
    // a cell system that is off by a scalar fails the frame equations
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("a5.json");
    let cells = dir.path().join("cells.json");
    assert_eq!(run(&["graph", "build-a", "--n", "5", "--out", graph.to_str().unwrap()]).status.code(), Some(0));
    let o = run(&["cells", "solve", "--graph", graph.to_str().unwrap(), "--out", cells.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&cells).unwrap()).unwrap();
    let list = if v.get("cells").is_some() { &mut v["cells"] } else { &mut v };
    for c in list.as_array_mut().unwrap() {
        c["re"] = (c["re"].as_f64().unwrap() * 1.5).into();
        c["im"] = (c["im"].as_f64().unwrap() * 1.5).into();
    }
    std::fs::write(&cells, v.to_string()).unwrap();
    let o = run(&["connection", "check", "--n", "5", "--cells", cells.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn normalize_bubble_lemma() {
    // W_1 W_2 E in V_3 reduces to [2]^2 E
    let b1 = [Web::w_web(3, 2).unwrap(), Web::f_web(3, 1).unwrap()]
        .iter()
        .fold(Web::w_web(3, 1).unwrap(), |acc, w| compose(&acc, w).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("b1.json");
    let out = dir.path().join("nf.json");
    std::fs::write(&input, b1.to_json().to_string()).unwrap();
    let o = run(&["normalize", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let got = WebSum::from_json(got.get("result").unwrap_or(&got)).unwrap();
    let e = WebSum::from_web(Web::f_web(3, 1).unwrap());
    let want = Normalizer::new().normalize(&e.scale(&LaurentScalar::delta().pow(2))).unwrap();
    assert_eq!(got.key_map().unwrap(), want.key_map().unwrap());
}

#[test]
fn zmap_zigzag_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let word = dir.path().join("word.json");
    std::fs::write(&word, r#"{"top":"-","strips":["CAP(2,+)","CUP(1)"]}"#).unwrap();
    let o = run(&["zmap", "--n", "5", "--strips", word.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let terms = v["matrix"]["terms"].as_array().expect("terms");
    assert_eq!(terms.len(), 1);
    for t in terms {
        assert_eq!(t["p1"], t["p2"]);
        assert!((t["re"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!(t["im"].as_f64().unwrap().abs() < 1e-10);
    }
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"top":"-","strips":["CUP(3)"]}"#).unwrap();
    assert_eq!(run(&["zmap", "--n", "5", "--strips", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn path_dims_match_enumeration() {
    let o = run(&["pathalg", "dims", "--i", "2", "--j", "1", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "5");
}
