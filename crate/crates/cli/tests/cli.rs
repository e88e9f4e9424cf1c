use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn gad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/corpus")
        .join(name)
        .display()
        .to_string()
}

fn temp_gad(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("gad-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn schur_examples() {
    assert_eq!(
        stdout(&gad(&["schur", "dim", "--lambda", "2,1", "--rank", "3"])).trim(),
        "8"
    );
    assert_eq!(
        stdout(&gad(&["schur", "dim", "--lambda", "1,1,1", "--rank", "2"])).trim(),
        "0"
    );
    assert_eq!(
        stdout(&gad(&["schur", "lr", "--lambda", "1", "--mu", "1"])).trim(),
        "(2):1 (1,1):1"
    );
    assert_eq!(
        stdout(&gad(&[
            "schur",
            "construct",
            "--lambda",
            "2,1",
            "--rank",
            "3"
        ]))
        .trim(),
        "8"
    );
    assert_eq!(
        stdout(&gad(&[
            "schur", "quotient", "--lambda", "2,1", "--rank", "3"
        ]))
        .trim(),
        "8"
    );
}

#[test]
fn schur_bad_args_exit_2() {
    assert_eq!(
        gad(&["schur", "dim", "--lambda", "1,2", "--rank", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gad(&["schur", "dim", "--lambda", "2,1"]).status.code(),
        Some(2)
    );
}

#[test]
fn construction_cap_from_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_gad"))
        .args(["schur", "construct", "--lambda", "2,1", "--rank", "3"])
        .env("GAD_MAX_TENSOR_DIM", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bwb_examples() {
    let h1 = stdout(&gad(&["bwb", "--rank", "2", "--weight", "-1,1"]));
    assert!(h1.starts_with("H^1 = 1"), "{h1}");
    assert_eq!(
        stdout(&gad(&["bwb", "bott", "--n", "2", "--p", "1", "--k", "0"])).trim(),
        "H^1 = 1"
    );
    assert_eq!(
        stdout(&gad(&["bwb", "--rank", "2", "--weight", "-1,0"])).trim(),
        "all cohomology vanishes"
    );
    assert_eq!(
        gad(&["bwb", "--rank", "2", "--weight", "-1,a"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn envelope_fields() {
    let o = gad(&["schur", "dim", "--lambda", "2,1", "--rank", "3", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "schur dim");
    assert_eq!(v["results"], "8");
    assert_eq!(v["inputs"]["rank"], 3);
    assert!(v["version"].is_string());
    assert_eq!(v["rule_catalog"].as_str().unwrap().len(), 64);
}

#[test]
fn derive_minimal_ga1() {
    let o = gad(&["derive", &corpus("01_ga1.gad"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cert = &v["results"][0]["certificate"];
    assert_eq!(cert["rule"], "GA1");
    assert_eq!(cert["children"].as_array().unwrap().len(), 0);
}

#[test]
fn derive_unknown_exits_10() {
    let f = temp_gad(
        "nef.gad",
        "variety X { dim=2, smooth, projective }\nbundle E on X { rank=2, nef }\nquery positive(E)\n",
    );
    let o = gad(&["derive", &f, "--explain"]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).contains("Unknown"));
}

#[test]
fn derive_depth_bound_exits_11() {
    let o = gad(&[
        "derive",
        &corpus("02_ga_closure.gad"),
        "--query",
        "3",
        "--max-depth",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(11));
}

#[test]
fn derive_parse_error_exits_2() {
    let f = temp_gad("bad.gad", "variety X { dim=2, smooth }\nquery acyclic(G)\n");
    let o = gad(&["derive", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains(":2:15:"));
}

#[test]
fn derive_with_split_verification() {
    let f = temp_gad(
        "split.gad",
        "variety P { dim=1, smooth, projective }\nbundle E on P { rank=2, ample }\n\
         linebundle H on P { nef }\nquery vanishing_range(omega(P) * schur([2,1], E) * H)\n",
    );
    let o = gad(&["derive", &f, "--verify-split", "n=1;E=1,1;H=1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("claim [CORVAN]"), "{out}");
    assert!(out.contains("PASS"), "{out}");
    assert!(!out.contains("FAIL"), "{out}");
}

#[test]
fn derive_is_byte_deterministic() {
    let f = corpus("07_sscor_unif.gad");
    let a = gad(&["derive", &f, "--json", "--explain"]);
    let b = gad(&["derive", &f, "--json", "--explain"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn parse_round_trip() {
    let o = gad(&["parse", &corpus("03_ex1_ex2.gad")]);
    assert_eq!(o.status.code(), Some(0));
    let f = temp_gad("reprint.gad", &stdout(&o));
    assert_eq!(stdout(&gad(&["parse", &f])), stdout(&o));
    let j = gad(&["parse", &corpus("03_ex1_ex2.gad"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
    assert_eq!(v["results"]["kind"], "document");
}

#[test]
fn verify_is_seeded() {
    let a = gad(&["verify", "--seed", "3", "--count", "5", "--necessity", "1"]);
    let b = gad(&["verify", "--seed", "3", "--count", "5", "--necessity", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("0 mismatches"));
}
