#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use gapos::dsl::{parse, validate, ParseErrorKind};
use gapos::engine::{run_queries, Options};

pub fn dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(name)
}

/// `.gad` files of a fixture directory, sorted by name.
pub fn gad_files(name: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir(name))
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "gad"))
        .collect();
    v.sort();
    v
}

/// Query results of a corpus file as pretty JSON, the golden format.
pub fn results_json(src: &str) -> String {
    let doc = parse(src).expect("corpus parses");
    let val = validate(&doc);
    assert!(val.is_ok(), "{:?}", val.errors);
    let res: Vec<_> = run_queries(&doc, &val, Options::default())
        .iter()
        .map(|r| r.to_json())
        .collect();
    serde_json::to_string_pretty(&res).unwrap() + "\n"
}

pub fn golden_path(gad: &Path) -> PathBuf {
    gad.with_extension("json")
}

/// Compares against the checked-in golden; `UPDATE_GOLDENS=1` rewrites it.
pub fn check_golden(gad: &Path) -> Result<(), String> {
    let src = fs::read_to_string(gad).unwrap();
    let got = results_json(&src);
    let path = golden_path(gad);
    if std::env::var_os("UPDATE_GOLDENS").is_some() {
        fs::write(&path, &got).unwrap();
        return Ok(());
    }
    let want = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if got == want {
        Ok(())
    } else {
        Err(format!("{} differs from its golden", gad.display()))
    }
}

/// The `# expect L:C kind` header of a malformed fixture.
pub fn expected_error(src: &str) -> (usize, usize, String) {
    let head = src.lines().next().unwrap();
    let rest = head.strip_prefix("# expect ").expect("fixture header");
    let (pos, kind) = rest.split_once(' ').unwrap();
    let (l, c) = pos.split_once(':').unwrap();
    (l.parse().unwrap(), c.parse().unwrap(), kind.to_string())
}

pub fn kind_name(k: &ParseErrorKind) -> &'static str {
    match k {
        ParseErrorKind::Unexpected { .. } => "unexpected",
        ParseErrorKind::Unresolved(_) => "unresolved",
        ParseErrorKind::Duplicate(_) => "duplicate",
        ParseErrorKind::BadNumber(_) => "bad_number",
        ParseErrorKind::Invalid(_) => "invalid",
    }
}

/// Checks one malformed fixture.
pub fn check_malformed(path: &Path) -> Result<(), String> {
    let src = fs::read_to_string(path).unwrap();
    let (line, col, kind) = expected_error(&src);
    match parse(&src) {
        Ok(_) => Err(format!("{} parsed", path.display())),
        Err(e) if e.line == line && e.col == col && kind_name(&e.kind) == kind => Ok(()),
        Err(e) => Err(format!(
            "{}: expected {line}:{col} {kind}, got {e}",
            path.display()
        )),
    }
}
