mod common;

use std::fs;

use common::{check_golden, check_malformed, gad_files};
use gapos::dsl::{parse, pretty_print, validate};
use gapos::engine::{Options, Session};

#[test]
fn goldens_match() {
    let files = gad_files("corpus");
    assert!(files.len() >= 10);
    for f in files {
        check_golden(&f).unwrap();
    }
}

#[test]
fn certificates_are_deterministic() {
    for f in gad_files("corpus") {
        let src = fs::read_to_string(&f).unwrap();
        assert_eq!(common::results_json(&src), common::results_json(&src));
    }
}

#[test]
fn pretty_print_round_trips() {
    for f in gad_files("corpus") {
        let doc = parse(&fs::read_to_string(&f).unwrap()).unwrap();
        let once = pretty_print(&doc);
        let again = parse(&once).unwrap_or_else(|e| panic!("{}: {e}\n{once}", f.display()));
        assert_eq!(pretty_print(&again), once, "{}", f.display());
    }
}

#[test]
fn malformed_fixtures_report_position() {
    let files = gad_files("malformed");
    assert!(files.len() >= 8);
    for f in files {
        check_malformed(&f).unwrap();
    }
}

#[test]
fn saturation_reaches_a_fixed_point() {
    for f in gad_files("corpus") {
        let doc = parse(&fs::read_to_string(&f).unwrap()).unwrap();
        let val = validate(&doc);
        let mut s = Session::new(&doc, &val, Options::default());
        assert_eq!(s.saturate(), 0, "{}", f.display());
    }
}

#[test]
fn corpus_covers_the_catalog() {
    let mut seen = String::new();
    for f in gad_files("corpus") {
        seen += &fs::read_to_string(common::golden_path(&f)).unwrap();
    }
    for rule in [
        "GA1", "GA2", "GA3", "GA4", "EX1", "EX2", "EX3", "THM2a", "THM2b", "POSCOR", "SS-COR",
        "UNIF", "HDI", "CORVAN", "KAMPLE", "KOSZUL", "CONNECT", "BASELOC",
    ] {
        assert!(
            seen.contains(&format!("\"rule\": \"{rule}\"")),
            "{rule} not covered"
        );
    }
}
