//! Runs the checked-in fuzz seeds through the parsers on stable, so a seed
//! that starts panicking shows up in the normal test run.

use std::fs;
use std::path::PathBuf;

use owkg_core::grid::parse_grid;
use owkg_core::kg::io::{format_facts, parse_entities, parse_facts, parse_graph};
use owkg_core::metrics::RankingFunction;
use owkg_core::split::{format_query_lines, parse_manifest, parse_query_lines};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter_map(|p| fs::read(&p).ok().and_then(|b| String::from_utf8(b).ok()).map(|s| (p, s)))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn fact_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("parse_facts") {
        if let Ok(mut facts) = parse_facts(&text) {
            parsed += 1;
            let again = parse_facts(&format_facts(&facts)).unwrap();
            facts.sort();
            facts.dedup();
            assert_eq!(again, facts);
        }
    }
    assert!(parsed >= 2);
}

#[test]
fn graph_seeds() {
    for (p, text) in seeds("parse_graph") {
        let (entities, facts) = text.split_once('\0').unwrap_or((&text, ""));
        let _ = parse_entities(entities);
        assert!(parse_graph(entities, facts).is_ok(), "{}", p.display());
    }
}

#[test]
fn manifest_seeds() {
    let ok = seeds("parse_manifest").iter().filter(|(_, t)| parse_manifest(t).is_ok()).count();
    assert_eq!(ok, 1);
}

#[test]
fn query_seeds() {
    for (_, text) in seeds("parse_query_lines") {
        if let Ok(qs) = parse_query_lines(&text) {
            assert_eq!(parse_query_lines(&format_query_lines(&qs).unwrap()).unwrap(), qs);
        }
    }
}

#[test]
fn grid_seeds() {
    for (_, text) in seeds("parse_grid") {
        if let Ok(g) = parse_grid(&text) {
            assert!(!g.is_empty() && g.iter().all(|x| x.is_finite()));
        }
    }
}

#[test]
fn metric_seeds() {
    for (_, text) in seeds("parse_metric") {
        if let Ok(rf) = text.parse::<RankingFunction>() {
            assert_eq!(rf.to_string().parse::<RankingFunction>().unwrap(), rf);
        }
    }
}
