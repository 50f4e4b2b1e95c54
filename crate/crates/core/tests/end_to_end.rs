use owkg_core::analytic::{conditioned_expectation, AnalyticParams};
use owkg_core::kg::{deduce_closure, generate_base_population, validate_closed_world, TreeGenConfig};
use owkg_core::metrics::RankingFunction;
use owkg_core::oracle::{predicted_sparse_metric, sweep_strength, ScoreBands};
use owkg_core::sim::{simulate_cell, SimConfig};
use owkg_core::split::{self, SplitConfig};

fn small_graph() -> owkg_core::kg::KnowledgeGraph {
    let base = generate_base_population(&TreeGenConfig {
        n_trees: 3,
        depth: 3,
        entities_per_tree: 80,
        max_branching: 8,
        seed: 9,
    })
    .unwrap();
    deduce_closure(&base)
}

#[test]
fn split_and_queries_survive_disk() {
    let full = small_graph();
    assert!(validate_closed_world(&full).is_valid());
    let ws = split::split_independent(&full, SplitConfig::new(0.6, 0.7, 4).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = split::write_split(dir.path(), &ws).unwrap();
    assert_eq!(manifest.counts, ws.counts());
    let back = split::read_split(dir.path()).unwrap();
    assert_eq!(back.roles(), ws.roles());
    assert_eq!(back.n_entities(), ws.n_entities());

    let qs = split::build_query_set(&ws, 4, 40, 5).unwrap();
    let qpath = dir.path().join("q.jsonl");
    split::write_queries(&qpath, &qs).unwrap();
    assert_eq!(split::read_queries(&qpath).unwrap(), qs);
}

#[test]
fn simulator_tracks_closed_form() {
    let params = AnalyticParams::new(0.6, 0.5, 12, 400).unwrap();
    let sim = simulate_cell(
        RankingFunction::Mrr,
        &SimConfig {
            params,
            repeats: 20_000,
            root_seed: 2,
        },
    )
    .unwrap();
    let exact = conditioned_expectation(&params, RankingFunction::Mrr).unwrap().value;
    let se = sim.std / (sim.repeats_used as f64).sqrt();
    assert!((sim.mean - exact).abs() < 4.0 * se, "sim {} vs exact {exact} (se {se})", sim.mean);
}

#[test]
fn oracle_pipeline_is_monotone_in_full_mode() {
    let full = small_graph();
    let ws = split::split_independent(&full, SplitConfig::new(0.6, 0.7, 4).unwrap()).unwrap();
    let qs = split::build_query_set(&ws, 4, 60, 5).unwrap();
    let pts = sweep_strength(&ws, &qs, &[0.2, 0.5, 0.8], 0.0, &[RankingFunction::Mrr], ScoreBands::default(), 6).unwrap();
    assert_eq!(pts.len(), 3);
    assert!(pts.windows(2).all(|w| w[0].full_mean < w[1].full_mean));
    let pred = predicted_sparse_metric(&ws, &qs, 0.5, 0.0, RankingFunction::Mrr).unwrap();
    assert!(pred.value > 0.0 && pred.value < 1.0);
}
