//! Shared fixtures and reporting for the acceptance suite.

use std::fmt;
use std::time::Instant;

use owkg_core::kg::{deduce_closure, generate_base_population, KnowledgeGraph, TreeGenConfig};

/// Result of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} [{tag}] {}: {}", self.id, self.title, self.detail)
    }
}

/// The default family-tree graph, with the seconds spent generating and
/// closing it.
pub fn default_graph(seed: u64) -> (KnowledgeGraph, KnowledgeGraph, f64) {
    let start = Instant::now();
    let base = generate_base_population(&TreeGenConfig {
        seed,
        ..TreeGenConfig::default()
    })
    .expect("default tree shape is feasible");
    let full = deduce_closure(&base);
    (base, full, start.elapsed().as_secs_f64())
}

/// Inclusive grid `start, start + step, ..., stop`.
pub fn steps(start: f64, stop: f64, step: f64) -> Vec<f64> {
    owkg_core::grid::range(start, stop, step).expect("valid grid")
}

/// Average divided second difference of `y` against `x`.
pub fn mean_second_difference(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    assert!(n >= 3 && y.len() == n);
    let slope = |i: usize| (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    let total: f64 = (0..n - 2).map(|i| 2.0 * (slope(i + 1) - slope(i)) / (x[i + 2] - x[i])).sum();
    total / (n - 2) as f64
}
