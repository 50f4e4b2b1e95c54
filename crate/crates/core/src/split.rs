//! Open-world views of a closed-world graph.
//!
//! Every fact of `G_full` is a training fact, a (sparse) test fact or a
//! missing fact. With density `d = |G_test| / |G_full|` and train ratio
//! `eta = |G_train| / |G_test|`, a full test fact (`G_full \ G_train`) is
//! observed with probability `alpha = d(1 - eta) / (1 - d eta)` and missing
//! with probability `beta = 1 - alpha`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{io, EntityId, Fact, KnowledgeGraph, RelationKind};
use crate::seed::{self, STREAM_QUERIES, STREAM_SPLIT};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub density: f64,
    pub train_ratio: f64,
    pub seed: u64,
}

impl SplitConfig {
    pub fn new(density: f64, train_ratio: f64, seed: u64) -> Result<Self> {
        check_density(density, train_ratio)?;
        Ok(SplitConfig {
            density,
            train_ratio,
            seed,
        })
    }

    pub fn alpha(&self) -> f64 {
        alpha_unchecked(self.density, self.train_ratio)
    }

    pub fn beta(&self) -> f64 {
        beta_unchecked(self.density, self.train_ratio)
    }
}

fn check_density(d: f64, eta: f64) -> Result<()> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::domain("density", format!("need 0 < d <= 1, got {d}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain("train_ratio", format!("need 0 < eta < 1, got {eta}")));
    }
    Ok(())
}

fn alpha_unchecked(d: f64, eta: f64) -> f64 {
    d * (1.0 - eta) / (1.0 - d * eta)
}

fn beta_unchecked(d: f64, eta: f64) -> f64 {
    (1.0 - d) / (1.0 - d * eta)
}

/// Probability that a full test fact is observed as a test fact.
pub fn alpha_from_density(d: f64, eta: f64) -> Result<f64> {
    check_density(d, eta)?;
    Ok(alpha_unchecked(d, eta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactRole {
    Train,
    Test,
    Missing,
}

/// A closed-world graph partitioned into training, test and missing facts.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldSplit {
    pub config: SplitConfig,
    /// Correlation target used to draw the split, if any.
    pub rho: Option<f64>,
    n_entities: usize,
    roles: BTreeMap<Fact, FactRole>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub full: usize,
    pub test: usize,
    pub train: usize,
    pub sparse_test: usize,
    pub missing: usize,
}

impl WorldSplit {
    pub fn from_roles(config: SplitConfig, n_entities: usize, roles: impl IntoIterator<Item = (Fact, FactRole)>) -> Self {
        WorldSplit {
            config,
            rho: None,
            n_entities,
            roles: roles.into_iter().collect(),
        }
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn roles(&self) -> &BTreeMap<Fact, FactRole> {
        &self.roles
    }

    pub fn role(&self, f: &Fact) -> Option<FactRole> {
        self.roles.get(f).copied()
    }

    fn with_roles<'a>(&'a self, keep: &'a [FactRole]) -> impl Iterator<Item = &'a Fact> + 'a {
        self.roles.iter().filter(move |(_, r)| keep.contains(r)).map(|(f, _)| f)
    }

    pub fn g_full(&self) -> BTreeSet<Fact> {
        self.roles.keys().copied().collect()
    }

    pub fn g_test(&self) -> BTreeSet<Fact> {
        self.with_roles(&[FactRole::Train, FactRole::Test]).copied().collect()
    }

    pub fn g_train(&self) -> BTreeSet<Fact> {
        self.with_roles(&[FactRole::Train]).copied().collect()
    }

    pub fn facts_with(&self, role: FactRole) -> BTreeSet<Fact> {
        self.with_roles(&[role]).copied().collect()
    }

    pub fn counts(&self) -> SplitCounts {
        let mut c = SplitCounts {
            full: self.roles.len(),
            ..Default::default()
        };
        for r in self.roles.values() {
            match r {
                FactRole::Train => c.train += 1,
                FactRole::Test => c.sparse_test += 1,
                FactRole::Missing => c.missing += 1,
            }
        }
        c.test = c.train + c.sparse_test;
        c
    }

    /// Missing indicator over the full test facts, in fact order.
    pub fn missing_mask(&self) -> Vec<bool> {
        self.roles
            .values()
            .filter(|r| **r != FactRole::Train)
            .map(|r| *r == FactRole::Missing)
            .collect()
    }
}

fn require_closed(kg: &KnowledgeGraph) -> Result<()> {
    if kg.is_closed() {
        Ok(())
    } else {
        Err(Error::domain("kg_full", "the graph must be closed (run deduce_closure first)"))
    }
}

/// Assigns each fact independently: training with probability `d eta`,
/// test with `d (1 - eta)`, missing with `1 - d`.
pub fn split_independent(kg_full: &KnowledgeGraph, config: SplitConfig) -> Result<WorldSplit> {
    check_density(config.density, config.train_ratio)?;
    require_closed(kg_full)?;
    let mut rng = seed::rng(config.seed, &[STREAM_SPLIT]);
    let p_train = config.density * config.train_ratio;
    let roles = kg_full.facts().iter().map(|&f| {
        let u: f64 = rng.random();
        let role = if u < p_train {
            FactRole::Train
        } else if u < config.density {
            FactRole::Test
        } else {
            FactRole::Missing
        };
        (f, role)
    });
    Ok(WorldSplit::from_roles(config, kg_full.n_entities(), roles))
}

/// Target correlation between "missing" (X) and a reference model's
/// positive prediction (Y) over the full test facts.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTarget {
    pub rho: f64,
    /// One entry per fact of `G_full`, in fact order.
    pub reference_predictions: Vec<bool>,
}

/// Conditional missing probabilities `(P(X|Y), P(X|not Y))` matching marginal
/// `beta`, positive-prediction rate `ell_hat` and correlation `rho`.
pub fn conditional_missing(beta: f64, ell_hat: f64, rho: f64) -> Result<(f64, f64)> {
    let alpha = 1.0 - beta;
    if rho == 0.0 {
        return Ok((beta, beta));
    }
    if !(ell_hat > 0.0 && ell_hat < 1.0) {
        return Err(Error::UndefinedCorrelation("the reference predictions are constant"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::UndefinedCorrelation("the missing rate is 0 or 1"));
    }
    let a = (alpha * beta * (1.0 - ell_hat) / ell_hat).sqrt();
    let b = (alpha * beta * ell_hat / (1.0 - ell_hat)).sqrt();
    let low = (-beta / a).max(-alpha / b);
    let high = (alpha / a).min(beta / b);
    if !(rho >= low && rho <= high) {
        return Err(Error::InfeasibleCorrelation { rho, low, high });
    }
    Ok(((beta + rho * a).clamp(0.0, 1.0), (beta - rho * b).clamp(0.0, 1.0)))
}

/// Chooses training facts first (probability `d eta`, independent of the
/// predictions), then marks each full test fact missing with probability
/// `P(X|Y)` or `P(X|not Y)` from [`conditional_missing`], where `ell_hat`
/// is the observed positive rate of the reference predictions on the full
/// test facts.
pub fn split_correlated(kg_full: &KnowledgeGraph, config: SplitConfig, target: &CorrelationTarget) -> Result<WorldSplit> {
    check_density(config.density, config.train_ratio)?;
    require_closed(kg_full)?;
    if target.reference_predictions.len() != kg_full.len() {
        return Err(Error::domain(
            "reference_predictions",
            format!("expected {} entries, got {}", kg_full.len(), target.reference_predictions.len()),
        ));
    }
    if target.rho == 0.0 {
        let mut s = split_independent(kg_full, config)?;
        s.rho = Some(0.0);
        return Ok(s);
    }
    let mut rng = seed::rng(config.seed, &[STREAM_SPLIT]);
    let p_train = config.density * config.train_ratio;
    let draws: Vec<f64> = (0..kg_full.len()).map(|_| rng.random()).collect();
    let (mut positives, mut full_test) = (0usize, 0usize);
    for (u, &y) in draws.iter().zip(&target.reference_predictions) {
        if *u >= p_train {
            full_test += 1;
            positives += y as usize;
        }
    }
    if full_test == 0 {
        return Err(Error::Empty("no full test facts to split"));
    }
    let ell_hat = positives as f64 / full_test as f64;
    let (p_given_y, p_given_not_y) = conditional_missing(config.beta(), ell_hat, target.rho)?;
    // Rescale the leftover mass of u to a fresh uniform on (0, 1].
    let roles = kg_full.facts().iter().zip(draws).zip(&target.reference_predictions).map(|((&f, u), &y)| {
        let role = if u < p_train {
            FactRole::Train
        } else {
            let v = (1.0 - u) / (1.0 - p_train);
            let p = if y { p_given_y } else { p_given_not_y };
            if v <= p {
                FactRole::Missing
            } else {
                FactRole::Test
            }
        };
        (f, role)
    });
    let mut s = WorldSplit::from_roles(config, kg_full.n_entities(), roles);
    s.rho = Some(target.rho);
    Ok(s)
}

/// Plug-in estimate of `(P(XY) - P(X)P(Y)) / sqrt(P(X)P(!X)P(Y)P(!Y))`.
pub fn empirical_correlation(x: &[bool], y: &[bool]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain("masks", format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::domain("masks", "need at least two entries"));
    }
    let n = x.len() as f64;
    let (mut nx, mut ny, mut nxy) = (0usize, 0usize, 0usize);
    for (&a, &b) in x.iter().zip(y) {
        nx += a as usize;
        ny += b as usize;
        nxy += (a && b) as usize;
    }
    let (px, py, pxy) = (nx as f64 / n, ny as f64 / n, nxy as f64 / n);
    if nx == 0 || nx == x.len() || ny == 0 || ny == y.len() {
        return Err(Error::UndefinedCorrelation("a mask is constant"));
    }
    Ok((pxy - px * py) / (px * (1.0 - px) * py * (1.0 - py)).sqrt())
}

/// A query `relation(head, ?)` with its answers split by role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryAnswerPartition {
    pub relation: RelationKind,
    pub head: EntityId,
    #[serde(rename = "train")]
    pub train_answers: Vec<EntityId>,
    #[serde(rename = "test")]
    pub test_answers: Vec<EntityId>,
    #[serde(rename = "missing")]
    pub missing_answers: Vec<EntityId>,
}

impl QueryAnswerPartition {
    pub fn all_answers(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.train_answers
            .iter()
            .chain(&self.test_answers)
            .chain(&self.missing_answers)
            .copied()
    }

    pub fn n_answers(&self) -> usize {
        self.train_answers.len() + self.test_answers.len() + self.missing_answers.len()
    }

    /// Full test answers: test plus missing.
    pub fn n_full_test(&self) -> usize {
        self.test_answers.len() + self.missing_answers.len()
    }

    /// Checks that the three sets are disjoint, duplicate-free and that no
    /// answer equals the head.
    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in self.all_answers() {
            if e == self.head {
                return Err(Error::domain("partition", format!("answer {e} equals the query head")));
            }
            if !seen.insert(e) {
                return Err(Error::domain("partition", format!("answer {e} appears twice")));
            }
        }
        Ok(())
    }
}

/// Samples `n_queries` distinct `(relation, head)` queries uniformly among
/// those with at least `min_full_answers` answers in `G_full` and at least
/// one test answer.
pub fn build_query_set(split: &WorldSplit, min_full_answers: usize, n_queries: usize, seed: u64) -> Result<Vec<QueryAnswerPartition>> {
    let mut groups: BTreeMap<(RelationKind, EntityId), QueryAnswerPartition> = BTreeMap::new();
    for (f, role) in split.roles() {
        let q = groups.entry((f.relation, f.head)).or_insert_with(|| QueryAnswerPartition {
            relation: f.relation,
            head: f.head,
            train_answers: vec![],
            test_answers: vec![],
            missing_answers: vec![],
        });
        match role {
            FactRole::Train => q.train_answers.push(f.tail),
            FactRole::Test => q.test_answers.push(f.tail),
            FactRole::Missing => q.missing_answers.push(f.tail),
        }
    }
    let eligible: Vec<QueryAnswerPartition> = groups
        .into_values()
        .filter(|q| q.n_answers() >= min_full_answers && !q.test_answers.is_empty())
        .collect();
    if eligible.len() < n_queries {
        return Err(Error::QueryShortfall {
            requested: n_queries,
            available: eligible.len(),
        });
    }
    let mut rng = seed::rng(seed, &[STREAM_QUERIES]);
    let mut picked = index::sample(&mut rng, eligible.len(), n_queries).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| eligible[i].clone()).collect())
}

pub fn format_query_lines(queries: &[QueryAnswerPartition]) -> Result<String> {
    let mut out = String::new();
    for q in queries {
        out.push_str(&serde_json::to_string(q)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_query_lines(text: &str) -> Result<Vec<QueryAnswerPartition>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q: QueryAnswerPartition = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        q.check().map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(q);
    }
    Ok(out)
}

/// JSON manifest written next to the three fact files of a split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub schema: u32,
    pub config: SplitConfig,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub n_entities: usize,
    pub counts: SplitCounts,
    pub train_file: String,
    pub test_file: String,
    pub missing_file: String,
}

pub const SPLIT_MANIFEST_SCHEMA: u32 = 1;

impl SplitManifest {
    pub fn describe(split: &WorldSplit, train_file: &str, test_file: &str, missing_file: &str) -> Self {
        SplitManifest {
            schema: SPLIT_MANIFEST_SCHEMA,
            config: split.config,
            alpha: split.config.alpha(),
            beta: split.config.beta(),
            rho: split.rho,
            n_entities: split.n_entities(),
            counts: split.counts(),
            train_file: train_file.into(),
            test_file: test_file.into(),
            missing_file: missing_file.into(),
        }
    }
}

pub fn parse_manifest(text: &str) -> Result<SplitManifest> {
    let m: SplitManifest = serde_json::from_str(text)?;
    if m.schema != SPLIT_MANIFEST_SCHEMA {
        return Err(Error::domain("schema", format!("unsupported split manifest schema {}", m.schema)));
    }
    check_density(m.config.density, m.config.train_ratio)?;
    Ok(m)
}

/// Rebuilds a split from its manifest and the three fact lists, checking
/// that the lists are disjoint and match the recorded counts.
pub fn split_from_parts(manifest: &SplitManifest, train: Vec<Fact>, test: Vec<Fact>, missing: Vec<Fact>) -> Result<WorldSplit> {
    let mut roles = BTreeMap::new();
    for (facts, role) in [(train, FactRole::Train), (test, FactRole::Test), (missing, FactRole::Missing)] {
        for f in facts {
            if f.head.index() >= manifest.n_entities || f.tail.index() >= manifest.n_entities {
                return Err(Error::domain("fact", format!("{f} references an unknown entity")));
            }
            if roles.insert(f, role).is_some() {
                return Err(Error::domain("fact", format!("{f} appears in more than one set")));
            }
        }
    }
    let mut split = WorldSplit::from_roles(manifest.config, manifest.n_entities, roles);
    split.rho = manifest.rho;
    if split.counts() != manifest.counts {
        return Err(Error::domain("counts", "fact files do not match the manifest counts"));
    }
    Ok(split)
}

pub const SPLIT_MANIFEST_FILE: &str = "split.json";
pub const TRAIN_FILE: &str = "train.tsv";
pub const TEST_FILE: &str = "test.tsv";
pub const MISSING_FILE: &str = "missing.tsv";

/// Writes the manifest and the three fact files into `dir`.
pub fn write_split(dir: &Path, split: &WorldSplit) -> Result<SplitManifest> {
    let manifest = SplitManifest::describe(split, TRAIN_FILE, TEST_FILE, MISSING_FILE);
    io::write_facts(&dir.join(TRAIN_FILE), &split.facts_with(FactRole::Train))?;
    io::write_facts(&dir.join(TEST_FILE), &split.facts_with(FactRole::Test))?;
    io::write_facts(&dir.join(MISSING_FILE), &split.facts_with(FactRole::Missing))?;
    io::write(&dir.join(SPLIT_MANIFEST_FILE), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(manifest)
}

pub fn read_split(dir: &Path) -> Result<WorldSplit> {
    let manifest = parse_manifest(&io::read(&dir.join(SPLIT_MANIFEST_FILE))?)?;
    split_from_parts(
        &manifest,
        io::read_facts(&dir.join(&manifest.train_file))?,
        io::read_facts(&dir.join(&manifest.test_file))?,
        io::read_facts(&dir.join(&manifest.missing_file))?,
    )
}

pub fn write_queries(path: &Path, queries: &[QueryAnswerPartition]) -> Result<()> {
    io::write(path, &format_query_lines(queries)?)
}

pub fn read_queries(path: &Path) -> Result<Vec<QueryAnswerPartition>> {
    parse_query_lines(&io::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{deduce_closure, generate_base_population, Gender, TreeGenConfig};

    fn small_kg() -> KnowledgeGraph {
        deduce_closure(
            &generate_base_population(&TreeGenConfig {
                n_trees: 4,
                depth: 3,
                entities_per_tree: 150,
                max_branching: 8,
                seed: 21,
            })
            .unwrap(),
        )
    }

    #[test]
    fn alpha_table() {
        assert!((alpha_from_density(0.95, 0.7).unwrap() - 0.8507).abs() < 1e-4);
        assert!((alpha_from_density(0.65, 0.7).unwrap() - 0.195 / 0.545).abs() < 1e-15);
        for eta in [0.1, 0.5, 0.9] {
            assert_eq!(alpha_from_density(1.0, eta).unwrap(), 1.0);
        }
        assert!(alpha_from_density(0.0, 0.5).is_err());
        assert!(alpha_from_density(0.5, 1.0).is_err());
    }

    #[test]
    fn full_density_has_no_missing_facts() {
        let kg = small_kg();
        let s = split_independent(&kg, SplitConfig::new(1.0, 0.7, 3).unwrap()).unwrap();
        assert_eq!(s.g_test(), s.g_full());
        assert_eq!(s.counts().missing, 0);
    }

    #[test]
    fn nesting_and_determinism() {
        let kg = small_kg();
        let cfg = SplitConfig::new(0.75, 0.7, 5).unwrap();
        let a = split_independent(&kg, cfg).unwrap();
        assert_eq!(a, split_independent(&kg, cfg).unwrap());
        assert!(a.g_train().is_subset(&a.g_test()));
        assert!(a.g_test().is_subset(&a.g_full()));
        assert_eq!(&a.g_full(), kg.facts());
        assert!(split_independent(&generate_base_population(&TreeGenConfig::default()).unwrap(), cfg).is_err());
    }

    #[test]
    fn conditional_probabilities() {
        let (py, pny) = conditional_missing(0.35, 0.7, 0.3).unwrap();
        let expect_y = 0.35 + 0.3 * (0.65f64 * 0.35 * 0.3 / 0.7).sqrt();
        let expect_ny = 0.35 - 0.3 * (0.65f64 * 0.35 * 0.7 / 0.3).sqrt();
        assert!((py - expect_y).abs() < 1e-15);
        assert!((pny - expect_ny).abs() < 1e-15);
        assert!((py - 0.443675).abs() < 1e-6, "{py}");
        assert!((pny - 0.131425).abs() < 1e-6, "{pny}");
        // Marginal stays beta.
        assert!((0.7 * py + 0.3 * pny - 0.35).abs() < 1e-15);
        match conditional_missing(0.35, 0.7, 0.9) {
            Err(Error::InfeasibleCorrelation { low, high, .. }) => {
                assert!(low < 0.0 && high > 0.3 && high < 0.9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn correlated_rho_zero_matches_independent() {
        let kg = small_kg();
        let cfg = SplitConfig::new(0.75, 0.7, 8).unwrap();
        let preds = (0..kg.len()).map(|i| i % 3 != 0).collect();
        let c = split_correlated(&kg, cfg, &CorrelationTarget { rho: 0.0, reference_predictions: preds }).unwrap();
        assert_eq!(c.roles(), split_independent(&kg, cfg).unwrap().roles());
        let short = CorrelationTarget { rho: 0.1, reference_predictions: vec![true; 3] };
        assert!(split_correlated(&kg, cfg, &short).is_err());
    }

    #[test]
    fn empirical_correlation_extremes() {
        let x: Vec<bool> = (0..100).map(|i| i % 3 == 0).collect();
        let not_x: Vec<bool> = x.iter().map(|b| !b).collect();
        assert!((empirical_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((empirical_correlation(&x, &not_x).unwrap() + 1.0).abs() < 1e-12);
        assert!(empirical_correlation(&x, &[true; 100]).is_err());
        assert!(empirical_correlation(&x[..3], &x[..4]).is_err());
    }

    #[test]
    fn queries_partition_full_answers() {
        let kg = small_kg();
        let split = split_independent(&kg, SplitConfig::new(0.75, 0.7, 2).unwrap()).unwrap();
        let qs = build_query_set(&split, 10, 50, 4).unwrap();
        assert_eq!(qs.len(), 50);
        for q in &qs {
            q.check().unwrap();
            assert!(q.n_answers() >= 10 && !q.test_answers.is_empty());
            let tails: BTreeSet<EntityId> = kg.facts().iter().filter(|f| f.relation == q.relation && f.head == q.head).map(|f| f.tail).collect();
            let union: BTreeSet<EntityId> = q.all_answers().collect();
            assert_eq!(union, tails);
            for e in &q.test_answers {
                assert_eq!(split.role(&Fact { head: q.head, relation: q.relation, tail: *e }), Some(FactRole::Test));
            }
        }
        assert!(matches!(build_query_set(&split, 10, 1_000_000, 4), Err(Error::QueryShortfall { .. })));
        let back = parse_query_lines(&format_query_lines(&qs).unwrap()).unwrap();
        assert_eq!(back, qs);
    }

    #[test]
    fn two_entity_graph_spouse_queries() {
        let mut kg = KnowledgeGraph::new(vec![Gender::Female, Gender::Male]);
        kg.insert(Fact::new(RelationKind::WifeOf, 0, 1)).unwrap();
        let kg = deduce_closure(&kg);
        let split = split_independent(&kg, SplitConfig::new(1.0, 0.01, 1).unwrap()).unwrap();
        let qs = build_query_set(&split, 1, 2, 0).unwrap();
        let rels: BTreeSet<RelationKind> = qs.iter().map(|q| q.relation).collect();
        assert_eq!(rels, [RelationKind::WifeOf, RelationKind::HusbandOf].into());
    }

    #[test]
    fn manifest_roundtrip() {
        let kg = small_kg();
        let split = split_independent(&kg, SplitConfig::new(0.85, 0.7, 9).unwrap()).unwrap();
        let m = SplitManifest::describe(&split, "train.tsv", "test.tsv", "missing.tsv");
        let parsed = parse_manifest(&serde_json::to_string_pretty(&m).unwrap()).unwrap();
        assert_eq!(parsed, m);
        let rebuilt = split_from_parts(
            &parsed,
            split.facts_with(FactRole::Train).into_iter().collect(),
            split.facts_with(FactRole::Test).into_iter().collect(),
            split.facts_with(FactRole::Missing).into_iter().collect(),
        )
        .unwrap();
        assert_eq!(rebuilt, split);
        assert!(split_from_parts(&parsed, vec![], vec![], vec![]).is_err());
    }
}
