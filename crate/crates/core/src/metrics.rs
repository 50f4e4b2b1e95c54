//! Filtered ranking and the `1/f(rank)` metric family.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::EntityId;
use crate::seed;
use crate::split::QueryAnswerPartition;

/// A ranking metric written as `1 / f(rank)` with `f` nondecreasing and
/// `f(1) >= 1`. Hits@K uses `f = 1` up to `K` and `f = +inf` beyond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RankingFunction {
    Mrr,
    HitsAtK(u64),
    LogMrr,
    /// `f(r) = r^p` with `0 < p < 1`.
    PMrr(f64),
}

impl RankingFunction {
    pub fn denominator(self, rank: u64) -> f64 {
        let r = rank as f64;
        match self {
            RankingFunction::Mrr => r,
            RankingFunction::HitsAtK(k) => {
                if rank <= k {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            RankingFunction::LogMrr => (r + 1.0).log2(),
            RankingFunction::PMrr(p) => r.powf(p),
        }
    }

    /// `1 / f(rank)`; zero when `f` is infinite.
    pub fn value(self, rank: u64) -> f64 {
        match self {
            RankingFunction::HitsAtK(k) => {
                if rank <= k {
                    1.0
                } else {
                    0.0
                }
            }
            RankingFunction::Mrr => 1.0 / rank as f64,
            _ => 1.0 / self.denominator(rank),
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            RankingFunction::HitsAtK(0) => Err(Error::domain("K", "Hits@K needs K >= 1")),
            RankingFunction::PMrr(p) if !(p > 0.0 && p < 1.0) => Err(Error::domain("p", format!("p-MRR needs 0 < p < 1, got {p}"))),
            rf => Ok(rf),
        }
    }

    pub fn tag(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RankingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankingFunction::Mrr => f.write_str("mrr"),
            RankingFunction::HitsAtK(k) => write!(f, "hits@{k}"),
            RankingFunction::LogMrr => f.write_str("log-mrr"),
            RankingFunction::PMrr(p) => write!(f, "p-mrr@{p}"),
        }
    }
}

impl FromStr for RankingFunction {
    type Err = Error;

    /// Accepts `mrr`, `hits@K`, `log-mrr`, `p-mrr@P`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain("metric", format!("unknown metric `{s}` (expected mrr, hits@K, log-mrr, p-mrr@P)"));
        let rf = match s.to_ascii_lowercase().as_str() {
            "mrr" => RankingFunction::Mrr,
            "log-mrr" | "logmrr" => RankingFunction::LogMrr,
            other => {
                if let Some(k) = other.strip_prefix("hits@") {
                    RankingFunction::HitsAtK(k.parse().map_err(|_| bad())?)
                } else if let Some(p) = other.strip_prefix("p-mrr@") {
                    RankingFunction::PMrr(p.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        };
        rf.validate()
    }
}

impl TryFrom<String> for RankingFunction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RankingFunction> for String {
    fn from(rf: RankingFunction) -> String {
        rf.to_string()
    }
}

/// Per-entity scores for one query, indexed by entity id.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable(pub Vec<f64>);

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn score(&self, e: EntityId) -> f64 {
        self.0[e.index()]
    }
}

/// Filtered rank of `target`: one plus the unfiltered entities scored
/// strictly higher, plus a uniformly random share of the equal-scored ones.
pub fn filtered_rank(scores: &ScoreTable, target: EntityId, filter: &HashSet<EntityId>, tie_seed: u64) -> Result<u64> {
    if filter.contains(&target) {
        return Err(Error::TargetFiltered(target.0));
    }
    if target.index() >= scores.len() {
        return Err(Error::domain("target", format!("entity {target} has no score")));
    }
    let s = scores.score(target);
    let (mut higher, mut ties) = (0u64, 0u64);
    for (i, &x) in scores.0.iter().enumerate() {
        let e = EntityId(i as u32);
        if e == target || filter.contains(&e) {
            continue;
        }
        if x > s {
            higher += 1;
        } else if x == s {
            ties += 1;
        }
    }
    Ok(1 + higher + tie_share(ties, tie_seed))
}

fn tie_share(ties: u64, tie_seed: u64) -> u64 {
    if ties == 0 {
        0
    } else {
        seed::rng(tie_seed, &[]).random_range(0..=ties)
    }
}

pub fn metric_of_rank(rank: u64, rf: RankingFunction) -> f64 {
    rf.value(rank)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Filters training and test answers; evaluates test answers.
    Sparse,
    /// Filters every full-graph answer; evaluates test and missing answers.
    Full,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Sparse => "sparse",
            EvalMode::Full => "full",
        }
    }
}

/// Scores sorted once so each answer's rank costs a binary search plus a
/// pass over the (small) filter set.
pub struct RankIndex<'a> {
    scores: &'a ScoreTable,
    sorted: Vec<f64>,
}

impl<'a> RankIndex<'a> {
    pub fn new(scores: &'a ScoreTable) -> Self {
        let mut sorted = scores.0.clone();
        sorted.sort_by(f64::total_cmp);
        RankIndex { scores, sorted }
    }

    fn count_above_and_equal(&self, s: f64) -> (u64, u64) {
        let lo = self.sorted.partition_point(|&x| x < s);
        let hi = self.sorted.partition_point(|&x| x <= s);
        ((self.sorted.len() - hi) as u64, (hi - lo) as u64)
    }

    /// Same contract as [`filtered_rank`]; `filter` may contain `target`,
    /// which is then ignored.
    pub fn rank<R: Rng>(&self, target: EntityId, filter: &[EntityId], rng: &mut R) -> u64 {
        let s = self.scores.score(target);
        let (mut higher, mut ties) = self.count_above_and_equal(s);
        ties -= 1; // the target itself
        for &e in filter {
            if e == target {
                continue;
            }
            let x = self.scores.score(e);
            if x > s {
                higher -= 1;
            } else if x == s {
                ties -= 1;
            }
        }
        let t = if ties == 0 { 0 } else { rng.random_range(0..=ties) };
        1 + higher + t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnswerRank {
    pub entity: EntityId,
    pub rank: u64,
    /// Whether the answer is a test answer (otherwise missing).
    pub is_test: bool,
}

/// Filtered ranks of the answers a mode evaluates.
pub fn rank_answers(scores: &ScoreTable, partition: &QueryAnswerPartition, mode: EvalMode, tie_seed: u64) -> Result<Vec<AnswerRank>> {
    let index = RankIndex::new(scores);
    let mut rng = seed::rng(tie_seed, &[]);
    let (filter, evaluated): (Vec<EntityId>, Vec<(EntityId, bool)>) = match mode {
        EvalMode::Sparse => (
            partition.train_answers.iter().chain(&partition.test_answers).copied().collect(),
            partition.test_answers.iter().map(|&e| (e, true)).collect(),
        ),
        EvalMode::Full => (
            partition.all_answers().collect(),
            partition
                .test_answers
                .iter()
                .map(|&e| (e, true))
                .chain(partition.missing_answers.iter().map(|&e| (e, false)))
                .collect(),
        ),
    };
    if evaluated.is_empty() {
        return Err(Error::EmptyAnswerSet(mode.as_str()));
    }
    Ok(evaluated
        .into_iter()
        .map(|(entity, is_test)| AnswerRank {
            entity,
            rank: index.rank(entity, &filter, &mut rng),
            is_test,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryMetricReport {
    pub mode: EvalMode,
    pub metric: RankingFunction,
    pub ranks: Vec<AnswerRank>,
    /// Mean over every evaluated answer.
    pub mean: f64,
    /// Mean over test answers only (equals `mean` in sparse mode).
    pub mean_test: f64,
    pub n_test: usize,
    pub n_missing: usize,
    pub n_train: usize,
}

impl QueryMetricReport {
    pub fn from_ranks(ranks: Vec<AnswerRank>, partition: &QueryAnswerPartition, rf: RankingFunction, mode: EvalMode) -> Self {
        let mean = ranks.iter().map(|a| rf.value(a.rank)).sum::<f64>() / ranks.len() as f64;
        let tests: Vec<f64> = ranks.iter().filter(|a| a.is_test).map(|a| rf.value(a.rank)).collect();
        let mean_test = if tests.is_empty() { f64::NAN } else { tests.iter().sum::<f64>() / tests.len() as f64 };
        QueryMetricReport {
            mode,
            metric: rf,
            ranks,
            mean,
            mean_test,
            n_test: partition.test_answers.len(),
            n_missing: partition.missing_answers.len(),
            n_train: partition.train_answers.len(),
        }
    }
}

pub fn evaluate_query(
    scores: &ScoreTable,
    partition: &QueryAnswerPartition,
    rf: RankingFunction,
    mode: EvalMode,
    tie_seed: u64,
) -> Result<QueryMetricReport> {
    let ranks = rank_answers(scores, partition, mode, tie_seed)?;
    Ok(QueryMetricReport::from_ranks(ranks, partition, rf, mode))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 when `n == 1`.
    pub std: f64,
    pub n: usize,
}

pub fn aggregate(values: impl IntoIterator<Item = f64>) -> Result<Aggregate> {
    // Welford.
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for x in values {
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    if n == 0 {
        return Err(Error::Empty("no values to aggregate"));
    }
    let std = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(Aggregate { mean, std, n })
}

pub fn aggregate_reports<'a>(reports: impl IntoIterator<Item = &'a QueryMetricReport>) -> Result<Aggregate> {
    aggregate(reports.into_iter().map(|r| r.mean))
}

pub const REPORT_CSV_HEADER: &str = "query_id,mode,metric_tag,mean,n_test,n_missing";

pub fn report_csv_row(query_id: usize, r: &QueryMetricReport) -> String {
    format!("{query_id},{},{},{},{},{}", r.mode.as_str(), r.metric, r.mean, r.n_test, r.n_missing)
}
