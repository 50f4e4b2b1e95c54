//! A parametric stand-in for a trained completion model, and the sparse vs
//! full evaluation pipeline built on it.
//!
//! The oracle marks each true answer positive with probability `ell` (or
//! `ell1`/`ell2` for missing/observed answers when correlated with the
//! missing mask), gives positives a score in the upper band and everything
//! else a score in the lower band.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{conditional_strengths, conditioned_expectation, AnalyticParams};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, rank_answers, EvalMode, QueryMetricReport, RankingFunction, ScoreTable};
use crate::seed::{self, STREAM_ORACLE, STREAM_TIES};
use crate::split::{QueryAnswerPartition, WorldSplit};

/// Positives score in `(pos_low, pos_high]`, everything else in
/// `[neg_low, neg_high)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreBands {
    pub pos_low: f64,
    pub pos_high: f64,
    pub neg_low: f64,
    pub neg_high: f64,
}

impl Default for ScoreBands {
    fn default() -> Self {
        ScoreBands {
            pos_low: 0.5,
            pos_high: 1.0,
            neg_low: 0.0,
            neg_high: 0.5,
        }
    }
}

impl ScoreBands {
    fn validate(&self) -> Result<()> {
        let ok = [self.pos_low, self.pos_high, self.neg_low, self.neg_high].iter().all(|x| x.is_finite())
            && self.neg_low < self.neg_high
            && self.neg_high <= self.pos_low
            && self.pos_low < self.pos_high;
        if ok {
            Ok(())
        } else {
            Err(Error::domain("score_bands", format!("bands must be ordered and nonempty: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub ell: f64,
    pub rho: f64,
    pub bands: ScoreBands,
    pub seed: u64,
}

impl OracleSpec {
    pub fn new(ell: f64, rho: f64, seed: u64) -> Result<Self> {
        let spec = OracleSpec {
            ell,
            rho,
            bands: ScoreBands::default(),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ell) {
            return Err(Error::domain("ell", format!("need 0 <= ell <= 1, got {}", self.ell)));
        }
        self.bands.validate()
    }

    pub fn model_id(&self) -> String {
        format!("oracle-l{}-r{}", self.ell, self.rho)
    }
}

/// Scores every entity for one query. `beta` is the split's sparsity, used
/// only to turn `rho` into conditional strengths.
pub fn score_query(spec: &OracleSpec, partition: &QueryAnswerPartition, n_entities: usize, beta: f64, seed: u64) -> Result<ScoreTable> {
    spec.validate()?;
    let (ell_missing, ell_observed) = conditional_strengths(spec.ell, beta, spec.rho)?;
    let b = spec.bands;
    let mut rng = seed::rng(seed, &[]);
    let mut scores: Vec<f64> = (0..n_entities).map(|_| b.neg_low + rng.random::<f64>() * (b.neg_high - b.neg_low)).collect();
    let mut mark = |e: crate::kg::EntityId, ell: f64| -> Result<()> {
        let slot = scores
            .get_mut(e.index())
            .ok_or_else(|| Error::domain("partition", format!("answer {e} is outside the entity range")))?;
        if rng.random::<f64>() < ell {
            *slot = b.pos_high - rng.random::<f64>() * (b.pos_high - b.pos_low);
        }
        Ok(())
    };
    for &e in partition.train_answers.iter().chain(&partition.test_answers) {
        mark(e, ell_observed)?;
    }
    for &e in &partition.missing_answers {
        mark(e, ell_missing)?;
    }
    Ok(ScoreTable(scores))
}

/// Positive/negative predictions of a strength-`ell` reference model for
/// `n` facts, used to draw correlated splits.
pub fn reference_predictions(n: usize, ell: f64, seed: u64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&ell) {
        return Err(Error::domain("ell", format!("need 0 <= ell <= 1, got {ell}")));
    }
    let mut rng = seed::rng(seed, &[STREAM_ORACLE]);
    Ok((0..n).map(|_| rng.random::<f64>() < ell).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelinePoint {
    pub model_id: String,
    pub ell_nominal: f64,
    pub rho: f64,
    pub d: f64,
    pub metric: RankingFunction,
    pub sparse_mean: f64,
    pub sparse_std: f64,
    /// Mean over all full test answers.
    pub full_mean: f64,
    pub full_std: f64,
    /// Full-mode mean over the observed test answers only.
    pub full_test_mean: f64,
    pub n_queries: usize,
}

pub const PIPELINE_CSV_SCHEMA: &str = "# schema: pipeline/1";
pub const PIPELINE_CSV_HEADER: &str = "model_id,ell_nominal,rho,d,metric,sparse_mean,sparse_std,full_mean,full_std,n_queries";

impl PipelinePoint {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.model_id,
            self.ell_nominal,
            self.rho,
            self.d,
            self.metric,
            self.sparse_mean,
            self.sparse_std,
            self.full_mean,
            self.full_std,
            self.n_queries
        )
    }
}

/// Evaluates every query in both modes with one oracle and aggregates per
/// metric. Query `i` draws its scores and tie breaks from `spec.seed` and `i`.
pub fn run_pipeline(split: &WorldSplit, queries: &[QueryAnswerPartition], spec: &OracleSpec, metrics: &[RankingFunction]) -> Result<Vec<PipelinePoint>> {
    if queries.is_empty() {
        return Err(Error::Empty("query list"));
    }
    if metrics.is_empty() {
        return Err(Error::Empty("metric list"));
    }
    for rf in metrics {
        rf.validate()?;
    }
    let beta = split.config.beta();
    let per_query: Vec<Vec<(QueryMetricReport, QueryMetricReport)>> = queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let scores = score_query(spec, q, split.n_entities(), beta, seed::derive(spec.seed, &[STREAM_ORACLE, i as u64]))?;
            let tie = seed::derive(spec.seed, &[STREAM_TIES, i as u64]);
            let sparse = rank_answers(&scores, q, EvalMode::Sparse, tie)?;
            let full = rank_answers(&scores, q, EvalMode::Full, tie ^ 1)?;
            Ok(metrics
                .iter()
                .map(|&rf| {
                    (
                        QueryMetricReport::from_ranks(sparse.clone(), q, rf, EvalMode::Sparse),
                        QueryMetricReport::from_ranks(full.clone(), q, rf, EvalMode::Full),
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    metrics
        .iter()
        .enumerate()
        .map(|(j, &rf)| {
            let sparse = aggregate(per_query.iter().map(|r| r[j].0.mean))?;
            let full = aggregate(per_query.iter().map(|r| r[j].1.mean))?;
            let full_test = aggregate(per_query.iter().map(|r| r[j].1.mean_test))?;
            Ok(PipelinePoint {
                model_id: spec.model_id(),
                ell_nominal: spec.ell,
                rho: spec.rho,
                d: split.config.density,
                metric: rf,
                sparse_mean: sparse.mean,
                sparse_std: sparse.std,
                full_mean: full.mean,
                full_std: full.std,
                full_test_mean: full_test.mean,
                n_queries: queries.len(),
            })
        })
        .collect()
}

/// One pipeline run per strength, sharing the split and queries; the oracle
/// for `ell_grid[i]` uses a seed derived from `seed` and `i`.
pub fn sweep_strength(
    split: &WorldSplit,
    queries: &[QueryAnswerPartition],
    ell_grid: &[f64],
    rho: f64,
    metrics: &[RankingFunction],
    bands: ScoreBands,
    seed: u64,
) -> Result<Vec<PipelinePoint>> {
    if ell_grid.is_empty() {
        return Err(Error::Empty("strength grid"));
    }
    let mut out = Vec::new();
    for (i, &ell) in ell_grid.iter().enumerate() {
        let spec = OracleSpec {
            ell,
            rho,
            bands,
            seed: seed::derive(seed, &[i as u64]),
        };
        out.extend(run_pipeline(split, queries, &spec, metrics)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SparsePrediction {
    /// Query-averaged expected sparse metric.
    pub value: f64,
    /// Query-averaged bound on the negative-answer term.
    pub delta_upper: f64,
}

/// Expected sparse metric averaged over the queries, each with its own
/// number of full test answers and its own candidate count (training answers
/// are filtered, so they leave the candidate pool).
pub fn predicted_sparse_metric(split: &WorldSplit, queries: &[QueryAnswerPartition], ell: f64, rho: f64, rf: RankingFunction) -> Result<SparsePrediction> {
    if queries.is_empty() {
        return Err(Error::Empty("query list"));
    }
    let beta = split.config.beta();
    let (mut value, mut delta) = (0.0, 0.0);
    for q in queries {
        let params = AnalyticParams {
            ell,
            beta,
            n: q.n_full_test() as u64,
            n_entity: (split.n_entities() - q.train_answers.len()) as u64,
            rho,
        };
        let e = conditioned_expectation(&params, rf)?;
        value += e.value;
        delta += e.delta_upper;
    }
    let n = queries.len() as f64;
    Ok(SparsePrediction {
        value: value / n,
        delta_upper: delta / n,
    })
}
