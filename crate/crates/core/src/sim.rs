//! Monte Carlo simulation of single queries under the missing-fact and
//! prediction models.
//!
//! A query has `N` answers. Each is missing with probability `beta` and
//! predicted positive with probability `ell1` (missing) or `ell2` (observed).
//! The model ranks every positive item first in uniform random order, then
//! every negative item, including the `N_entity - N` non-answers, in uniform
//! random order. The reported value is the mean of `1/f(rank)` over the
//! observed answers, ranked with the other observed answers filtered out.

use rand::seq::index;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{conditional_strengths, AnalyticParams};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, RankingFunction};
use crate::seed::{self, STREAM_PAIR, STREAM_SIM};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    /// `params.n` is the number of answers per simulated query.
    pub params: AnalyticParams,
    pub repeats: usize,
    pub root_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: AnalyticParams {
                ell: 0.7,
                beta: 0.35,
                n: 43,
                n_entity: 14505,
                rho: 0.0,
            },
            repeats: 500,
            root_seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub mean: f64,
    pub std: f64,
    pub repeats_used: usize,
    /// Draws where every answer was missing.
    pub skipped: usize,
    /// Fewer than two usable draws, so `std` is reported as 0.
    pub low_repeats: bool,
}

/// Fixed-point thresholds for one query model.
#[derive(Clone, Copy, Debug)]
struct QueryModel {
    n: u64,
    non_answers: u64,
    missing: u64,
    pos_missing: u64,
    pos_test: u64,
}

const SCALE: f64 = 4_294_967_296.0;

fn threshold(p: f64) -> u64 {
    (p * SCALE).round() as u64
}

impl QueryModel {
    fn new(params: &AnalyticParams) -> Result<Self> {
        params.validate()?;
        let (ell1, ell2) = conditional_strengths(params.ell, params.beta, params.rho)?;
        Ok(QueryModel {
            n: params.n,
            non_answers: params.n_entity - params.n,
            missing: threshold(params.beta),
            pos_missing: threshold(ell1),
            pos_test: threshold(ell2),
        })
    }

    /// Draws one query and reports `(positive, rank)` for each observed
    /// answer. Returns the number of observed answers.
    fn draw<R: RngCore>(&self, rng: &mut R, mut visit: impl FnMut(bool, u64)) -> u64 {
        let (mut m, mut m_pos, mut t_pos, mut t_neg) = (0u64, 0u64, 0u64, 0u64);
        for _ in 0..self.n {
            let u = rng.next_u64();
            let (hi, lo) = (u >> 32, u & 0xFFFF_FFFF);
            if hi < self.missing {
                m += 1;
                m_pos += (lo < self.pos_missing) as u64;
            } else if lo < self.pos_test {
                t_pos += 1;
            } else {
                t_neg += 1;
            }
        }
        if m == self.n {
            return 0;
        }
        // Positive block in uniform random order: walk it, drawing whether
        // the next item is a positive missing answer or a positive test one.
        let (mut left_missing, mut left_test, mut ahead) = (m_pos, t_pos, 0u64);
        while left_test > 0 {
            if rng.random_range(0..left_missing + left_test) < left_missing {
                left_missing -= 1;
                ahead += 1;
            } else {
                left_test -= 1;
                visit(true, ahead + 1);
            }
        }
        // Negative block: only the slots of negative test answers matter.
        if t_neg > 0 {
            let others = (m - m_pos) + self.non_answers;
            let mut slots = index::sample(rng, (others + t_neg) as usize, t_neg as usize).into_vec();
            slots.sort_unstable();
            for (j, s) in slots.into_iter().enumerate() {
                visit(false, m_pos + 1 + (s - j) as u64);
            }
        }
        t_pos + t_neg
    }

    fn metric<R: RngCore>(&self, rng: &mut R, rf: RankingFunction) -> Option<f64> {
        let mut sum = 0.0;
        let k = self.draw(rng, |_, rank| sum += rf.value(rank));
        (k > 0).then(|| sum / k as f64)
    }
}

/// One simulated query; `None` when every answer is missing.
pub fn simulate_query<R: RngCore>(params: &AnalyticParams, rf: RankingFunction, rng: &mut R) -> Result<Option<f64>> {
    rf.validate()?;
    Ok(QueryModel::new(params)?.metric(rng, rf))
}

fn summarize(values: &[Option<f64>]) -> SimResult {
    let used: Vec<f64> = values.iter().flatten().copied().collect();
    let skipped = values.len() - used.len();
    match aggregate(used.iter().copied()) {
        Ok(a) => SimResult {
            mean: a.mean,
            std: a.std,
            repeats_used: a.n,
            skipped,
            low_repeats: a.n < 2,
        },
        Err(_) => SimResult {
            mean: f64::NAN,
            std: 0.0,
            repeats_used: 0,
            skipped,
            low_repeats: true,
        },
    }
}

fn cell_path(p: &AnalyticParams, repeat: usize) -> [u64; 6] {
    [STREAM_SIM, p.ell.to_bits(), p.beta.to_bits(), p.rho.to_bits(), p.n, repeat as u64]
}

/// Runs `sim.repeats` independent queries at `sim.params`. Each repeat has
/// its own stream derived from the cell's parameters and the repeat index.
pub fn simulate_cell(rf: RankingFunction, sim: &SimConfig) -> Result<SimResult> {
    rf.validate()?;
    if sim.repeats == 0 {
        return Err(Error::domain("repeats", "need at least one repeat"));
    }
    let model = QueryModel::new(&sim.params)?;
    let values: Vec<Option<f64>> = (0..sim.repeats)
        .into_par_iter()
        .map(|r| model.metric(&mut seed::rng(sim.root_seed, &cell_path(&sim.params, r)), rf))
        .collect();
    Ok(summarize(&values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridCell {
    pub ell: f64,
    pub alpha: f64,
    pub rho: f64,
    /// `None` when `rho` is infeasible at this cell.
    pub result: Option<SimResult>,
}

/// One cell per `(ell, alpha)`, with `rho`, `N` and `N_entity` taken from
/// `sim.params`. Cells where `rho` is infeasible carry no result.
pub fn simulate_grid(ell_grid: &[f64], alpha_grid: &[f64], rf: RankingFunction, sim: &SimConfig) -> Result<Vec<GridCell>> {
    if ell_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::Empty("simulation grid"));
    }
    let mut cells = Vec::with_capacity(ell_grid.len() * alpha_grid.len());
    for &alpha in alpha_grid {
        for &ell in ell_grid {
            let params = AnalyticParams {
                ell,
                beta: 1.0 - alpha,
                ..sim.params
            };
            params.validate()?;
            let result = match simulate_cell(rf, &SimConfig { params, ..*sim }) {
                Ok(r) => Some(r),
                Err(Error::InfeasibleCorrelation { .. } | Error::UndefinedCorrelation(_)) => None,
                Err(e) => return Err(e),
            };
            cells.push(GridCell {
                ell,
                alpha,
                rho: params.rho,
                result,
            });
        }
    }
    Ok(cells)
}

pub const SIM_CSV_SCHEMA: &str = "# schema: simulate/1";
pub const SIM_CSV_HEADER: &str = "ell,alpha,rho,metric,mean,std,repeats,skipped";

pub fn sim_csv_row(cell: &GridCell, rf: RankingFunction) -> Option<String> {
    let r = cell.result?;
    Some(format!(
        "{},{},{},{},{},{},{},{}",
        cell.ell, cell.alpha, cell.rho, rf, r.mean, r.std, r.repeats_used, r.skipped
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub variance: f64,
    pub mean: f64,
    pub repeats_used: usize,
    pub skipped: usize,
}

/// Sample variance of the per-query metric.
pub fn estimate_variance(params: &AnalyticParams, rf: RankingFunction, repeats: usize, seed: u64) -> Result<VarianceEstimate> {
    let r = simulate_cell(
        rf,
        &SimConfig {
            params: *params,
            repeats,
            root_seed: seed,
        },
    )?;
    if r.repeats_used < 2 {
        return Err(Error::Empty("fewer than two usable draws"));
    }
    Ok(VarianceEstimate {
        variance: r.std * r.std,
        mean: r.mean,
        repeats_used: r.repeats_used,
        skipped: r.skipped,
    })
}

/// Mean metric over `n_q` usable queries; skipped draws are replaced.
fn query_average<R: RngCore>(model: &QueryModel, rf: RankingFunction, n_q: u64, rng: &mut R) -> Result<f64> {
    let (mut sum, mut got, mut tries) = (0.0, 0u64, 0u64);
    while got < n_q {
        tries += 1;
        if tries > 1000 * n_q + 1000 {
            return Err(Error::Empty("almost every simulated query had no observed answer"));
        }
        if let Some(v) = model.metric(rng, rf) {
            sum += v;
            got += 1;
        }
    }
    Ok(sum / n_q as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairwiseResult {
    /// Fraction of trials where the weaker model scored at least as high.
    pub probability: f64,
    pub inconsistent: usize,
    pub trials: usize,
}

/// Compares models of strength `ell` and `ell + delta_ell`, each evaluated
/// on its own `n_q` independent queries, over `trials` trials.
pub fn simulate_pairwise_inconsistency(
    ell: f64,
    delta_ell: f64,
    params: &AnalyticParams,
    rf: RankingFunction,
    n_q: u64,
    trials: usize,
    seed: u64,
) -> Result<PairwiseResult> {
    rf.validate()?;
    if n_q == 0 || trials == 0 {
        return Err(Error::domain("trials", "need at least one query and one trial"));
    }
    let weak = QueryModel::new(&AnalyticParams { ell, ..*params })?;
    let strong = QueryModel::new(&AnalyticParams {
        ell: ell + delta_ell,
        ..*params
    })?;
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<bool> {
            let a = query_average(&weak, rf, n_q, &mut seed::rng(seed, &[STREAM_PAIR, t as u64, 0]))?;
            let b = query_average(&strong, rf, n_q, &mut seed::rng(seed, &[STREAM_PAIR, t as u64, 1]))?;
            Ok(a >= b)
        })
        .collect::<Result<_>>()?;
    let inconsistent = outcomes.iter().filter(|&&x| x).count();
    Ok(PairwiseResult {
        probability: inconsistent as f64 / trials as f64,
        inconsistent,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::analytic::{conditioned_expectation, exact_expectation};

    const MRR: RankingFunction = RankingFunction::Mrr;

    fn params(ell: f64, beta: f64, n: u64, n_entity: u64) -> AnalyticParams {
        AnalyticParams::new(ell, beta, n, n_entity).unwrap()
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let first = rest.remove(i);
            for mut p in permutations(&rest) {
                p.insert(0, first);
                out.push(p);
            }
        }
        out
    }

    /// Expected count per query of observed answers with a given
    /// `(positive, positive missing answers, rank)`, by enumerating every
    /// missing/positive assignment and every ordering of both blocks.
    fn enumerate(ell: f64, beta: f64, n: usize, n_entity: usize) -> HashMap<(bool, u64, u64), f64> {
        let mut out = HashMap::new();
        for code in 0..4usize.pow(n as u32) {
            let states: Vec<(bool, bool)> = (0..n).map(|i| ((code >> (2 * i)) & 1 == 1, (code >> (2 * i + 1)) & 1 == 1)).collect();
            if states.iter().all(|s| s.0) {
                continue;
            }
            let w: f64 = states
                .iter()
                .map(|&(miss, pos)| (if miss { beta } else { 1.0 - beta }) * (if pos { ell } else { 1.0 - ell }))
                .product();
            let m_pos = states.iter().filter(|s| s.0 && s.1).count() as u64;
            let pos: Vec<usize> = (0..n).filter(|&i| states[i].1).collect();
            let neg: Vec<usize> = (0..n_entity).filter(|&i| i >= n || !states[i].1).collect();
            let (pp, np) = (permutations(&pos), permutations(&neg));
            let share = w / (pp.len() * np.len()) as f64;
            for p in &pp {
                for q in &np {
                    let order: Vec<usize> = p.iter().chain(q).copied().collect();
                    let mut ahead = 0u64;
                    for &e in &order {
                        let observed = e < n && !states[e].0;
                        if observed {
                            *out.entry((states[e].1, m_pos, ahead + 1)).or_insert(0.0) += share;
                        } else {
                            ahead += 1;
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn joint_ranking_matches_enumeration() {
        let (ell, beta) = (0.6, 0.45);
        let exact = enumerate(ell, beta, 3, 6);
        // Positive observed answers rank uniformly among 1..=m_pos+1.
        for m_pos in 0..3u64 {
            let probs: Vec<f64> = (1..=m_pos + 1).map(|k| exact.get(&(true, m_pos, k)).copied().unwrap_or(0.0)).collect();
            for p in &probs {
                assert!((p - probs[0]).abs() < 1e-12);
            }
            assert!(!exact.contains_key(&(true, m_pos, m_pos + 2)));
        }
        let model = QueryModel::new(&params(ell, beta, 3, 6)).unwrap();
        let draws = 200_000;
        let mut seen: HashMap<(bool, u64, u64), f64> = HashMap::new();
        let mut rng = seed::rng(11, &[]);
        for _ in 0..draws {
            let mut hits = Vec::new();
            model.draw(&mut rng, |pos, rank| hits.push((pos, rank)));
            // The draw does not expose m_pos, so compare the rank marginals.
            for (pos, rank) in hits {
                *seen.entry((pos, 0, rank)).or_insert(0.0) += 1.0 / draws as f64;
            }
        }
        let mut marginal: HashMap<(bool, u64, u64), f64> = HashMap::new();
        for (&(pos, _, rank), &p) in &exact {
            *marginal.entry((pos, 0, rank)).or_insert(0.0) += p;
        }
        for (key, p) in &marginal {
            let q = seen.get(key).copied().unwrap_or(0.0);
            assert!((p - q).abs() < 0.006, "{key:?}: exact {p}, simulated {q}");
        }
        assert_eq!(marginal.len(), seen.len());
    }

    #[test]
    fn perfect_model_on_dense_graph() {
        let p = params(1.0, 1e-9, 43, 14505);
        let mut rng = seed::rng(1, &[]);
        for _ in 0..100 {
            assert_eq!(simulate_query(&p, MRR, &mut rng).unwrap(), Some(1.0));
        }
    }

    #[test]
    fn single_answer_mean_is_strength() {
        let sim = SimConfig {
            params: params(0.6, 0.3, 1, 14505),
            repeats: 20_000,
            root_seed: 3,
        };
        let r = simulate_cell(MRR, &sim).unwrap();
        let e = exact_expectation(&AnalyticParams { n: 0, ..sim.params }, MRR).unwrap();
        let tol = 3.0 * r.std / (r.repeats_used as f64).sqrt() + e.delta_upper;
        assert!((r.mean - e.value).abs() < tol, "{} vs {}", r.mean, e.value);
        // Skips follow P(m = N) = beta.
        assert!((r.skipped as f64 / 20_000.0 - 0.3).abs() < 0.02);
    }

    #[test]
    fn mean_matches_conditioned_form() {
        for (ell, beta, n) in [(0.7, 0.35, 43), (0.5, 0.6, 4)] {
            let sim = SimConfig {
                params: params(ell, beta, n, 14505),
                repeats: 20_000,
                root_seed: 5,
            };
            let r = simulate_cell(MRR, &sim).unwrap();
            let e = conditioned_expectation(&sim.params, MRR).unwrap();
            let tol = 3.0 * r.std / (r.repeats_used as f64).sqrt() + e.delta_upper;
            assert!((r.mean - e.value).abs() < tol, "{ell} {beta} {n}: {} vs {}", r.mean, e.value);
        }
    }

    #[test]
    fn grid_is_deterministic_and_flags_low_repeats() {
        let sim = SimConfig {
            repeats: 50,
            root_seed: 9,
            ..SimConfig::default()
        };
        let a = simulate_grid(&[0.4, 0.8], &[0.2, 0.6], MRR, &sim).unwrap();
        assert_eq!(a, simulate_grid(&[0.4, 0.8], &[0.2, 0.6], MRR, &sim).unwrap());
        assert_eq!(a.len(), 4);
        // A cell does not depend on the rest of the grid.
        let single = simulate_grid(&[0.8], &[0.6], MRR, &sim).unwrap();
        assert_eq!(single[0], a[3]);
        let one = simulate_cell(MRR, &SimConfig { repeats: 1, ..sim }).unwrap();
        assert!(one.low_repeats && one.std == 0.0);
        assert!(simulate_grid(&[], &[0.5], MRR, &sim).is_err());
    }

    #[test]
    fn infeasible_cells_have_no_result() {
        let sim = SimConfig {
            params: AnalyticParams { rho: 0.3, ..SimConfig::default().params },
            repeats: 10,
            root_seed: 1,
        };
        let cells = simulate_grid(&[0.3, 1.0], &[0.8], MRR, &sim).unwrap();
        assert!(cells[1].result.is_none());
        assert!(sim_csv_row(&cells[1], MRR).is_none());
    }

    #[test]
    fn variance_degenerates_for_perfect_model() {
        let v = estimate_variance(&params(1.0, 1e-9, 43, 14505), MRR, 2000, 1).unwrap();
        assert_eq!(v.variance, 0.0);
    }

    #[test]
    fn equal_models_split_evenly() {
        let p = SimConfig::default().params;
        let r = simulate_pairwise_inconsistency(0.7, 0.0, &p, MRR, 20, 10_000, 2).unwrap();
        assert!((r.probability - 0.5).abs() < 0.02, "{}", r.probability);
    }

    #[test]
    fn more_queries_fewer_inversions() {
        let p = SimConfig::default().params;
        let base = simulate_pairwise_inconsistency(0.7, 0.05, &p, MRR, 20, 4000, 3).unwrap();
        let more = simulate_pairwise_inconsistency(0.7, 0.05, &p, MRR, 200, 4000, 3).unwrap();
        assert!(more.probability < base.probability);
    }
}
