//! Closed forms for the expected sparse metric of a strength-`ell` model on
//! a graph of sparsity `beta`.
//!
//! Model: a query has its queried test answer plus `N` further answers, each
//! missing with probability `beta`. A model marks each true answer positive
//! with probability `ell` and ranks positives ahead of negatives in random
//! order. Filtering removes other test answers, so the queried answer
//! competes only with the positive missing answers. With `X ~ B(N+1, ell beta)`
//!
//! ```text
//! E = 1 / (beta (N+1)) * sum_{k=0..N} P(X > k) / f(k+1)
//! ```
//!
//! plus a tail term `delta` from negative answers ranked among non-answers.

mod binomial;

pub use binomial::{binom_cdf, binom_cdf_dp};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::metrics::RankingFunction;
use binomial::{pmf_table, survival_table, CompensatedSum};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest answer count accepted by the O(N) sums.
pub const MAX_N: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticParams {
    pub ell: f64,
    pub beta: f64,
    /// Answers beyond the queried one.
    pub n: u64,
    pub n_entity: u64,
    pub rho: f64,
}

impl AnalyticParams {
    pub fn new(ell: f64, beta: f64, n: u64, n_entity: u64) -> Result<Self> {
        let p = AnalyticParams {
            ell,
            beta,
            n,
            n_entity,
            rho: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        conditional_strengths(self.ell, self.beta, rho)?;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell > 0.0 && self.ell <= 1.0) {
            return Err(Error::domain("ell", format!("need 0 < ell <= 1, got {}", self.ell)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::domain("beta", format!("need 0 < beta <= 1, got {}", self.beta)));
        }
        if self.n > MAX_N {
            return Err(Error::domain("N", format!("N = {} exceeds {MAX_N}", self.n)));
        }
        if self.n_entity <= self.n {
            return Err(Error::domain("N_entity", format!("need N_entity > N, got {} <= {}", self.n_entity, self.n)));
        }
        if !self.rho.is_finite() {
            return Err(Error::domain("rho", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub value: f64,
    /// Upper bound on the neglected contribution of negative answers.
    pub delta_upper: f64,
    /// Bound on `|exact - value|`; zero for exact forms.
    pub approx_error_bound: f64,
    /// Set when a log approximation is not positive.
    pub nonpositive: bool,
}

fn require_uncorrelated(p: &AnalyticParams) -> Result<()> {
    if p.rho != 0.0 {
        return Err(Error::domain("rho", "use correlated_expectation for rho != 0"));
    }
    Ok(())
}

/// Main term for a queried answer whose competitors are positive with
/// probability `ell1`.
fn main_term(ell1: f64, beta: f64, n: u64, rf: RankingFunction) -> f64 {
    let surv = survival_table(n + 1, ell1 * beta);
    let mut acc = CompensatedSum::default();
    for (k, s) in surv.iter().take(n as usize + 1).enumerate() {
        let w = rf.value(k as u64 + 1);
        if w == 0.0 {
            break;
        }
        acc.add(s * w);
    }
    (acc.value() / (beta * (n + 1) as f64)).clamp(0.0, 1.0)
}

/// `(1 - ell) * (1/M) * sum_{k=1..M} 1/f(k)` with `M = N_entity - N`: the
/// mean metric of a negative answer placed uniformly among `M` slots, which
/// bounds its contribution from above when no positive answer precedes it.
fn negative_tail(ell_neg: f64, n: u64, n_entity: u64, rf: RankingFunction) -> f64 {
    let m = n_entity - n;
    let mut acc = CompensatedSum::default();
    for k in 1..=m {
        let w = rf.value(k);
        if w == 0.0 {
            break;
        }
        acc.add(w);
    }
    ((1.0 - ell_neg) * acc.value() / m as f64).max(0.0)
}

pub fn exact_expectation(params: &AnalyticParams, rf: RankingFunction) -> Result<ExpectationResult> {
    params.validate()?;
    require_uncorrelated(params)?;
    rf.validate()?;
    Ok(ExpectationResult {
        value: main_term(params.ell, params.beta, params.n, rf),
        delta_upper: negative_tail(params.ell, params.n, params.n_entity, rf),
        approx_error_bound: 0.0,
        nonpositive: false,
    })
}

/// Expectation of the per-query average over observed answers, for a query
/// with `params.n` full test answers that is kept only when at least one of
/// them is observed. This equals the main term with `m` missing answers out
/// of `N`, with the `m = N` case removed and the rest renormalised.
pub fn conditioned_expectation(params: &AnalyticParams, rf: RankingFunction) -> Result<ExpectationResult> {
    params.validate()?;
    rf.validate()?;
    let (ell1, ell2) = conditional_strengths(params.ell, params.beta, params.rho)?;
    let p_none = params.beta.powf(params.n as f64);
    if params.n == 0 || p_none >= 1.0 {
        return Err(Error::domain("N", "no answer can be observed"));
    }
    let base = correlated_exact(ell1, ell2, params.beta, params.n, rf);
    // Term of the main sum where all N other answers are missing.
    let pmf = pmf_table(params.n, ell1);
    let (mut prefix, mut acc) = (0.0, CompensatedSum::default());
    for (j, pj) in pmf.iter().enumerate() {
        prefix += rf.value(j as u64 + 1);
        acc.add(pj * prefix / (j + 1) as f64);
    }
    let all_missing = ell2 * acc.value();
    Ok(ExpectationResult {
        value: ((base - p_none * all_missing) / (1.0 - p_none)).clamp(0.0, 1.0),
        delta_upper: negative_tail(ell2, params.n, params.n_entity, rf),
        approx_error_bound: 0.0,
        nonpositive: false,
    })
}

/// `dE/d ell`. MRR and Hits@K use their closed forms; other metrics use
/// `1/(ell beta (N+1)) * E[g(X)]`, `g(r) = r / f(r)`, `X ~ B(N+1, ell beta)`.
pub fn expectation_derivative(params: &AnalyticParams, rf: RankingFunction) -> Result<f64> {
    params.validate()?;
    require_uncorrelated(params)?;
    rf.validate()?;
    let t = params.ell * params.beta;
    let n1 = (params.n + 1) as f64;
    match rf {
        RankingFunction::Mrr => {
            let eps = (n1 * (-t).ln_1p()).exp();
            Ok((1.0 - eps) / (t * n1))
        }
        RankingFunction::HitsAtK(k) => {
            if k > params.n {
                Ok(1.0)
            } else {
                binom_cdf(params.n, t, k - 1)
            }
        }
        _ => Ok(general_derivative(params, rf)),
    }
}

/// The g-expectation form of the derivative, valid for every metric.
pub fn expectation_derivative_general(params: &AnalyticParams, rf: RankingFunction) -> Result<f64> {
    params.validate()?;
    require_uncorrelated(params)?;
    rf.validate()?;
    Ok(general_derivative(params, rf))
}

fn general_derivative(params: &AnalyticParams, rf: RankingFunction) -> f64 {
    let t = params.ell * params.beta;
    let pmf = pmf_table(params.n + 1, t);
    let mut acc = CompensatedSum::default();
    for (r, p) in pmf.iter().enumerate().skip(1) {
        acc.add(r as f64 * rf.value(r as u64) * p);
    }
    acc.value() / (t * (params.n + 1) as f64)
}

fn log_approx_parts(ell1: f64, beta: f64, n: u64) -> (f64, f64) {
    let t = ell1 * beta;
    let n1 = (n + 1) as f64;
    let value = (ell1.ln() + beta.ln() + ((n + 2) as f64).ln() + EULER_GAMMA) / (beta * n1);
    let harmonic = 1.0 / (2.0 * beta * n1 * n1);
    let q = (n1 * (-t).ln_1p()).exp();
    let tail = if q == 0.0 { 0.0 } else { q / (1.0 - q) * (1.0 / t).ln() / (beta * n1) };
    (value, harmonic.max(tail))
}

/// Logarithmic approximation of the MRR expectation,
/// `(ln ell + ln beta + ln(N+2) + gamma) / (beta (N+1))`.
pub fn mrr_log_approx(params: &AnalyticParams) -> Result<ExpectationResult> {
    params.validate()?;
    require_uncorrelated(params)?;
    let (value, bound) = log_approx_parts(params.ell, params.beta, params.n);
    Ok(ExpectationResult {
        value,
        delta_upper: negative_tail(params.ell, params.n, params.n_entity, RankingFunction::Mrr),
        approx_error_bound: bound,
        nonpositive: value <= 0.0,
    })
}

/// Range of `rho` keeping both conditional strengths in `[0, 1]`.
pub fn feasible_rho(ell: f64, beta: f64) -> Result<(f64, f64)> {
    let alpha = 1.0 - beta;
    if !(ell > 0.0 && ell < 1.0) {
        return Err(Error::UndefinedCorrelation("the strength must be strictly between 0 and 1"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::UndefinedCorrelation("the sparsity must be strictly between 0 and 1"));
    }
    let a = (ell * (1.0 - ell) * alpha / beta).sqrt();
    let b = (ell * (1.0 - ell) * beta / alpha).sqrt();
    Ok(((-ell / a).max(-(1.0 - ell) / b), ((1.0 - ell) / a).min(ell / b)))
}

/// Strengths on missing answers (`ell1`) and on test answers (`ell2`) when
/// "missing" and "predicted positive" have correlation `rho`.
pub fn conditional_strengths(ell: f64, beta: f64, rho: f64) -> Result<(f64, f64)> {
    if rho == 0.0 {
        return Ok((ell, ell));
    }
    let (low, high) = feasible_rho(ell, beta)?;
    if !(rho >= low && rho <= high) {
        return Err(Error::InfeasibleCorrelation { rho, low, high });
    }
    let alpha = 1.0 - beta;
    let s = (ell * (1.0 - ell)).sqrt();
    let ell1 = ell + s * (alpha / beta).sqrt() * rho;
    let ell2 = ell - s * (beta / alpha).sqrt() * rho;
    Ok((ell1.clamp(0.0, 1.0), ell2.clamp(0.0, 1.0)))
}

fn correlated_exact(ell1: f64, ell2: f64, beta: f64, n: u64, rf: RankingFunction) -> f64 {
    if ell1 == 0.0 {
        // No missing answer is ever positive: a positive test answer ranks first.
        return ell2 * rf.value(1);
    }
    (ell2 / ell1) * main_term(ell1, beta, n, rf)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelatedExpectation {
    pub ell1: f64,
    pub ell2: f64,
    pub exact: ExpectationResult,
    /// Log approximation, MRR only.
    pub approx: Option<ExpectationResult>,
}

pub fn correlated_expectation(params: &AnalyticParams, rf: RankingFunction) -> Result<CorrelatedExpectation> {
    params.validate()?;
    rf.validate()?;
    let (ell1, ell2) = conditional_strengths(params.ell, params.beta, params.rho)?;
    let delta_upper = negative_tail(ell2, params.n, params.n_entity, rf);
    let exact = ExpectationResult {
        value: correlated_exact(ell1, ell2, params.beta, params.n, rf),
        delta_upper,
        approx_error_bound: 0.0,
        nonpositive: false,
    };
    let approx = (rf == RankingFunction::Mrr && ell1 > 0.0).then(|| {
        let (value, bound) = log_approx_parts(ell1, params.beta, params.n);
        let scale = ell2 / ell1;
        ExpectationResult {
            value: scale * value,
            delta_upper,
            approx_error_bound: scale * bound,
            nonpositive: scale * value <= 0.0,
        }
    });
    Ok(CorrelatedExpectation { ell1, ell2, exact, approx })
}

/// Sufficient condition for the correlated log approximation to decrease
/// in `rho`: `ell1 beta (N+2) >= exp(alpha + sqrt(alpha beta (1-ell)/ell) - gamma)`.
/// False whenever the correlation is undefined or infeasible.
pub fn rho_condition_holds(params: &AnalyticParams) -> bool {
    let (ell, beta) = (params.ell, params.beta);
    if !(ell > 0.0 && ell < 1.0 && beta > 0.0 && beta < 1.0) {
        return false;
    }
    let Ok((ell1, _)) = conditional_strengths(ell, beta, params.rho) else {
        return false;
    };
    let alpha = 1.0 - beta;
    let lhs = ell1 * beta * (params.n + 2) as f64;
    let rhs = (alpha + (alpha * beta * (1.0 - ell) / ell).sqrt() - EULER_GAMMA).exp();
    lhs >= rhs
}

fn std_normal() -> Normal {
    Normal::standard()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Inconsistency {
    pub probability: f64,
    /// The normal approximation behind the formula needs more than 50 queries.
    pub few_queries: bool,
}

/// Probability that a model of strength `ell` reports a higher average MRR
/// over `n_q` queries than one of strength `ell + delta_ell`.
pub fn inconsistency_probability(ell: f64, delta_ell: f64, beta: f64, n: u64, n_q: u64, v1: f64, v2: f64) -> Result<Inconsistency> {
    AnalyticParams::new(ell, beta, n, n + 1)?;
    if !(delta_ell >= 0.0 && ell + delta_ell <= 1.0) {
        return Err(Error::domain("delta_ell", format!("need 0 <= delta_ell <= 1 - ell, got {delta_ell}")));
    }
    if n_q == 0 {
        return Err(Error::domain("N_q", "need at least one query"));
    }
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::domain("V", format!("variances must be positive, got {v1}, {v2}")));
    }
    let z = -(n_q as f64).sqrt() * (delta_ell / ell).ln_1p() / (beta * (n + 1) as f64 * (v1 + v2).sqrt());
    Ok(Inconsistency {
        probability: std_normal().cdf(z),
        few_queries: n_q <= 50,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QueryBound {
    /// `c = 2 (beta ell (N+1) Psi^-1(p))^2 V`.
    pub c: f64,
    pub n_q: u64,
}

/// Fewest queries keeping the inconsistency probability at or below `p`.
pub fn min_queries(ell: f64, delta_ell: f64, beta: f64, n: u64, p: f64, v: f64) -> Result<QueryBound> {
    AnalyticParams::new(ell, beta, n, n + 1)?;
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::domain("p", format!("need 0 < p < 0.5, got {p}")));
    }
    if v.is_nan() || v <= 0.0 {
        return Err(Error::domain("V", format!("variance must be positive, got {v}")));
    }
    let z = std_normal().inverse_cdf(p);
    let c = 2.0 * (beta * ell * (n + 1) as f64 * z).powi(2) * v;
    Ok(QueryBound {
        c,
        n_q: min_queries_from_c(c, delta_ell)?,
    })
}

/// `ceil(c / delta_ell^2)`, ignoring float noise just above an integer.
pub fn min_queries_from_c(c: f64, delta_ell: f64) -> Result<u64> {
    if !(delta_ell > 0.0 && delta_ell.is_finite()) {
        return Err(Error::domain("delta_ell", format!("need delta_ell > 0, got {delta_ell}")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::domain("c", format!("need c >= 0, got {c}")));
    }
    let x = c / (delta_ell * delta_ell);
    Ok((x - 1e-9).ceil().max(0.0) as u64)
}

/// One row of the `analytic` CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub ell: f64,
    pub beta: f64,
    pub n: u64,
    pub rho: f64,
    pub metric: String,
    pub exact: f64,
    pub approx: Option<f64>,
    pub error_bound: Option<f64>,
    pub delta_upper: f64,
    /// `dE/d ell`, reported for `rho = 0` only.
    pub derivative: Option<f64>,
}

pub const ANALYTIC_CSV_HEADER: &str = "ell,beta,n,rho,metric,exact,approx,error_bound,delta_upper,derivative";

impl AnalyticRow {
    pub fn evaluate(params: &AnalyticParams, rf: RankingFunction) -> Result<Self> {
        let c = correlated_expectation(params, rf)?;
        let derivative = if params.rho == 0.0 { Some(expectation_derivative(params, rf)?) } else { None };
        Ok(AnalyticRow {
            ell: params.ell,
            beta: params.beta,
            n: params.n,
            rho: params.rho,
            metric: rf.tag(),
            exact: c.exact.value,
            approx: c.approx.map(|a| a.value),
            error_bound: c.approx.map(|a| a.approx_error_bound),
            delta_upper: c.exact.delta_upper,
            derivative,
        })
    }

    pub fn csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.ell,
            self.beta,
            self.n,
            self.rho,
            self.metric,
            self.exact,
            opt(self.approx),
            opt(self.error_bound),
            self.delta_upper,
            opt(self.derivative)
        )
    }
}

#[cfg(test)]
mod tests;
