//! Binomial pmf/cdf in log space, with compensated sums.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Neumaier's compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// `a * ln(x)` with the convention `0 * ln(0) = 0`.
fn xlogy(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

fn check(n: u64, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", format!("need 0 <= p <= 1, got {p}")));
    }
    if n > super::MAX_N {
        return Err(Error::domain("n", format!("n = {n} exceeds {}", super::MAX_N)));
    }
    Ok(())
}

pub(crate) fn ln_pmf(n: u64, p: f64, k: u64) -> f64 {
    ln_binomial(n, k) + xlogy(k as f64, p) + xlogy((n - k) as f64, 1.0 - p)
}

/// `P(X = k)` for `k = 0..=n`.
pub(crate) fn pmf_table(n: u64, p: f64) -> Vec<f64> {
    (0..=n).map(|k| ln_pmf(n, p, k).exp()).collect()
}

/// `P(X > k)` for `k = 0..=n`, accumulated from the upper tail.
pub(crate) fn survival_table(n: u64, p: f64) -> Vec<f64> {
    let pmf = pmf_table(n, p);
    let mut out = vec![0.0; pmf.len()];
    let mut acc = CompensatedSum::default();
    for k in (0..pmf.len()).rev() {
        out[k] = acc.value().min(1.0);
        acc.add(pmf[k]);
    }
    out
}

/// `P(X <= k)` for `X ~ B(n, p)`.
pub fn binom_cdf(n: u64, p: f64, k: u64) -> Result<f64> {
    check(n, p)?;
    if k > n {
        return Err(Error::domain("k", format!("need k <= n, got k = {k}, n = {n}")));
    }
    if k == n {
        return Ok(1.0);
    }
    let mut acc = CompensatedSum::default();
    for j in 0..=k {
        acc.add(ln_pmf(n, p, j).exp());
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// `dP(X <= k)/dp = -C(n, k+1) (k+1) p^k (1-p)^(n-k-1)`.
pub fn binom_cdf_dp(n: u64, p: f64, k: u64) -> Result<f64> {
    check(n, p)?;
    if k > n {
        return Err(Error::domain("k", format!("need k <= n, got k = {k}, n = {n}")));
    }
    if k == n {
        return Ok(0.0);
    }
    let ln = ln_binomial(n, k + 1) + ((k + 1) as f64).ln() + xlogy(k as f64, p) + xlogy((n - k - 1) as f64, 1.0 - p);
    Ok(-ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_edges() {
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(binom_cdf(10, p, 10).unwrap(), 1.0);
        }
        assert_eq!(binom_cdf(10, 0.0, 0).unwrap(), 1.0);
        assert_eq!(binom_cdf(10, 1.0, 9).unwrap(), 0.0);
        assert!((binom_cdf(2, 0.5, 0).unwrap() - 0.25).abs() < 1e-15);
        assert!((binom_cdf(2, 0.5, 1).unwrap() - 0.75).abs() < 1e-15);
        assert!(binom_cdf(3, 1.5, 1).is_err());
        assert!(binom_cdf(3, 0.5, 4).is_err());
    }

    #[test]
    fn cdf_dp_closed_form_at_endpoints() {
        // At p = 0 only k = 0 has a nonzero derivative: -n.
        assert!((binom_cdf_dp(7, 0.0, 0).unwrap() + 7.0).abs() < 1e-12);
        assert_eq!(binom_cdf_dp(7, 0.0, 3).unwrap(), 0.0);
        // At p = 1 only k = n - 1 survives: -n.
        assert!((binom_cdf_dp(7, 1.0, 6).unwrap() + 7.0).abs() < 1e-12);
        assert_eq!(binom_cdf_dp(7, 1.0, 2).unwrap(), 0.0);
        assert_eq!(binom_cdf_dp(7, 0.4, 7).unwrap(), 0.0);
    }

    #[test]
    fn cdf_dp_matches_finite_difference() {
        let (n, p, k, h) = (44, 0.455, 10, 1e-6);
        let fd = (binom_cdf(n, p + h, k).unwrap() - binom_cdf(n, p - h, k).unwrap()) / (2.0 * h);
        let exact = binom_cdf_dp(n, p, k).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-5, "{fd} {exact}");
    }

    #[test]
    fn survival_is_complement() {
        let s = survival_table(30, 0.27);
        for k in 0..=30u64 {
            let c = binom_cdf(30, 0.27, k).unwrap();
            assert!((s[k as usize] + c - 1.0).abs() < 1e-14);
        }
    }
}
