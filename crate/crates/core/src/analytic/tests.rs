use super::*;

const MRR: RankingFunction = RankingFunction::Mrr;

fn params(ell: f64, beta: f64, n: u64) -> AnalyticParams {
    AnalyticParams::new(ell, beta, n, 14505).unwrap()
}

fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn pmf(n: u64, p: f64, k: u64) -> f64 {
    choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Value of the queried answer when `m` other answers are missing.
fn g(m: u64, ell1: f64, ell2: f64, rf: RankingFunction) -> f64 {
    (0..=m)
        .map(|j| pmf(m, ell1, j) * (1..=j + 1).map(|k| rf.value(k)).sum::<f64>() / (j + 1) as f64)
        .sum::<f64>()
        * ell2
}

/// Sum over the number of missing answers, evaluated directly.
fn m_sum(ell: f64, beta: f64, n: u64, rf: RankingFunction) -> f64 {
    (0..=n).map(|m| pmf(n, beta, m) * g(m, ell, ell, rf)).sum()
}

fn harmonic(n: u64) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

fn all_metrics() -> [RankingFunction; 5] {
    [MRR, RankingFunction::HitsAtK(1), RankingFunction::HitsAtK(10), RankingFunction::LogMrr, RankingFunction::PMrr(0.5)]
}

#[test]
fn single_answer_collapse() {
    for ell in [0.1, 0.55, 1.0] {
        let e = exact_expectation(&AnalyticParams::new(ell, 0.4, 0, 10).unwrap(), MRR).unwrap();
        assert!((e.value - ell).abs() < 1e-15);
    }
}

#[test]
fn harmonic_identity_at_full_strength() {
    let e = exact_expectation(&params(1.0, 1.0, 43), MRR).unwrap();
    assert!((e.value - harmonic(44) / 44.0).abs() < 1e-14);
    assert!((e.value - 0.0994).abs() < 1e-4);
}

#[test]
fn matches_direct_m_sum() {
    for rf in all_metrics() {
        for (ell, beta, n) in [(0.7, 0.35, 43), (0.3, 0.8, 12), (0.95, 0.1, 5), (0.5, 0.5, 0)] {
            let e = exact_expectation(&params(ell, beta, n), rf).unwrap().value;
            let o = m_sum(ell, beta, n, rf);
            assert!((e - o).abs() < 1e-12, "{rf} {ell} {beta} {n}: {e} vs {o}");
        }
    }
}

#[test]
fn hits_beyond_answer_count_equals_strength() {
    for n in [0, 5, 43] {
        let p = params(0.63, 0.45, n);
        let rf = RankingFunction::HitsAtK(n + 1);
        assert!((exact_expectation(&p, rf).unwrap().value - 0.63).abs() < 1e-14);
        assert_eq!(expectation_derivative(&p, rf).unwrap(), 1.0);
    }
}

#[test]
fn value_in_unit_interval_and_monotone() {
    for rf in all_metrics() {
        for beta in [0.05, 0.5, 1.0] {
            let mut prev = 0.0;
            for i in 1..=20 {
                let v = exact_expectation(&params(i as f64 / 20.0, beta, 43), rf).unwrap().value;
                assert!((0.0..=1.0).contains(&v));
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
    }
}

#[test]
fn mrr_derivative_example() {
    let d = expectation_derivative(&params(0.7, 0.65, 43), MRR).unwrap();
    let expect = (1.0 - 0.545f64.powi(44)) / (0.7 * 0.65 * 44.0);
    assert!((d - expect).abs() < 1e-15);
    assert!((d - 0.04995).abs() < 1e-5);
}

#[test]
fn derivatives_match_finite_differences() {
    let h = 1e-5;
    for rf in all_metrics() {
        for ell in [0.2, 0.4, 0.6, 0.8, 0.95] {
            for beta in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let p = params(ell, beta, 43);
                let up = exact_expectation(&AnalyticParams { ell: ell + h, ..p }, rf).unwrap().value;
                let down = exact_expectation(&AnalyticParams { ell: ell - h, ..p }, rf).unwrap().value;
                let fd = (up - down) / (2.0 * h);
                let closed = expectation_derivative(&p, rf).unwrap();
                let general = expectation_derivative_general(&p, rf).unwrap();
                // FD loses relative accuracy once the derivative is tiny next to the value.
                assert!((closed - fd).abs() <= 1e-3 * fd.abs() + 1e-9, "{rf} {ell} {beta}: {closed} vs {fd}");
                assert!(((closed - general) / general).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn log_approx_at_full_strength() {
    let a = mrr_log_approx(&params(1.0, 1.0, 43)).unwrap();
    let expect = (45f64.ln() + EULER_GAMMA) / 44.0;
    assert!((a.value - expect).abs() < 1e-15);
    assert!((a.value - 0.099634).abs() < 1e-6);
    let diff = (a.value - harmonic(44) / 44.0).abs();
    assert!(diff <= 1.0 / (2.0 * 44.0 * 44.0));
    assert_eq!(a.approx_error_bound, 1.0 / (2.0 * 44.0 * 44.0));
}

#[test]
fn log_approx_bound_holds_at_default_point() {
    let p = params(0.7, 0.35, 43);
    let a = mrr_log_approx(&p).unwrap();
    let e = exact_expectation(&p, MRR).unwrap();
    assert!((a.value - e.value).abs() <= a.approx_error_bound);
    assert!(!a.nonpositive);
    assert!(mrr_log_approx(&params(0.01, 0.01, 3)).unwrap().nonpositive);
}

#[test]
fn conditional_strength_example() {
    let (l1, l2) = conditional_strengths(0.7, 0.35, 0.3).unwrap();
    assert!((l1 - 0.8874).abs() < 1e-4, "{l1}");
    assert!((l2 - 0.5991).abs() < 1e-4, "{l2}");
    assert!((0.35 * l1 + 0.65 * l2 - 0.7).abs() < 1e-15);
    assert_eq!(conditional_strengths(0.7, 0.35, 0.0).unwrap(), (0.7, 0.7));
    assert!(matches!(conditional_strengths(0.7, 0.35, 0.9), Err(Error::InfeasibleCorrelation { .. })));
    let (low, high) = feasible_rho(0.7, 0.35).unwrap();
    let on_edge = |(a, b): (f64, f64)| [a, b].iter().any(|x| x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12);
    assert!(on_edge(conditional_strengths(0.7, 0.35, high).unwrap()));
    assert!(on_edge(conditional_strengths(0.7, 0.35, low).unwrap()));
}

#[test]
fn correlation_zero_is_bit_exact() {
    for rf in all_metrics() {
        for (ell, beta) in [(0.7, 0.35), (1.0, 1.0), (0.3, 0.8)] {
            let p = params(ell, beta, 43);
            let c = correlated_expectation(&p, rf).unwrap();
            assert_eq!(c.exact, exact_expectation(&p, rf).unwrap());
            if rf == MRR {
                assert_eq!(c.approx.unwrap(), mrr_log_approx(&p).unwrap());
            } else {
                assert!(c.approx.is_none());
            }
        }
    }
}

#[test]
fn correlated_matches_direct_sum() {
    let p = params(0.7, 0.35, 20).with_rho(0.3).unwrap();
    let c = correlated_expectation(&p, MRR).unwrap();
    let direct: f64 = (0..=20).map(|m| pmf(20, 0.35, m) * g(m, c.ell1, c.ell2, MRR)).sum();
    assert!((c.exact.value - direct).abs() < 1e-12);
    let approx = c.approx.unwrap();
    assert!((approx.value - c.exact.value).abs() <= approx.approx_error_bound);
}

#[test]
fn correlated_zero_missing_strength() {
    let (low, _) = feasible_rho(0.7, 0.35).unwrap();
    let p = AnalyticParams { rho: low, ..params(0.7, 0.35, 43) };
    let c = correlated_expectation(&p, MRR).unwrap();
    if c.ell1 == 0.0 {
        assert_eq!(c.exact.value, c.ell2);
        assert!(c.approx.is_none());
    }
}

#[test]
fn rho_condition_example() {
    let p = params(0.7, 0.65, 43);
    assert!(rho_condition_holds(&p));
    let lhs: f64 = 0.7 * 0.65 * 45.0;
    let rhs = (0.35 + (0.35f64 * 0.65 * 0.3 / 0.7).sqrt() - EULER_GAMMA).exp();
    assert!((lhs - 20.475).abs() < 1e-12);
    assert!((rhs - 1.089).abs() < 1e-3, "{rhs}");
    // ell1 = 0 at the lower end of the feasible interval for this point.
    let (low, _) = feasible_rho(0.2, 0.5).unwrap();
    let q = AnalyticParams { rho: low, ..params(0.2, 0.5, 43) };
    assert_eq!(conditional_strengths(0.2, 0.5, low).unwrap().0, 0.0);
    assert!(!rho_condition_holds(&q));
    assert!(!rho_condition_holds(&params(1.0, 0.5, 43)));
}

#[test]
fn rho_condition_implies_decrease() {
    for ell in [0.3, 0.5, 0.7, 0.9] {
        for beta in [0.2, 0.4, 0.6, 0.8] {
            let (low, high) = feasible_rho(ell, beta).unwrap();
            let mut rho = (low * 100.0).ceil() / 100.0;
            while rho + 0.01 <= high {
                let p = AnalyticParams { rho, ..params(ell, beta, 43) };
                if rho_condition_holds(&p) {
                    let here = correlated_expectation(&p, MRR).unwrap().approx.unwrap().value;
                    let next = correlated_expectation(&AnalyticParams { rho: rho + 0.01, ..p }, MRR).unwrap().approx.unwrap().value;
                    assert!(next < here, "{ell} {beta} {rho}");
                }
                rho += 0.01;
            }
        }
    }
}

#[test]
fn conditioned_matches_truncated_sum() {
    for rf in all_metrics() {
        for (ell, beta, n) in [(0.7, 0.35, 3), (0.4, 0.9, 6), (0.9, 0.5, 1)] {
            let c = conditioned_expectation(&params(ell, beta, n), rf).unwrap().value;
            let direct: f64 = (0..n).map(|m| pmf(n, beta, m) * g(m, ell, ell, rf)).sum::<f64>() / (1.0 - beta.powi(n as i32));
            assert!((c - direct).abs() < 1e-12, "{rf} {c} {direct}");
        }
    }
    assert!(conditioned_expectation(&params(0.5, 1.0, 3), MRR).is_err());
}

#[test]
fn delta_upper_is_harmonic_tail() {
    let e = exact_expectation(&AnalyticParams::new(0.6, 0.5, 4, 14).unwrap(), MRR).unwrap();
    assert!((e.delta_upper - 0.4 * harmonic(10) / 10.0).abs() < 1e-15);
    assert_eq!(exact_expectation(&params(1.0, 0.5, 4), MRR).unwrap().delta_upper, 0.0);
}

#[test]
fn inconsistency_limits() {
    let r = inconsistency_probability(0.7, 0.0, 0.35, 43, 1140, 7.4e-3, 7.4e-3).unwrap();
    assert_eq!(r.probability, 0.5);
    let far = inconsistency_probability(0.7, 0.05, 0.35, 43, 10_000_000, 7.4e-3, 7.4e-3).unwrap();
    assert!(far.probability < 1e-12);
    assert!(inconsistency_probability(0.7, 0.05, 0.35, 43, 50, 7.4e-3, 7.4e-3).unwrap().few_queries);
    assert!(!r.few_queries);
    assert!(inconsistency_probability(0.7, 0.05, 0.35, 43, 100, 0.0, 1.0).is_err());
}

#[test]
fn query_bounds() {
    assert_eq!(min_queries_from_c(2.85, 0.05).unwrap(), 1140);
    assert_eq!(min_queries_from_c(2.85, 0.01).unwrap(), 28500);
    let q = min_queries(0.7, 0.05, 0.35, 43, 0.05, 7.4e-3).unwrap();
    let z = 1.6448536269514722;
    let c = 2.0 * (0.35f64 * 0.7 * 44.0 * z).powi(2) * 7.4e-3;
    assert!((q.c - c).abs() < 1e-6 * c);
    assert!((q.c - 4.65).abs() < 0.01, "{}", q.c);
    assert_eq!(q.n_q, min_queries_from_c(q.c, 0.05).unwrap());
    let doubled = min_queries(0.7, 0.05, 0.35, 43, 0.05, 2.0 * 7.4e-3).unwrap();
    assert!((doubled.c - 2.0 * q.c).abs() < 1e-12);
    assert!(min_queries(0.7, 0.05, 0.35, 43, 0.6, 7.4e-3).is_err());
}

#[test]
fn csv_row_shape() {
    let row = AnalyticRow::evaluate(&params(0.7, 0.35, 43), MRR).unwrap();
    assert_eq!(row.csv().split(',').count(), ANALYTIC_CSV_HEADER.split(',').count());
    let hits = AnalyticRow::evaluate(&params(0.7, 0.35, 43), RankingFunction::HitsAtK(3)).unwrap();
    assert!(hits.approx.is_none() && hits.derivative.is_some());
}
