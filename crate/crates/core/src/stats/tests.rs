use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest per-sample size for which the rank test is computed exactly.
pub const EXACT_U_MAX_N: usize = 20;
/// Largest discordant count for which McNemar uses the exact binomial.
pub const EXACT_MCNEMAR_MAX: u64 = 25;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatMethod {
    Exact,
    NormalApprox,
}

impl StatMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            StatMethod::Exact => "exact",
            StatMethod::NormalApprox => "normal-approx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Statistic {
    U { u: f64 },
    Discordant { b: u64, c: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub statistic: Statistic,
    /// Two-sided.
    pub p_value: f64,
    pub method: StatMethod,
    pub alpha: f64,
    pub significant: bool,
}

impl StatResult {
    fn new(statistic: Statistic, p_value: f64, method: StatMethod, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            method,
            alpha,
            significant: p_value < alpha,
        }
    }

    /// U for rank tests, b for McNemar.
    pub fn value(&self) -> f64 {
        match self.statistic {
            Statistic::U { u } => u,
            Statistic::Discordant { b, .. } => b as f64,
        }
    }
}

/// Binary F1 with label 1 as the positive class.
pub fn f1_score(y_true: &[u8], y_pred: &[u8]) -> f64 {
    assert_eq!(y_true.len(), y_pred.len(), "f1_score on unequal lengths");
    let (mut tp, mut fp, mut fneg) = (0u64, 0u64, 0u64);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (1, 0) => fneg += 1,
            _ => {}
        }
    }
    let denom = 2 * tp + fp + fneg;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Midranks of the pooled sample, doubled so they stay integral.
fn doubled_midranks(pooled: &[f64]) -> (Vec<u64>, Vec<u64>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1..=j, doubled mean = i + j + 1
        for &o in &order[i..j] {
            ranks[o] = (i + j + 1) as u64;
        }
        ties.push((j - i) as u64);
        i = j;
    }
    (ranks, ties)
}

fn two_sided(le: f64, ge: f64, total: f64) -> f64 {
    (2.0 * le.min(ge) / total).min(1.0)
}

/// Number of size-`n1` subsets of `ranks` reaching each doubled rank sum.
fn rank_sum_counts(ranks: &[u64], n1: usize) -> Vec<f64> {
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // dp[j][s]: subsets of size j with sum s. Counts stay below 2^53.
    let mut dp = vec![vec![0f64; width]; n1 + 1];
    dp[0][0] = 1.0;
    for (seen, &r) in ranks.iter().enumerate() {
        let r = r as usize;
        for j in (1..=n1.min(seen + 1)).rev() {
            let (lo, hi) = dp.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for s in (r..width).rev() {
                if prev[s - r] != 0.0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    dp.pop().unwrap()
}

struct RankSummary {
    ranks: Vec<u64>,
    ties: Vec<u64>,
    r1: u64,
    u: f64,
}

fn rank_summary(a: &[f64], b: &[f64]) -> RankSummary {
    assert!(!a.is_empty() && !b.is_empty(), "Mann-Whitney test on an empty sample");
    let n1 = a.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = doubled_midranks(&pooled);
    let r1: u64 = ranks[..n1].iter().sum();
    let u = r1 as f64 / 2.0 - (n1 * (n1 + 1)) as f64 / 2.0;
    RankSummary { ranks, ties, r1, u }
}

/// Normal approximation with tie-corrected variance and continuity correction.
fn normal_p(s: &RankSummary, n1: usize, n2: usize) -> f64 {
    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let tie_term: f64 = s.ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = f1 * f2 / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((s.u - f1 * f2 / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2)
}

/// Two-sided Mann–Whitney U test of `a` against `b`. The reported U counts
/// pairs where `a` exceeds `b`, ties counting one half.
pub fn mann_whitney_u(a: &[f64], b: &[f64], alpha: f64) -> StatResult {
    let s = rank_summary(a, b);
    let stat = Statistic::U { u: s.u };
    if a.len() <= EXACT_U_MAX_N && b.len() <= EXACT_U_MAX_N {
        let counts = rank_sum_counts(&s.ranks, a.len());
        let obs = s.r1 as usize;
        let le: f64 = counts[..=obs].iter().sum();
        let ge: f64 = counts[obs..].iter().sum();
        let total: f64 = counts.iter().sum();
        return StatResult::new(stat, two_sided(le, ge, total), StatMethod::Exact, alpha);
    }
    StatResult::new(stat, normal_p(&s, a.len(), b.len()), StatMethod::NormalApprox, alpha)
}

/// The large-sample branch regardless of size, for cross-checks.
pub fn mann_whitney_u_approx(a: &[f64], b: &[f64], alpha: f64) -> StatResult {
    let s = rank_summary(a, b);
    let p = normal_p(&s, a.len(), b.len());
    StatResult::new(Statistic::U { u: s.u }, p, StatMethod::NormalApprox, alpha)
}

/// Exact two-sided binomial p for `b` successes out of `b + c` at one half.
pub fn binomial_two_sided(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let k = b.min(c);
    // log-space terms keep large n finite
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut term = ln_half_n.exp();
    let mut tail = term;
    for i in 0..k {
        term *= (n - i) as f64 / (i + 1) as f64;
        tail += term;
    }
    (2.0 * tail).min(1.0)
}

/// McNemar's test on paired predictions. `b` counts rows where A is right
/// and B wrong, `c` the reverse.
pub fn mcnemar(pred_a: &[u8], pred_b: &[u8], y_true: &[u8], alpha: f64) -> Result<StatResult> {
    if pred_a.len() != y_true.len() || pred_b.len() != y_true.len() {
        return Err(Error::Schema(format!(
            "McNemar needs aligned vectors, got {}, {} and {} rows",
            pred_a.len(),
            pred_b.len(),
            y_true.len()
        )));
    }
    let (mut b, mut c) = (0u64, 0u64);
    for ((&pa, &pb), &t) in pred_a.iter().zip(pred_b).zip(y_true) {
        match (pa == t, pb == t) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(mcnemar_counts(b, c, alpha))
}

pub fn mcnemar_counts(b: u64, c: u64, alpha: f64) -> StatResult {
    let stat = Statistic::Discordant { b, c };
    let n = b + c;
    if n <= EXACT_MCNEMAR_MAX {
        return StatResult::new(stat, binomial_two_sided(b, c), StatMethod::Exact, alpha);
    }
    let d = (b as f64 - c as f64).abs() - 1.0;
    let chi2 = d.max(0.0).powi(2) / n as f64;
    // chi-square with one degree of freedom
    let p = erfc((chi2 / 2.0).sqrt());
    StatResult::new(stat, p, StatMethod::NormalApprox, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_examples() {
        assert_eq!(f1_score(&[1, 0, 1], &[1, 0, 1]), 1.0);
        // TP 2, FP 1, FN 1
        let f = f1_score(&[1, 1, 1, 0, 0], &[1, 1, 0, 1, 0]);
        assert!((f - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(f1_score(&[1, 1, 0], &[0, 0, 0]), 0.0);
        assert_eq!(f1_score(&[0, 0], &[0, 0]), 0.0);
    }

    #[test]
    fn identical_samples_are_not_different() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = mann_whitney_u(&a, &a, DEFAULT_ALPHA);
        assert_eq!(r.value(), 12.5);
        assert!(r.p_value >= 0.99);
        assert_eq!(r.method, StatMethod::Exact);
        assert!(!r.significant);
    }

    #[test]
    fn disjoint_triples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], DEFAULT_ALPHA);
        assert_eq!(r.value(), 0.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        let r = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], DEFAULT_ALPHA);
        assert_eq!(r.value(), 9.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn large_disjoint_samples_use_the_approximation() {
        let a: Vec<f64> = (0..50).map(f64::from).collect();
        let b: Vec<f64> = (100..150).map(f64::from).collect();
        let r = mann_whitney_u(&a, &b, DEFAULT_ALPHA);
        assert_eq!(r.method, StatMethod::NormalApprox);
        assert!(r.p_value < 1e-9);
    }

    #[test]
    fn exact_and_approx_agree_at_fifteen() {
        let a: Vec<f64> = (0..15).map(|i| (i * 7 % 15) as f64 + 0.25).collect();
        let b: Vec<f64> = (0..15).map(|i| (i * 4 % 15) as f64 + 3.0).collect();
        let e = mann_whitney_u(&a, &b, DEFAULT_ALPHA);
        let n = mann_whitney_u_approx(&a, &b, DEFAULT_ALPHA);
        assert_eq!(e.method, StatMethod::Exact);
        assert!(e.p_value > 0.01 && e.p_value < 0.5, "{}", e.p_value);
        assert!(
            (e.p_value - n.p_value).abs() / e.p_value < 0.1,
            "{} vs {}",
            e.p_value,
            n.p_value
        );
    }

    #[test]
    fn mcnemar_examples() {
        let r = mcnemar_counts(10, 0, DEFAULT_ALPHA);
        assert!((r.p_value - 0.001953125).abs() < 1e-6);
        assert_eq!(r.method, StatMethod::Exact);
        assert_eq!(mcnemar_counts(5, 5, DEFAULT_ALPHA).p_value, 1.0);
        assert_eq!(mcnemar_counts(0, 0, DEFAULT_ALPHA).p_value, 1.0);
        let p = [1u8, 0, 1, 1];
        assert_eq!(mcnemar(&p, &p, &[1, 1, 0, 1], DEFAULT_ALPHA).unwrap().p_value, 1.0);
        assert!(matches!(mcnemar(&p, &p[..3], &p, DEFAULT_ALPHA), Err(Error::Schema(_))));
        let big = mcnemar_counts(30, 10, DEFAULT_ALPHA);
        assert_eq!(big.method, StatMethod::NormalApprox);
        // (|30 - 10| - 1)^2 / 40 = 9.025
        assert!((big.p_value - 0.002663).abs() < 1e-5, "{}", big.p_value);
    }
}
