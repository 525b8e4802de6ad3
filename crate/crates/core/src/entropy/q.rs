//! The subset count Q(n, δ) and the binary-entropy bound on it.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Binary entropy −p ln p − (1−p) ln(1−p) in nats, with 0 ln 0 = 0.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Exact binomial coefficient, or `None` on u128 overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return invalid(format!("delta must lie in (0, 1/2), got {delta}"));
    }
    Ok(())
}

/// Smallest subset size counted by Q(n, δ): sizes j with j > (1−δ)n.
fn min_size(n: u64, delta: f64) -> u64 {
    let threshold = (1.0 - delta) * n as f64;
    (0..=n).find(|&j| j as f64 > threshold).unwrap_or(n + 1)
}

/// Number of subsets A ⊆ {0, …, n−1} with |A| > (1−δ)n.
pub fn q_count(n: u64, delta: f64) -> Result<u128> {
    check_delta(delta)?;
    (min_size(n, delta)..=n).try_fold(0u128, |acc, j| {
        binomial(n, j)
            .and_then(|c| acc.checked_add(c))
            .ok_or_else(|| Error::Budget(format!("Q({n}, {delta}) overflows u128")))
    })
}

/// ln Q(n, δ) computed in log space; usable where the exact count overflows.
pub fn ln_q(n: u64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let ln_fact = |k: u64| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let terms: Vec<f64> = (min_size(n, delta)..=n)
        .map(|j| ln_fact(n) - ln_fact(j) - ln_fact(n - j))
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QBound {
    pub n: u64,
    pub delta: f64,
    pub q: u128,
    pub ln_q_over_n: f64,
    pub bound: f64,
    /// bound − ln Q / n; nonnegative when the inequality holds.
    pub gap: f64,
    pub holds: bool,
}

pub fn q_count_and_bound(n: u64, delta: f64) -> Result<QBound> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let q = q_count(n, delta)?;
    let ln_q_over_n = (q as f64).ln() / n as f64;
    let bound = binary_entropy(delta);
    Ok(QBound {
        n,
        delta,
        q,
        ln_q_over_n,
        bound,
        gap: bound - ln_q_over_n,
        holds: ln_q_over_n <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn subsets_by_enumeration(n: u32, delta: f64) -> u128 {
        (0u64..1 << n)
            .filter(|m| m.count_ones() as f64 > (1.0 - delta) * n as f64)
            .count() as u128
    }

    #[test]
    fn small_cases() {
        assert_eq!(q_count(4, 0.3).unwrap(), 5);
        assert_eq!(q_count(1, 0.4).unwrap(), 1);
        assert_eq!(q_count(20, 0.1).unwrap(), 21);
        let r = q_count_and_bound(4, 0.3).unwrap();
        assert!((r.ln_q_over_n - 5f64.ln() / 4.0).abs() < 1e-15);
        assert!(r.holds && r.gap > 0.0);
    }

    #[test]
    fn rejects_delta_outside_open_half_interval() {
        for d in [0.0, 0.5, 0.7, -0.1, f64::NAN] {
            assert!(q_count(5, d).is_err());
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(10, 3), Some(120));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(60, 30), Some(118264581564861424));
    }

    proptest! {
        #[test]
        fn count_matches_subset_enumeration(n in 1u32..=16, d in 1u32..=9) {
            let delta = d as f64 * 0.05;
            prop_assert_eq!(q_count(n as u64, delta).unwrap(), subsets_by_enumeration(n, delta));
        }

        #[test]
        fn log_form_agrees_with_exact(n in 1u64..=60, d in 1u32..=9) {
            let delta = d as f64 * 0.05;
            let exact = (q_count(n, delta).unwrap() as f64).ln();
            prop_assert!((ln_q(n, delta).unwrap() - exact).abs() < 1e-9);
        }
    }
}
