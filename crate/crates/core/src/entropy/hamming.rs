//! Hamming-type (M, δ, ε)-separated word sets.

use rayon::prelude::*;
use serde::Serialize;

use super::graph::{BitGraph, Bitset};
use super::{shift_distance, EpsScale};
use crate::error::{invalid, Error, Result};
use crate::shift::{ShiftSpace, Word};

/// Largest M for which the exact maximum is computed.
pub const EXACT_LIMIT: usize = 10;

/// Number of k in 0..len with d(σᵏx, σᵏy) > ε.
pub fn separated_windows(x: &[u8], y: &[u8], len: usize, scale: EpsScale) -> usize {
    let eps = scale.epsilon();
    (0..len)
        .filter(|&k| shift_distance(&x[k..], &y[k..]) > eps)
        .count()
}

/// Whether x and y are (len, δ, ε)-separated: more than δ·len windows apart.
pub fn is_separated(x: &[u8], y: &[u8], len: usize, delta: f64, scale: EpsScale) -> bool {
    separated_windows(x, y, len, scale) as f64 > delta * len as f64
}

pub type WordFilter<'a> = &'a (dyn Fn(&[u8]) -> bool + Sync);

#[derive(Clone, Copy, Default)]
pub struct HammingOptions<'a> {
    /// Also compute the exact maximum size (M ≤ 10 only).
    pub exact: bool,
    /// Restrict candidates, e.g. to words whose empirical measure is near a target.
    pub filter: Option<WordFilter<'a>>,
    pub node_budget: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HammingSet {
    pub m_len: usize,
    pub delta0: f64,
    pub m: u32,
    pub target: usize,
    pub candidates: usize,
    pub words: Vec<Word>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_max: Option<usize>,
}

/// Greedy lexicographic (M, δ₀, 2^{−m})-separated set of words of length M+m−1.
///
/// Errors with [`Error::Infeasible`] when fewer than `target` words are found.
pub fn hamming_separated_set(
    space: &ShiftSpace,
    m_len: usize,
    delta0: f64,
    scale: EpsScale,
    target: usize,
    opts: HammingOptions<'_>,
) -> Result<HammingSet> {
    if m_len == 0 {
        return invalid("M must be positive");
    }
    if !(0.0..1.0).contains(&delta0) {
        return invalid(format!("delta0 must lie in [0, 1), got {delta0}"));
    }
    let lang = space.language(scale.window(m_len))?;
    let candidates: Vec<&Word> = match opts.filter {
        Some(f) => lang.par_iter().filter(|w| f(w)).collect(),
        None => lang.iter().collect(),
    };
    let mut words: Vec<Word> = Vec::new();
    for c in &candidates {
        if words.iter().all(|w| is_separated(w, c, m_len, delta0, scale)) {
            words.push((*c).clone());
        }
    }
    let exact_max = if opts.exact {
        if m_len > EXACT_LIMIT {
            return invalid(format!("exact mode needs M <= {EXACT_LIMIT}"));
        }
        let n = candidates.len();
        let rows: Vec<Bitset> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = Bitset::new(n);
                for j in 0..n {
                    if i != j && is_separated(candidates[i], candidates[j], m_len, delta0, scale) {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        let budget = opts.node_budget.unwrap_or(space.budget());
        Some(BitGraph::from_rows(rows).max_clique(budget)?.len())
    } else {
        None
    };
    if words.len() < target {
        return Err(Error::Infeasible(format!(
            "separated set reached {} of the {target} words required at M={m_len}{}",
            words.len(),
            exact_max
                .map(|e| format!(" (exact maximum {e})"))
                .unwrap_or_default()
        )));
    }
    Ok(HammingSet {
        m_len,
        delta0,
        m: scale.m(),
        target,
        candidates: candidates.len(),
        words,
        exact_max,
    })
}
