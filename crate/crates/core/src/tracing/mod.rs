//! Orbit tracing: verifying and searching for points whose orbits follow a
//! list of prescribed orbit segments, exactly (with gaps) or approximately
//! (with spaced start times and a per-segment mismatch allowance).

pub mod gap;
pub mod gapfn;
pub mod product;
pub mod search;

use serde::{Deserialize, Serialize};

use crate::entropy::{shift_distance, EpsScale};
use crate::error::{invalid, Error, Result};
use crate::shift::{ShiftSpace, Word};

pub use gap::{estimate_gap, GapEstimate, GapProperty, GapWitness, Sampling};
pub use gapfn::{compose_tempered_gap, GapFunction, TemperedCheck};
pub use product::{product_deltas, two_stage_tracer, ProductTracer};
pub use search::{find_gluing_tracer, find_tracer, Tracer};

/// An orbit sequence with its lengths and either a gap sequence (exact mode)
/// or approximate-product parameters (δ₁, δ₂) with optional start times.
///
/// ```json
/// {"points": ["0101", "11"], "lengths": [4, 2], "gaps": [2]}
/// {"points": ["0000", "0110"], "lengths": [4, 4], "delta1": 0.5, "delta2": 0.3}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitTask {
    pub points: Vec<Word>,
    pub lengths: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode<'a> {
    /// Every coordinate within ε, segments placed by gaps t_k ≥ 1.
    Exact { gaps: Option<&'a [usize]> },
    /// Fewer than δ₂n coordinates farther than ε, start times spaced in [n, n(1+δ₁)).
    Approximate {
        n: usize,
        delta1: f64,
        delta2: f64,
        starts: Option<&'a [usize]>,
    },
}

impl OrbitTask {
    pub fn exact(points: Vec<Word>, lengths: Vec<usize>, gaps: Option<Vec<usize>>) -> OrbitTask {
        OrbitTask {
            points,
            lengths,
            gaps,
            starts: None,
            delta1: None,
            delta2: None,
        }
    }

    pub fn approximate(points: Vec<Word>, n: usize, delta1: f64, delta2: f64) -> OrbitTask {
        let k = points.len();
        OrbitTask {
            points,
            lengths: vec![n; k],
            gaps: None,
            starts: None,
            delta1: Some(delta1),
            delta2: Some(delta2),
        }
    }

    pub fn from_json(s: &str) -> Result<OrbitTask> {
        let t: OrbitTask = serde_json::from_str(s)?;
        t.mode()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mode(&self) -> Result<Mode<'_>> {
        if self.points.is_empty() || self.points.len() != self.lengths.len() {
            return invalid("task needs one length per point and at least one point");
        }
        if self.lengths.contains(&0) {
            return invalid("segment lengths must be positive");
        }
        match (self.delta1, self.delta2) {
            (None, None) => {
                if self.starts.is_some() {
                    return invalid("start times are only meaningful in approximate mode");
                }
                if let Some(g) = &self.gaps {
                    if g.len() + 1 < self.points.len() {
                        return invalid("gap sequence shorter than the number of segments minus one");
                    }
                    if g.contains(&0) {
                        return invalid("gaps must be at least 1");
                    }
                }
                Ok(Mode::Exact {
                    gaps: self.gaps.as_deref(),
                })
            }
            (Some(d1), Some(d2)) => {
                if self.gaps.is_some() {
                    return invalid("approximate mode takes start times, not gaps");
                }
                if !(d1 > 0.0 && d1 < 1.0 && d2 > 0.0 && d2 < 1.0) {
                    return invalid("delta1 and delta2 must lie in (0, 1)");
                }
                let n = self.lengths[0];
                if self.lengths.iter().any(|&l| l != n) {
                    return invalid("approximate mode needs equal segment lengths");
                }
                if let Some(s) = &self.starts {
                    if s.len() != self.points.len() {
                        return invalid("need one start time per segment");
                    }
                }
                Ok(Mode::Approximate {
                    n,
                    delta1: d1,
                    delta2: d2,
                    starts: self.starts.as_deref(),
                })
            }
            _ => invalid("approximate mode needs both delta1 and delta2"),
        }
    }
}

/// s₁ = 0 and s_k = Σ_{i<k} (m_i + t_i − 1).
pub fn start_times(lengths: &[usize], gaps: &[usize]) -> Result<Vec<usize>> {
    if lengths.is_empty() || gaps.len() + 1 < lengths.len() {
        return invalid("need a gap after every segment but the last");
    }
    if gaps.contains(&0) || lengths.contains(&0) {
        return invalid("lengths and gaps must be positive");
    }
    let mut s = Vec::with_capacity(lengths.len());
    let mut acc = 0;
    for (k, &m) in lengths.iter().enumerate() {
        s.push(acc);
        if k + 1 < lengths.len() {
            acc += m + gaps[k] - 1;
        }
    }
    Ok(s)
}

/// Whether start times satisfy t₁ = 0 and n ≤ t_{k+1} − t_k < n(1+δ₁).
pub fn is_spaced(starts: &[usize], n: usize, delta1: f64) -> bool {
    starts.first() == Some(&0)
        && starts
            .windows(2)
            .all(|w| w[1] >= w[0] + n && ((w[1] - w[0]) as f64) < n as f64 * (1.0 + delta1))
}

/// Largest mismatch count c with c < δ₂n.
pub fn mismatch_allowance(n: usize, delta2: f64) -> usize {
    let limit = delta2 * n as f64;
    (0..=n).take_while(|&c| (c as f64) < limit).last().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub block: usize,
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub ok: bool,
    pub mode: &'static str,
    pub m: u32,
    pub starts: Vec<usize>,
    /// Approximate mode only: whether the start times are spaced.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spaced: Option<bool>,
    /// Per block, the number of j with d(σ^{s+j}z, σʲx) > ε.
    pub mismatches: Vec<usize>,
    /// Approximate mode only: δ₂n.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch_limit: Option<f64>,
    pub violations: Vec<Violation>,
}

/// Checks whether `z` ε-traces the task.
pub fn verify_trace(space: &ShiftSpace, z: &[u8], task: &OrbitTask, scale: EpsScale) -> Result<TraceReport> {
    let mode = task.mode()?;
    let (starts, limit, spaced) = match mode {
        Mode::Exact { gaps } => {
            let gaps = gaps.ok_or_else(|| Error::Invalid("exact-mode verification needs gaps".into()))?;
            (start_times(&task.lengths, gaps)?, None, None)
        }
        Mode::Approximate {
            n,
            delta1,
            delta2,
            starts,
        } => {
            let starts = starts
                .ok_or_else(|| Error::Invalid("approximate-mode verification needs start times".into()))?;
            (
                starts.to_vec(),
                Some(delta2 * n as f64),
                Some(is_spaced(starts, n, delta1)),
            )
        }
    };
    let m = scale.m() as usize;
    let eps = scale.epsilon();
    for (k, (x, &len)) in task.points.iter().zip(&task.lengths).enumerate() {
        if x.len() < len + m - 1 {
            return invalid(format!(
                "point {k} has length {} but needs {}",
                x.len(),
                len + m - 1
            ));
        }
    }
    let need = starts
        .iter()
        .zip(&task.lengths)
        .map(|(s, l)| s + l + m - 1)
        .max()
        .unwrap_or(0);
    if z.len() < need {
        return Err(Error::TooShort { need, got: z.len() });
    }
    if !space.is_allowed(z)? {
        return Err(Error::NotInLanguage(crate::shift::word::render(z)));
    }
    let mut mismatches = Vec::with_capacity(starts.len());
    let mut violations = Vec::new();
    for (k, (&s, x)) in starts.iter().zip(&task.points).enumerate() {
        let mut count = 0;
        for j in 0..task.lengths[k] {
            let d = shift_distance(&z[s + j..s + j + m], &x[j..j + m]);
            if d > eps {
                count += 1;
                violations.push(Violation { block: k, j });
            }
        }
        mismatches.push(count);
    }
    let ok = match limit {
        None => violations.is_empty(),
        Some(l) => spaced == Some(true) && mismatches.iter().all(|&c| (c as f64) < l),
    };
    Ok(TraceReport {
        ok,
        mode: if limit.is_some() { "approximate" } else { "exact" },
        m: scale.m(),
        starts,
        spaced,
        mismatches,
        mismatch_limit: limit,
        violations,
    })
}
