//! Depth-first search for tracing points.
//!
//! The search fills the tracer left to right with symbols in ascending order,
//! choosing each block's start time (smallest first) when the previous block's
//! own coordinates are complete. Every window d(σ^{s+j}z, σʲx) is checked as
//! soon as its last coordinate is placed, and a branch dies once a block's
//! mismatch count passes its allowance. The first tracer found is therefore
//! the lexicographically least in (start times, symbols) order.

use serde::Serialize;

use super::{mismatch_allowance, start_times, Mode, OrbitTask};
use crate::entropy::EpsScale;
use crate::error::{invalid, Error, Result};
use crate::shift::{ShiftSpace, Word};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tracer {
    pub z: Word,
    pub starts: Vec<usize>,
    /// Exact mode: the gaps t_k = s_{k+1} − s_k − m_k + 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<usize>>,
}

enum Spacing {
    Fixed(Vec<usize>),
    MaxGap(usize),
    Spaced { n: usize, delta1: f64 },
}

struct Engine<'a> {
    space: &'a ShiftSpace,
    m: usize,
    points: &'a [Word],
    lengths: &'a [usize],
    allowance: usize,
    spacing: Spacing,
    budget: u64,
    nodes: u64,
    z: Vec<u8>,
    starts: Vec<usize>,
    mism: Vec<usize>,
}

impl Engine<'_> {
    fn candidates(&self, b: usize, p: usize) -> Vec<usize> {
        if b == 0 {
            return vec![0];
        }
        let prev = self.starts[b - 1];
        match &self.spacing {
            Spacing::Fixed(s) => vec![s[b]],
            Spacing::MaxGap(max) => (1..=*max).map(|t| p + t - 1).collect(),
            Spacing::Spaced { n, delta1 } => {
                let upper = *n as f64 * (1.0 + delta1);
                (*n..)
                    .take_while(|&d| (d as f64) < upper)
                    .map(|d| prev + d)
                    .collect()
            }
        }
    }

    fn end(&self) -> usize {
        self.starts
            .iter()
            .zip(self.lengths)
            .map(|(s, l)| s + l + self.m - 1)
            .max()
            .unwrap_or(0)
    }

    /// Records the windows completed by the symbol at `p`; false if a block
    /// exceeds its allowance. Pushes touched blocks onto `touched`.
    fn check(&mut self, p: usize, touched: &mut Vec<usize>) -> bool {
        let m = self.m;
        for (k, &s) in self.starts.iter().enumerate() {
            if p + 1 < s + m {
                continue;
            }
            let j = p + 1 - m - s;
            if j >= self.lengths[k] {
                continue;
            }
            if self.z[s + j..=p] != self.points[k][j..j + m] {
                self.mism[k] += 1;
                touched.push(k);
                if self.mism[k] > self.allowance {
                    return false;
                }
            }
        }
        true
    }

    fn go(&mut self) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget(format!(
                "tracer search exceeded {} nodes",
                self.budget
            )));
        }
        let p = self.z.len();
        let b = self.starts.len();
        let k = self.points.len();
        let block_due = b < k && (b == 0 || p == self.starts[b - 1] + self.lengths[b - 1]);
        if block_due {
            for s in self.candidates(b, p) {
                if s < p {
                    continue;
                }
                self.starts.push(s);
                if self.go()? {
                    return Ok(true);
                }
                self.starts.pop();
            }
            return Ok(false);
        }
        if b == k && p == self.end() {
            return Ok(true);
        }
        for sym in 0..self.space.alphabet() as u8 {
            if !self.space.extends(&self.z, sym)? {
                continue;
            }
            self.z.push(sym);
            let mut touched = Vec::new();
            if self.check(p, &mut touched) && self.go()? {
                return Ok(true);
            }
            for t in touched {
                self.mism[t] -= 1;
            }
            self.z.pop();
        }
        Ok(false)
    }
}

fn run(
    space: &ShiftSpace,
    task: &OrbitTask,
    scale: EpsScale,
    allowance: usize,
    spacing: Spacing,
    node_budget: u64,
) -> Result<Option<Tracer>> {
    let m = scale.m() as usize;
    for (k, (x, &len)) in task.points.iter().zip(&task.lengths).enumerate() {
        if x.len() < len + m - 1 {
            return invalid(format!(
                "point {k} has length {} but needs {}",
                x.len(),
                len + m - 1
            ));
        }
    }
    let exact = allowance == 0 && !matches!(spacing, Spacing::Spaced { .. });
    let mut e = Engine {
        space,
        m,
        points: &task.points,
        lengths: &task.lengths,
        allowance,
        spacing,
        budget: node_budget,
        nodes: 0,
        z: Vec::new(),
        starts: Vec::new(),
        mism: vec![0; task.len()],
    };
    if !e.go()? {
        return Ok(None);
    }
    let gaps = exact.then(|| {
        e.starts
            .windows(2)
            .zip(&task.lengths)
            .map(|(w, l)| w[1] + 1 - w[0] - l)
            .collect()
    });
    Ok(Some(Tracer {
        z: Word::new(e.z),
        starts: e.starts,
        gaps,
    }))
}

/// Searches for an allowed word that traces the task.
///
/// Exact mode needs the task's gaps; approximate mode uses the task's start
/// times when given and otherwise also searches the spaced sequence.
/// Returns `None` when the search space is exhausted.
pub fn find_tracer(
    space: &ShiftSpace,
    task: &OrbitTask,
    scale: EpsScale,
    node_budget: u64,
) -> Result<Option<Tracer>> {
    match task.mode()? {
        Mode::Exact { gaps } => {
            let gaps = gaps.ok_or_else(|| {
                Error::Invalid("exact-mode search needs gaps; use find_gluing_tracer".into())
            })?;
            let starts = start_times(&task.lengths, gaps)?;
            run(space, task, scale, 0, Spacing::Fixed(starts), node_budget)
        }
        Mode::Approximate {
            n,
            delta1,
            delta2,
            starts,
        } => {
            let allowance = mismatch_allowance(n, delta2);
            let spacing = match starts {
                Some(s) => {
                    if !super::is_spaced(s, n, delta1) {
                        return invalid("given start times are not spaced");
                    }
                    Spacing::Fixed(s.to_vec())
                }
                None => Spacing::Spaced { n, delta1 },
            };
            run(space, task, scale, allowance, spacing, node_budget)
        }
    }
}

/// Exact-mode search over all gap sequences with every gap at most `max_gap`.
pub fn find_gluing_tracer(
    space: &ShiftSpace,
    task: &OrbitTask,
    max_gap: usize,
    scale: EpsScale,
    node_budget: u64,
) -> Result<Option<Tracer>> {
    if !matches!(task.mode()?, Mode::Exact { .. }) {
        return invalid("gluing search needs an exact-mode task");
    }
    if max_gap == 0 {
        return invalid("max_gap must be at least 1");
    }
    run(space, task, scale, 0, Spacing::MaxGap(max_gap), node_budget)
}
