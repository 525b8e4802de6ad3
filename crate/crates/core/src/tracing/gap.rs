//! Empirical estimates of gluing and approximate-product gap constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{find_gluing_tracer, find_tracer};
use super::OrbitTask;
use crate::entropy::EpsScale;
use crate::error::{invalid, Error, Result};
use crate::shift::ShiftSpace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GapProperty {
    /// Smallest M with every task traced using gaps 1 ≤ t_k ≤ M.
    Gluing { max_gap: usize },
    /// Smallest N such that every task with segment length n ∈ [N, n_max]
    /// is approximately traced.
    ApproximateProduct {
        delta1: f64,
        delta2: f64,
        n_min: usize,
        n_max: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub seed: u64,
    /// Random tasks per gluing run, or per segment length in approximate mode.
    pub tasks: usize,
    pub max_segments: usize,
    pub max_segment_len: usize,
    /// Also check every pair of segments of length ≤ this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive_len: Option<usize>,
    pub node_budget: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            seed: 0,
            tasks: 200,
            max_segments: 5,
            max_segment_len: 8,
            exhaustive_len: None,
            node_budget: 1 << 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapWitness {
    pub task: OrbitTask,
    /// Smallest working gap bound (gluing) or `None` if no tracer exists
    /// within the limits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub needed: Option<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthOutcome {
    pub n: usize,
    pub tasks: usize,
    pub traced: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapEstimate {
    pub property: GapProperty,
    pub m: u32,
    pub seed: u64,
    pub node_budget: u64,
    /// `None` when some task could not be traced within the limits.
    pub estimate: Option<usize>,
    pub tasks_checked: usize,
    pub exhaustive: bool,
    /// Tasks that force the estimate up, or that failed outright.
    pub witnesses: Vec<GapWitness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_length: Vec<LengthOutcome>,
}

const MAX_WITNESSES: usize = 8;

fn sample_task(
    space: &ShiftSpace,
    scale: EpsScale,
    lengths: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<crate::shift::Word>> {
    lengths
        .iter()
        .map(|&l| space.sample_word(scale.window(l), rng))
        .collect()
}

/// Smallest M ≤ max_gap with a tracer; Ok(None) if none, Err on budget.
fn needed_gap(
    space: &ShiftSpace,
    task: &OrbitTask,
    max_gap: usize,
    scale: EpsScale,
    budget: u64,
) -> Result<Option<usize>> {
    for gap in 1..=max_gap {
        if find_gluing_tracer(space, task, gap, scale, budget)?.is_some() {
            return Ok(Some(gap));
        }
    }
    Ok(None)
}

pub fn estimate_gap(
    space: &ShiftSpace,
    scale: EpsScale,
    property: &GapProperty,
    sampling: &Sampling,
) -> Result<GapEstimate> {
    if sampling.max_segments == 0 || sampling.max_segment_len == 0 {
        return invalid("sampling needs positive segment count and length");
    }
    match property {
        GapProperty::Gluing { max_gap } => gluing(space, scale, property, *max_gap, sampling),
        GapProperty::ApproximateProduct {
            delta1,
            delta2,
            n_min,
            n_max,
        } => approximate(
            space,
            scale,
            property,
            (*delta1, *delta2),
            (*n_min, *n_max),
            sampling,
        ),
    }
}

fn gluing(
    space: &ShiftSpace,
    scale: EpsScale,
    property: &GapProperty,
    max_gap: usize,
    sampling: &Sampling,
) -> Result<GapEstimate> {
    if max_gap == 0 {
        return invalid("max_gap must be positive");
    }
    let mut tasks = Vec::new();
    if let Some(len) = sampling.exhaustive_len {
        let words: Vec<_> = (1..=len)
            .map(|l| space.language(scale.window(l)).map(|w| (l, w)))
            .collect::<Result<_>>()?;
        for (l1, w1) in &words {
            for (l2, w2) in &words {
                for x in w1.iter() {
                    for y in w2.iter() {
                        tasks.push(OrbitTask::exact(vec![x.clone(), y.clone()], vec![*l1, *l2], None));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    for _ in 0..sampling.tasks {
        let k = rng.random_range(1..=sampling.max_segments);
        let lengths: Vec<usize> = (0..k)
            .map(|_| rng.random_range(1..=sampling.max_segment_len))
            .collect();
        let points = sample_task(space, scale, lengths.clone(), &mut rng)?;
        tasks.push(OrbitTask::exact(points, lengths, None));
    }
    let outcomes: Vec<std::result::Result<Option<usize>, String>> = tasks
        .par_iter()
        .map(
            |t| match needed_gap(space, t, max_gap, scale, sampling.node_budget) {
                Ok(v) => Ok(v),
                Err(Error::Budget(msg)) => Err(msg),
                Err(e) => Err(e.to_string()),
            },
        )
        .collect();
    let mut estimate = Some(1);
    let mut witnesses = Vec::new();
    for (task, outcome) in tasks.iter().zip(&outcomes) {
        match outcome {
            Ok(Some(g)) => {
                if let Some(e) = estimate.as_mut() {
                    if *g > *e {
                        *e = *g;
                        witnesses.retain(|w: &GapWitness| w.needed.is_none());
                        witnesses.push(GapWitness {
                            task: task.clone(),
                            needed: Some(*g),
                            reason: format!("needs a gap of {g}"),
                        });
                    }
                }
            }
            Ok(None) | Err(_) => {
                estimate = None;
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push(GapWitness {
                        task: task.clone(),
                        needed: None,
                        reason: match outcome {
                            Err(msg) => msg.clone(),
                            _ => format!("no tracer with gaps <= {max_gap}"),
                        },
                    });
                }
            }
        }
    }
    if estimate.is_none() {
        witnesses.retain(|w| w.needed.is_none());
    }
    Ok(GapEstimate {
        property: property.clone(),
        m: scale.m(),
        seed: sampling.seed,
        node_budget: sampling.node_budget,
        estimate,
        tasks_checked: tasks.len(),
        exhaustive: sampling.exhaustive_len.is_some(),
        witnesses,
        per_length: Vec::new(),
    })
}

fn approximate(
    space: &ShiftSpace,
    scale: EpsScale,
    property: &GapProperty,
    (delta1, delta2): (f64, f64),
    (n_min, n_max): (usize, usize),
    sampling: &Sampling,
) -> Result<GapEstimate> {
    if n_min == 0 || n_min > n_max {
        return invalid("need 1 <= n_min <= n_max");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut per_length = Vec::new();
    let mut witnesses = Vec::new();
    let mut checked = 0;
    for n in n_min..=n_max {
        let tasks: Vec<OrbitTask> = (0..sampling.tasks)
            .map(|_| {
                let k = rng.random_range(1..=sampling.max_segments);
                let points = sample_task(space, scale, vec![n; k], &mut rng)?;
                Ok(OrbitTask::approximate(points, n, delta1, delta2))
            })
            .collect::<Result<_>>()?;
        let results: Vec<std::result::Result<bool, String>> = tasks
            .par_iter()
            .map(|t| match find_tracer(space, t, scale, sampling.node_budget) {
                Ok(found) => Ok(found.is_some()),
                Err(Error::Budget(msg)) => Err(msg),
                Err(e) => Err(e.to_string()),
            })
            .collect();
        checked += tasks.len();
        let traced = results.iter().filter(|r| matches!(r, Ok(true))).count();
        for (t, r) in tasks.iter().zip(&results) {
            if !matches!(r, Ok(true)) && witnesses.len() < MAX_WITNESSES {
                witnesses.push(GapWitness {
                    task: t.clone(),
                    needed: None,
                    reason: match r {
                        Err(msg) => msg.clone(),
                        _ => format!("no spaced tracer at n={n}"),
                    },
                });
            }
        }
        per_length.push(LengthOutcome {
            n,
            tasks: tasks.len(),
            traced,
        });
    }
    let estimate = per_length
        .iter()
        .rev()
        .take_while(|o| o.traced == o.tasks)
        .last()
        .map(|o| o.n);
    Ok(GapEstimate {
        property: property.clone(),
        m: scale.m(),
        seed: sampling.seed,
        node_budget: sampling.node_budget,
        estimate,
        tasks_checked: checked,
        exhaustive: false,
        witnesses,
        per_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> EpsScale {
        EpsScale::new(1).unwrap()
    }

    fn small() -> Sampling {
        Sampling {
            tasks: 30,
            exhaustive_len: Some(3),
            ..Default::default()
        }
    }

    #[test]
    fn gluing_constants_for_small_spaces() {
        let prop = GapProperty::Gluing { max_gap: 4 };
        let full = estimate_gap(&ShiftSpace::full(2), one(), &prop, &small()).unwrap();
        assert_eq!(full.estimate, Some(1));
        let golden = estimate_gap(&ShiftSpace::golden_mean(), one(), &prop, &small()).unwrap();
        assert_eq!(golden.estimate, Some(2));
        assert_eq!(golden.witnesses.len(), 1);
        assert_eq!(golden.witnesses[0].needed, Some(2));
    }

    #[test]
    fn union_has_cross_component_failures() {
        let prop = GapProperty::Gluing { max_gap: 3 };
        let sampling = Sampling {
            tasks: 0,
            exhaustive_len: Some(1),
            ..Default::default()
        };
        let e = estimate_gap(&ShiftSpace::hereditary_union(), one(), &prop, &sampling).unwrap();
        assert_eq!(e.estimate, None);
        let w = &e.witnesses[0];
        let syms: Vec<u8> = w.task.points.iter().flat_map(|p| p.iter().copied()).collect();
        assert!(syms.contains(&1) && syms.contains(&2));
    }

    #[test]
    fn estimates_are_reproducible() {
        let prop = GapProperty::Gluing { max_gap: 3 };
        let s = Sampling {
            tasks: 20,
            seed: 11,
            ..Default::default()
        };
        let a = estimate_gap(&ShiftSpace::golden_mean(), one(), &prop, &s).unwrap();
        let b = estimate_gap(&ShiftSpace::golden_mean(), one(), &prop, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_shift_has_approximate_product() {
        let prop = GapProperty::ApproximateProduct {
            delta1: 0.2,
            delta2: 0.2,
            n_min: 1,
            n_max: 6,
        };
        let e = estimate_gap(&ShiftSpace::full(2), one(), &prop, &small()).unwrap();
        assert_eq!(e.estimate, Some(1));
        assert_eq!(e.per_length.len(), 6);
    }
}
