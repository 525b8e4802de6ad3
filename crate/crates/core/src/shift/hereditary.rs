use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Upper bound L(n) on marked symbols in any window of length n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityBound {
    /// L(1), L(2), ... up to the table horizon.
    Table(Vec<u64>),
    Form(BoundForm),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundForm {
    pub form: BoundKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// L(n) = floor(1 + ln n)
    Log,
}

impl DensityBound {
    pub fn log() -> Self {
        DensityBound::Form(BoundForm { form: BoundKind::Log })
    }

    pub fn eval(&self, n: usize) -> Result<u64> {
        assert!(n >= 1);
        match self {
            DensityBound::Table(t) => t.get(n - 1).copied().ok_or(Error::Horizon {
                requested: n,
                horizon: t.len(),
            }),
            DensityBound::Form(BoundForm { form: BoundKind::Log }) => Ok(floor_one_plus_ln(n)),
        }
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            DensityBound::Table(t) => Some(t.len()),
            DensityBound::Form(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let DensityBound::Table(t) = self {
            if t.is_empty() {
                return invalid("density bound table is empty");
            }
            if t[0] < 1 {
                return invalid("density bound needs L(1) >= 1");
            }
            if t.windows(2).any(|p| p[1] < p[0]) {
                return invalid("density bound L must be nondecreasing");
            }
        }
        Ok(())
    }
}

/// floor(1 + ln n) with exact integer boundaries: 1 + #{k >= 1 : e^k <= n}.
pub fn floor_one_plus_ln(n: usize) -> u64 {
    let mut k = 0u64;
    while ((k + 1) as f64).exp() <= n as f64 {
        k += 1;
    }
    1 + k
}

/// Words in which every window of length n carries at most L(n) marked symbols.
#[derive(Clone, Debug)]
pub struct Hereditary {
    pub alphabet: usize,
    pub marked: Vec<bool>,
    pub bound: DensityBound,
}

impl Hereditary {
    pub fn new(alphabet: usize, marked: &[u8], bound: DensityBound) -> Result<Hereditary> {
        if alphabet < 1 {
            return invalid("alphabet must be positive");
        }
        bound.validate()?;
        let mut mask = vec![false; alphabet];
        for &m in marked {
            crate::shift::word::check_symbols(&[m], alphabet)?;
            mask[m as usize] = true;
        }
        if mask[0] {
            return invalid("symbol 0 must be unmarked");
        }
        Ok(Hereditary {
            alphabet,
            marked: mask,
            bound,
        })
    }

    pub fn is_allowed(&self, w: &[u8]) -> Result<bool> {
        for end in 1..=w.len() {
            if !self.window_ok(&w[..end])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn extends(&self, prefix: &[u8], s: u8) -> Result<bool> {
        let mut w = prefix.to_vec();
        w.push(s);
        self.window_ok(&w)
    }

    /// Checks every window that ends at the last symbol of `w`.
    fn window_ok(&self, w: &[u8]) -> Result<bool> {
        if let Some(h) = self.bound.horizon() {
            if w.len() > h {
                return Err(Error::Horizon {
                    requested: w.len(),
                    horizon: h,
                });
            }
        }
        let mut count = 0u64;
        for (len, &s) in w.iter().rev().enumerate() {
            if self.marked[s as usize] {
                count += 1;
                if count > self.bound.eval(len + 1)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Smallest M ≤ limit with L(M+margin)·margin < δ₂M, the length beyond which
/// the all-zeros point traces every orbit segment up to a δ₂ fraction.
pub fn zero_trace_threshold(
    bound: &DensityBound,
    margin: usize,
    delta2: f64,
    limit: usize,
) -> Result<Option<usize>> {
    for m in 1..=limit {
        if ((bound.eval(m + margin)? * margin as u64) as f64) < delta2 * m as f64 {
            return Ok(Some(m));
        }
    }
    Ok(None)
}
