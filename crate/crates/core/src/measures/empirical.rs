//! Empirical measures E(x, n) read off finite words.

use serde::{Deserialize, Serialize};

use super::{dense_index, CylinderMeasure};
use crate::error::{invalid, Error, Result};
use crate::shift::word::check_symbols;

/// Cylinder frequencies of x along n starting positions, to depth K.
///
/// Level k holds (1/n)·|{0 ≤ j < n : x_{j..j+k} = w}| for every word w of
/// length k, indexed lexicographically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    alphabet: usize,
    n: usize,
    depth: usize,
    levels: Vec<Vec<f64>>,
}

impl EmpiricalMeasure {
    /// Requires |x| ≥ n + K − 1 so no window is truncated.
    pub fn new(x: &[u8], n: usize, depth: usize, alphabet: usize) -> Result<EmpiricalMeasure> {
        if n == 0 || depth == 0 {
            return invalid("n and depth must be positive");
        }
        check_symbols(x, alphabet)?;
        let need = n + depth - 1;
        if x.len() < need {
            return Err(Error::TooShort { need, got: x.len() });
        }
        let mut levels = Vec::with_capacity(depth);
        for k in 1..=depth {
            let size = alphabet
                .checked_pow(k as u32)
                .filter(|&s| s <= 1 << 26)
                .ok_or_else(|| Error::Budget(format!("level {k} over {alphabet} symbols is too large")))?;
            let mut level = vec![0.0; size];
            for j in 0..n {
                level[dense_index(&x[j..j + k], alphabet)] += 1.0;
            }
            level.iter_mut().for_each(|v| *v /= n as f64);
            levels.push(level);
        }
        Ok(EmpiricalMeasure {
            alphabet,
            n,
            depth,
            levels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn weight(&self, w: &[u8]) -> Result<f64> {
        if w.is_empty() {
            return Ok(1.0);
        }
        Ok(self.level(w.len())?[dense_index(w, self.alphabet)])
    }
}

impl CylinderMeasure for EmpiricalMeasure {
    fn alphabet(&self) -> usize {
        self.alphabet
    }

    fn level(&self, k: usize) -> Result<Vec<f64>> {
        if k == 0 {
            return Ok(vec![1.0]);
        }
        self.levels.get(k - 1).cloned().ok_or(Error::Horizon {
            requested: k,
            horizon: self.depth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MarkovMeasure;

    #[test]
    fn alternating_word() {
        let x: Vec<u8> = "01010101010".bytes().map(|b| b - b'0').collect();
        let e = EmpiricalMeasure::new(&x, 10, 1, 2).unwrap();
        assert_eq!(e.weight(&[0]).unwrap(), 0.5);
        assert_eq!(e.weight(&[1]).unwrap(), 0.5);
    }

    #[test]
    fn constant_word() {
        let e = EmpiricalMeasure::new(&[0; 8], 7, 2, 2).unwrap();
        assert_eq!(e.weight(&[0, 0]).unwrap(), 1.0);
        assert_eq!(e.weight(&[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn short_words_are_rejected() {
        assert!(matches!(
            EmpiricalMeasure::new(&[0; 5], 5, 2, 2),
            Err(Error::TooShort { need: 6, got: 5 })
        ));
        let e = EmpiricalMeasure::new(&[0; 5], 5, 1, 2).unwrap();
        assert!(matches!(e.level(2), Err(Error::Horizon { .. })));
    }

    #[test]
    fn levels_are_normalised_and_nearly_consistent() {
        let x = MarkovMeasure::bernoulli2(0.3).unwrap().sample_seeded(10_003, 9);
        let e = EmpiricalMeasure::new(&x, 10_000, 4, 2).unwrap();
        for k in 1..=4 {
            assert!((e.level(k).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let (l1, l2) = (e.level(1).unwrap(), e.level(2).unwrap());
        for a in 0..2 {
            // Off by at most one window at the truncation boundary.
            assert!((l1[a] - (l2[2 * a] + l2[2 * a + 1])).abs() <= 1.0 / 10_000.0 + 1e-15);
        }
        assert!((l1[1] - 0.3).abs() < 0.02 && (l1[0] - 0.7).abs() < 0.02);
    }
}
