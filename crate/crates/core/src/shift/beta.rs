//! β-shifts via the lexicographic (Parry) admissibility criterion.
//!
//! A word is admissible when every suffix is lexicographically at most the
//! prefix of the same length of d*(1), the quasi-greedy β-expansion of 1.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct BetaShift {
    pub beta: f64,
    pub alphabet: usize,
    /// Greedy expansion of 1, truncated to `precision` digits or finite.
    pub greedy: Vec<u8>,
    pub greedy_is_finite: bool,
    /// Quasi-greedy expansion d*(1), `precision` digits.
    pub quasi_greedy: Vec<u8>,
}

impl BetaShift {
    /// Expands 1 in base `beta` with exact rational arithmetic on the f64 value.
    pub fn new(beta: f64, precision: usize) -> Result<BetaShift> {
        if !beta.is_finite() || beta <= 1.0 {
            return invalid(format!("beta must be > 1, got {beta}"));
        }
        if precision == 0 {
            return invalid("beta precision must be positive");
        }
        let b = BigRational::from_float(beta)
            .ok_or_else(|| Error::Invalid(format!("beta {beta} not representable")))?;
        let mut x = BigRational::one();
        let mut greedy = Vec::with_capacity(precision);
        let mut finite = false;
        for _ in 0..precision {
            let y = &b * &x;
            let d = y.floor();
            let digit = d
                .to_integer()
                .to_u8()
                .ok_or_else(|| Error::Invalid("beta digit exceeds 255".into()))?;
            greedy.push(digit);
            x = y - d;
            if x.is_zero() {
                finite = true;
                break;
            }
        }
        let alphabet = BigRational::from_float(beta)
            .map(|r| r.ceil().to_integer())
            .and_then(|c: BigInt| c.to_usize())
            .ok_or_else(|| Error::Invalid("beta too large".into()))?;
        Self::assemble(beta, alphabet, greedy, finite, precision)
    }

    /// Uses a given finite greedy expansion of 1 (e.g. "11" for the golden ratio).
    pub fn from_expansion(digits: Vec<u8>, precision: usize) -> Result<BetaShift> {
        if digits.is_empty() || *digits.last().unwrap() == 0 {
            return invalid("greedy expansion must be nonempty and end in a nonzero digit");
        }
        if digits[0] == 0 {
            return invalid("greedy expansion of 1 must start with a nonzero digit");
        }
        let beta = solve_beta(&digits);
        let alphabet = digits[0] as usize + 1;
        Self::assemble(beta, alphabet, digits, true, precision)
    }

    fn assemble(
        beta: f64,
        alphabet: usize,
        greedy: Vec<u8>,
        finite: bool,
        precision: usize,
    ) -> Result<BetaShift> {
        let quasi_greedy = if finite {
            let mut period = greedy.clone();
            *period.last_mut().unwrap() -= 1;
            period.iter().copied().cycle().take(precision).collect()
        } else {
            greedy.clone()
        };
        Ok(BetaShift {
            beta,
            alphabet,
            greedy,
            greedy_is_finite: finite,
            quasi_greedy,
        })
    }

    pub fn precision(&self) -> usize {
        self.quasi_greedy.len()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.precision() {
            return Err(Error::Horizon {
                requested: n,
                horizon: self.precision(),
            });
        }
        Ok(())
    }

    pub fn is_allowed(&self, w: &[u8]) -> Result<bool> {
        self.check_len(w.len())?;
        Ok((0..w.len()).all(|i| self.suffix_ok(&w[i..])))
    }

    pub fn extends(&self, prefix: &[u8], s: u8) -> Result<bool> {
        self.check_len(prefix.len() + 1)?;
        let mut w = prefix.to_vec();
        w.push(s);
        Ok((0..w.len()).all(|i| self.suffix_ok(&w[i..])))
    }

    fn suffix_ok(&self, u: &[u8]) -> bool {
        u <= &self.quasi_greedy[..u.len()]
    }
}

/// Root β > 1 of 1 = Σ d_i β^{-i}, by bisection.
fn solve_beta(digits: &[u8]) -> f64 {
    let f = |b: f64| {
        digits
            .iter()
            .enumerate()
            .map(|(i, &d)| d as f64 * b.powi(-(i as i32 + 1)))
            .sum::<f64>()
            - 1.0
    };
    let (mut lo, mut hi) = (1.0f64, digits[0] as f64 + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_beta_is_full_shift() {
        let b = BetaShift::new(2.0, 16).unwrap();
        assert_eq!(b.alphabet, 2);
        assert!(b.greedy_is_finite);
        assert_eq!(b.greedy, vec![2]);
        assert!(b.is_allowed(&[1, 1, 1, 1]).unwrap());
    }

    #[test]
    fn golden_expansion_forbids_11() {
        let b = BetaShift::from_expansion(vec![1, 1], 20).unwrap();
        assert!((b.beta - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(&b.quasi_greedy[..4], &[1, 0, 1, 0]);
        assert!(!b.is_allowed(&[0, 1, 1]).unwrap());
        assert!(b.is_allowed(&[1, 0, 1, 0, 0, 1]).unwrap());
    }

    #[test]
    fn one_and_a_half() {
        // 1.5: greedy digits of 1 are 1,0,1,0,0,0,0,0,1,...
        let b = BetaShift::new(1.5, 30).unwrap();
        assert_eq!(b.alphabet, 2);
        assert_eq!(&b.greedy[..5], &[1, 0, 1, 0, 0]);
        assert!(!b.greedy_is_finite);
        assert!(!b.is_allowed(&[1, 1]).unwrap());
        assert!(b.is_allowed(&[1, 0, 1]).unwrap());
        assert!(!b.is_allowed(&[1, 0, 1, 1]).unwrap());
    }

    #[test]
    fn beyond_precision_is_an_error() {
        let b = BetaShift::new(1.5, 4).unwrap();
        assert!(matches!(b.is_allowed(&[0; 5]), Err(Error::Horizon { .. })));
    }

    #[test]
    fn rejects_small_beta() {
        assert!(BetaShift::new(1.0, 8).is_err());
        assert!(BetaShift::new(0.5, 8).is_err());
    }
}
