//! Tabulated gap functions L : Z⁺ → Z⁺ and their composition for products.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Finite evidence for temperedness (L(n)/n → 0): the supremum of L(k)/k
/// over the upper half of the table stays below `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperedCheck {
    pub horizon: usize,
    /// First n of the checked tail.
    pub index: usize,
    pub threshold: f64,
    pub tail_sup: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapFunction {
    /// table[i] = L(i+1).
    pub table: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tempered: Option<TemperedCheck>,
}

impl GapFunction {
    pub fn from_table(table: Vec<u64>) -> Result<GapFunction> {
        if table.is_empty() {
            return invalid("gap table is empty");
        }
        if table.contains(&0) {
            return invalid("gap function values must be positive");
        }
        if table.windows(2).any(|w| w[1] < w[0]) {
            return invalid("gap function must be nondecreasing");
        }
        Ok(GapFunction {
            table,
            tempered: None,
        })
    }

    pub fn from_fn(horizon: usize, f: impl Fn(usize) -> u64) -> Result<GapFunction> {
        Self::from_table((1..=horizon).map(f).collect())
    }

    pub fn constant(c: u64, horizon: usize) -> Result<GapFunction> {
        Self::from_fn(horizon, |_| c)
    }

    pub fn horizon(&self) -> usize {
        self.table.len()
    }

    pub fn eval(&self, n: usize) -> Result<u64> {
        if n == 0 {
            return invalid("gap functions are defined for n >= 1");
        }
        self.table.get(n - 1).copied().ok_or(Error::Horizon {
            requested: n,
            horizon: self.horizon(),
        })
    }

    /// Records the tempered proxy at `threshold` and returns it.
    pub fn check_tempered(&mut self, threshold: f64) -> TemperedCheck {
        let horizon = self.horizon();
        let index = horizon.div_ceil(2).max(1);
        let tail_sup = (index..=horizon)
            .map(|n| self.table[n - 1] as f64 / n as f64)
            .fold(0.0, f64::max);
        let check = TemperedCheck {
            horizon,
            index,
            threshold,
            tail_sup,
            holds: tail_sup < threshold,
        };
        self.tempered = Some(check.clone());
        check
    }

    pub fn is_tempered(&self) -> bool {
        self.tempered.as_ref().is_some_and(|t| t.holds)
    }
}

/// L(n) = L_X(L_Y(n)) + L_Y(n) + L_X(n) − 1 on every n where all terms are
/// tabulated. The result is flagged tempered iff both inputs are.
pub fn compose_tempered_gap(lx: &GapFunction, ly: &GapFunction) -> Result<GapFunction> {
    let mut table = Vec::new();
    for n in 1..=lx.horizon().min(ly.horizon()) {
        let y = ly.eval(n)?;
        let Ok(xy) = lx.eval(y as usize) else { break };
        table.push(xy + y + lx.eval(n)? - 1);
    }
    if table.is_empty() {
        return Err(Error::Horizon {
            requested: ly.table[0] as usize,
            horizon: lx.horizon(),
        });
    }
    let mut out = GapFunction::from_table(table)?;
    if let (Some(tx), Some(ty)) = (&lx.tempered, &ly.tempered) {
        let mut check = out.check_tempered(tx.threshold.max(ty.threshold));
        check.holds = tx.holds && ty.holds;
        out.tempered = Some(check);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sqrt_ceil(n: usize) -> u64 {
        (1u64..).find(|k| k * k >= n as u64).unwrap()
    }

    fn ln_ceil(n: usize) -> u64 {
        ((n + 1) as f64).ln().ceil() as u64
    }

    #[test]
    fn composition_examples() {
        let lx = GapFunction::from_fn(100, sqrt_ceil).unwrap();
        let ly = GapFunction::from_fn(100, ln_ceil).unwrap();
        let l = compose_tempered_gap(&lx, &ly).unwrap();
        assert_eq!(l.eval(9).unwrap(), 7);
        let one = GapFunction::constant(1, 10).unwrap();
        let c = compose_tempered_gap(&one, &one).unwrap();
        assert!(c.table.iter().all(|&v| v == 2));
    }

    #[test]
    fn horizon_errors() {
        let lx = GapFunction::constant(1, 3).unwrap();
        let ly = GapFunction::constant(5, 10).unwrap();
        assert!(matches!(
            compose_tempered_gap(&lx, &ly),
            Err(Error::Horizon { .. })
        ));
        assert!(matches!(lx.eval(4), Err(Error::Horizon { .. })));
        assert!(GapFunction::from_table(vec![2, 1]).is_err());
    }

    #[test]
    fn tempered_flag_needs_both_inputs() {
        let mut lx = GapFunction::from_fn(4000, sqrt_ceil).unwrap();
        let mut ly = GapFunction::from_fn(4000, ln_ceil).unwrap();
        let mut linear = GapFunction::from_fn(4000, |n| n as u64 / 2 + 1).unwrap();
        assert!(lx.check_tempered(0.1).holds);
        assert!(ly.check_tempered(0.1).holds);
        assert!(!linear.check_tempered(0.1).holds);
        let good = compose_tempered_gap(&lx, &ly).unwrap();
        assert!(good.is_tempered());
        // Ratio bound from the product argument, and its decay at the horizon.
        let h = good.horizon();
        assert!((good.eval(h).unwrap() as f64 / h as f64) < 0.05);
        assert!(!compose_tempered_gap(&lx, &linear).unwrap().is_tempered());
    }

    proptest! {
        #[test]
        fn composed_ratio_splits_into_three_terms(n in 1usize..=2000) {
            let lx = GapFunction::from_fn(2000, sqrt_ceil).unwrap();
            let ly = GapFunction::from_fn(2000, ln_ceil).unwrap();
            let l = compose_tempered_gap(&lx, &ly).unwrap();
            let y = ly.eval(n).unwrap();
            let lhs = l.eval(n).unwrap() as f64 / n as f64;
            let rhs = lx.eval(y as usize).unwrap() as f64 / y as f64 * (y as f64 / n as f64)
                + lx.eval(n).unwrap() as f64 / n as f64
                + y as f64 / n as f64;
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
