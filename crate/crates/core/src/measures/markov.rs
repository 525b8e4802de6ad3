//! Order-one Markov measures on symbol sequences.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CylinderMeasure;
use crate::error::{invalid, Error, Result};
use crate::shift::{Backend, Sft, ShiftSpace, Word};

const ROW_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// A stationary Markov measure: row-stochastic P and its stationary vector π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarkov")]
pub struct MarkovMeasure {
    p: Vec<Vec<f64>>,
    pi: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarkov {
    p: Vec<Vec<f64>>,
    #[serde(default)]
    pi: Option<Vec<f64>>,
}

impl TryFrom<RawMarkov> for MarkovMeasure {
    type Error = Error;

    fn try_from(raw: RawMarkov) -> Result<MarkovMeasure> {
        match raw.pi {
            Some(pi) => MarkovMeasure::with_stationary(raw.p, pi),
            None => MarkovMeasure::from_matrix(raw.p),
        }
    }
}

impl MarkovMeasure {
    /// Validates P and solves for its stationary vector, which must be unique.
    pub fn from_matrix(p: Vec<Vec<f64>>) -> Result<MarkovMeasure> {
        check_stochastic(&p)?;
        let pi = stationary(&p)?;
        Ok(MarkovMeasure { p, pi })
    }

    /// Uses a caller-supplied stationary vector (for reducible P).
    pub fn with_stationary(p: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<MarkovMeasure> {
        check_stochastic(&p)?;
        if pi.len() != p.len() || pi.iter().any(|&x| x < 0.0) {
            return invalid("stationary vector must be a nonnegative vector of the right size");
        }
        if (pi.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
            return invalid("stationary vector must sum to 1");
        }
        let mu = MarkovMeasure { p, pi };
        if mu.stationarity_error() > STATIONARY_TOL {
            return invalid("pi is not stationary for P");
        }
        Ok(mu)
    }

    /// Independent symbols with the given probabilities.
    pub fn bernoulli(probs: &[f64]) -> Result<MarkovMeasure> {
        if probs.is_empty() || probs.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return invalid("Bernoulli probabilities must lie in [0, 1]");
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
            return invalid("Bernoulli probabilities must sum to 1");
        }
        Ok(MarkovMeasure {
            p: vec![probs.to_vec(); probs.len()],
            pi: probs.to_vec(),
        })
    }

    /// Binary Bernoulli measure with P(symbol 1) = p.
    pub fn bernoulli2(p: f64) -> Result<MarkovMeasure> {
        Self::bernoulli(&[1.0 - p, p])
    }

    /// Point mass on the constant sequence `symbol`.
    pub fn fixed_point(alphabet: usize, symbol: u8) -> Result<MarkovMeasure> {
        if symbol as usize >= alphabet {
            return Err(Error::SymbolOutOfRange { symbol, alphabet });
        }
        let mut probs = vec![0.0; alphabet];
        probs[symbol as usize] = 1.0;
        Self::bernoulli(&probs)
    }

    /// Parry (maximal-entropy) measure of a one-step irreducible SFT.
    pub fn parry(sft: &Sft) -> Result<MarkovMeasure> {
        if sft.state_len() != 1 || sft.states().len() != sft.alphabet() {
            return invalid("Parry measure needs a one-step SFT on which every symbol is live");
        }
        let a = sft.transfer_matrix();
        let n = a.nrows();
        // Power iteration on A + I converges for irreducible A, periodic or not.
        let shifted = &a + DMatrix::<f64>::identity(n, n);
        let mut v = DVector::from_element(n, 1.0);
        for _ in 0..100_000 {
            let next = &shifted * &v;
            let next = &next / next.max();
            let diff = (&next - &v).abs().max();
            v = next;
            if diff < 1e-15 {
                break;
            }
        }
        if v.iter().any(|&x| x <= 0.0) {
            return invalid("SFT is not irreducible");
        }
        let lambda = (&a * &v).component_div(&v).mean();
        let p = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)] * v[j] / (lambda * v[i])).collect())
            .collect::<Vec<Vec<f64>>>();
        let p = normalise_rows(p);
        Self::from_matrix(p)
    }

    /// Maximal-entropy Markov measure of a full shift or one-step SFT.
    pub fn max_entropy(space: &ShiftSpace) -> Result<MarkovMeasure> {
        match space.backend() {
            Backend::Full => Self::bernoulli(&vec![1.0 / space.alphabet() as f64; space.alphabet()]),
            Backend::Sft(s) => Self::parry(s),
            _ => invalid("maximal-entropy Markov measure needs a full shift or an SFT"),
        }
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn stationarity_error(&self) -> f64 {
        let n = self.pi.len();
        (0..n)
            .map(|j| ((0..n).map(|i| self.pi[i] * self.p[i][j]).sum::<f64>() - self.pi[j]).abs())
            .fold(0.0, f64::max)
    }

    /// −Σ π_i P_ij ln P_ij in nats.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (i, row) in self.p.iter().enumerate() {
            for &x in row {
                if x > 0.0 {
                    h -= self.pi[i] * x * x.ln();
                }
            }
        }
        h
    }

    /// Whether the symbols of positive mass form one communicating class.
    pub fn is_ergodic(&self) -> bool {
        let support: Vec<usize> = (0..self.pi.len()).filter(|&i| self.pi[i] > 0.0).collect();
        let reach = |start: usize, forward: bool| {
            let mut seen = vec![false; self.pi.len()];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                for &j in &support {
                    let edge = if forward { self.p[i][j] } else { self.p[j][i] };
                    if edge > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen
        };
        let Some(&s) = support.first() else {
            return false;
        };
        let (f, b) = (reach(s, true), reach(s, false));
        support.iter().all(|&i| f[i] && b[i])
    }

    /// Whether every positive transition is an allowed two-symbol word.
    pub fn supported_on(&self, space: &ShiftSpace) -> Result<bool> {
        if space.alphabet() != self.alphabet() {
            return Ok(false);
        }
        for (i, row) in self.p.iter().enumerate() {
            if self.pi[i] == 0.0 {
                continue;
            }
            for (j, &x) in row.iter().enumerate() {
                if x > 0.0 && !space.is_allowed(&[i as u8, j as u8])? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn cylinder(&self, w: &[u8]) -> f64 {
        let Some((&first, rest)) = w.split_first() else {
            return 1.0;
        };
        let mut mass = self.pi[first as usize];
        let mut prev = first as usize;
        for &s in rest {
            mass *= self.p[prev][s as usize];
            prev = s as usize;
        }
        mass
    }

    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Word {
        let draw = |probs: &[f64], rng: &mut R| {
            let r: f64 = rng.random();
            let mut acc = 0.0;
            for (i, &x) in probs.iter().enumerate() {
                acc += x;
                if r < acc {
                    return i as u8;
                }
            }
            probs.iter().rposition(|&x| x > 0.0).unwrap_or(0) as u8
        };
        let mut out = Vec::with_capacity(len);
        if len > 0 {
            out.push(draw(&self.pi, rng));
        }
        while out.len() < len {
            let prev = *out.last().unwrap() as usize;
            out.push(draw(&self.p[prev], rng));
        }
        Word::new(out)
    }

    pub fn sample_seeded(&self, len: usize, seed: u64) -> Word {
        self.sample(len, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// (1−t)·self + t·other, entrywise on P. Both must be irreducible for
    /// the result to have a unique stationary vector.
    pub fn interpolate(&self, other: &MarkovMeasure, t: f64) -> Result<MarkovMeasure> {
        if self.alphabet() != other.alphabet() {
            return invalid("cannot interpolate measures on different alphabets");
        }
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect())
            .collect();
        Self::from_matrix(normalise_rows(p))
    }
}

impl CylinderMeasure for MarkovMeasure {
    fn alphabet(&self) -> usize {
        self.pi.len()
    }

    fn level(&self, k: usize) -> Result<Vec<f64>> {
        let a = self.alphabet();
        let size = a
            .checked_pow(k as u32)
            .filter(|&s| s <= 1 << 26)
            .ok_or_else(|| Error::Budget(format!("level {k} over {a} symbols is too large")))?;
        let mut out = vec![0.0; size];
        let mut w = vec![0u8; k];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut r = idx;
            for i in (0..k).rev() {
                w[i] = (r % a) as u8;
                r /= a;
            }
            *slot = self.cylinder(&w);
        }
        Ok(out)
    }
}

fn normalise_rows(p: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    p.into_iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            row.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

fn check_stochastic(p: &[Vec<f64>]) -> Result<()> {
    let n = p.len();
    if n == 0 || n > 256 || p.iter().any(|r| r.len() != n) {
        return invalid("transition matrix must be square with 1..=256 rows");
    }
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return invalid(format!("row {i} has an entry outside [0, 1]"));
        }
        if (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
            return invalid(format!("row {i} does not sum to 1"));
        }
    }
    Ok(())
}

/// Solves πP = π, Σπ = 1.
fn stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(j, i)] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Invalid("stationary vector is not unique; supply pi".into()))?;
    let pi: Vec<f64> = pi
        .iter()
        .map(|&x| if x.abs() < 1e-15 { 0.0 } else { x })
        .collect();
    if pi.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return invalid("stationary vector is not unique; supply pi");
    }
    let mu = MarkovMeasure {
        p: p.to_vec(),
        pi: pi.clone(),
    };
    if mu.stationarity_error() > STATIONARY_TOL {
        return invalid("stationary vector is not unique; supply pi");
    }
    Ok(pi)
}
