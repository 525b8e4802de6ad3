//! Locally constant potentials, Lyapunov exponents and topological pressure.

mod spectrum;

pub use spectrum::{pinf_report, spectrum_solve, Family, PinfReport, SpectrumSolution, Target};

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::EpsScale;
use crate::error::{invalid, Error, Result};
use crate::measures::{dense_index, CylinderMeasure, MarkovMeasure};
use crate::shift::{sft::spectral_radius, Backend, ShiftSpace, Word};

/// Largest transfer graph used for the exact pressure reference.
const REFERENCE_VERTICES: usize = 512;
/// Largest graph Karp's algorithm is run on.
const KARP_VERTICES: usize = 1 << 12;

/// JSON form of a potential: values keyed by words of length `range`.
///
/// ```json
/// {"range": 1, "alphabet": 2, "table": {"0": 0.0, "1": 1.0}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub range: usize,
    pub alphabet: usize,
    pub table: BTreeMap<String, f64>,
    /// Error bounds ε_n ≥ 0 of an asymptotically additive wrapper, n = 1, 2, ….
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<f64>>,
}

/// A locally constant additive potential φ_n(x) = Σ_{k<n} φ(x_k … x_{k+r−1}).
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    range: usize,
    alphabet: usize,
    values: Vec<Option<f64>>,
    errors: Option<Vec<f64>>,
}

impl Potential {
    pub fn from_spec(spec: &PotentialSpec) -> Result<Potential> {
        let PotentialSpec {
            range,
            alphabet,
            ref table,
            ref errors,
        } = *spec;
        if range == 0 || alphabet == 0 {
            return invalid("potential range and alphabet must be positive");
        }
        let size = alphabet
            .checked_pow(range as u32)
            .filter(|&s| s <= 1 << 24)
            .ok_or_else(|| Error::Budget(format!("potential table {alphabet}^{range}")))?;
        let mut values = vec![None; size];
        for (key, &v) in table {
            let w: Word = key.parse()?;
            if w.len() != range {
                return invalid(format!("potential key {key:?} must have length {range}"));
            }
            w.check_alphabet(alphabet)?;
            if !v.is_finite() {
                return invalid(format!("potential value at {key:?} is not finite"));
            }
            values[dense_index(&w, alphabet)] = Some(v);
        }
        if let Some(e) = errors {
            if e.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return invalid("error bounds must be finite and nonnegative");
            }
        }
        Ok(Potential {
            range,
            alphabet,
            values,
            errors: errors.clone(),
        })
    }

    pub fn from_json(s: &str) -> Result<Potential> {
        Potential::from_spec(&serde_json::from_str(s)?)
    }

    /// φ = c · [x starts with `word`].
    pub fn indicator(alphabet: usize, word: &[u8], c: f64) -> Result<Potential> {
        Potential::from_fn(alphabet, word.len(), |w| if w == word { c } else { 0.0 })
    }

    pub fn constant(alphabet: usize, c: f64) -> Result<Potential> {
        Potential::from_fn(alphabet, 1, |_| c)
    }

    pub fn from_fn(alphabet: usize, range: usize, f: impl Fn(&[u8]) -> f64) -> Result<Potential> {
        let size = alphabet
            .checked_pow(range as u32)
            .filter(|&s| s <= 1 << 24)
            .ok_or_else(|| Error::Budget(format!("potential table {alphabet}^{range}")))?;
        let mut table = BTreeMap::new();
        let mut w = vec![0u8; range];
        for idx in 0..size {
            let mut r = idx;
            for i in (0..range).rev() {
                w[i] = (r % alphabet) as u8;
                r /= alphabet;
            }
            table.insert(crate::shift::word::render(&w), f(&w));
        }
        Potential::from_spec(&PotentialSpec {
            range,
            alphabet,
            table,
            errors: None,
        })
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Potential {
        self.errors = Some(errors);
        self
    }

    pub fn to_spec(&self) -> PotentialSpec {
        let mut table = BTreeMap::new();
        let mut w = vec![0u8; self.range];
        for (idx, v) in self.values.iter().enumerate() {
            if let Some(v) = v {
                let mut r = idx;
                for i in (0..self.range).rev() {
                    w[i] = (r % self.alphabet) as u8;
                    r /= self.alphabet;
                }
                table.insert(crate::shift::word::render(&w), *v);
            }
        }
        PotentialSpec {
            range: self.range,
            alphabet: self.alphabet,
            table,
            errors: self.errors.clone(),
        }
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn errors(&self) -> Option<&[f64]> {
        self.errors.as_deref()
    }

    /// φ on a word of length ≥ r (only the first r symbols matter).
    pub fn eval(&self, w: &[u8]) -> Result<f64> {
        if w.len() < self.range {
            return Err(Error::TooShort {
                need: self.range,
                got: w.len(),
            });
        }
        let w = &w[..self.range];
        self.values[dense_index(w, self.alphabet)].ok_or_else(|| {
            Error::Invalid(format!(
                "potential undefined at {}",
                crate::shift::word::render(w)
            ))
        })
    }

    /// Birkhoff sum φ_n on a word of length ≥ n + r − 1.
    pub fn birkhoff(&self, w: &[u8], n: usize) -> Result<f64> {
        let need = n + self.range - 1;
        if w.len() < need {
            return Err(Error::TooShort { need, got: w.len() });
        }
        (0..n).map(|k| self.eval(&w[k..])).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Errors unless φ is defined on every allowed word of length r.
    pub fn check_defined(&self, space: &ShiftSpace) -> Result<()> {
        if space.alphabet() != self.alphabet {
            return invalid("potential and space alphabets differ");
        }
        for w in space.language(self.range)?.iter() {
            self.eval(w)?;
        }
        Ok(())
    }

    /// L with |χ(μ) − χ(ν)| ≤ L · D(μ, ν) for metric depth ≥ r:
    /// the level-r term of D weighs Σ|μ[w] − ν[w]| by 2^{−r}|A|^{−r}.
    pub fn lipschitz_constant(&self) -> f64 {
        self.sup_norm() * (self.range as f64).exp2() * (self.alphabet as f64).powi(self.range as i32)
    }
}

/// χ_φ(μ) = Σ_{|w| = r} μ[w] φ(w).
pub fn lyapunov<M: CylinderMeasure + ?Sized>(mu: &M, phi: &Potential) -> Result<f64> {
    if mu.alphabet() != phi.alphabet {
        return invalid("measure and potential alphabets differ");
    }
    let level = mu.level(phi.range)?;
    let mut chi = 0.0;
    for (idx, &mass) in level.iter().enumerate() {
        if mass > 0.0 {
            let v = phi.values[idx]
                .ok_or_else(|| Error::Invalid("potential undefined on a cylinder of positive mass".into()))?;
            chi += mass * v;
        }
    }
    Ok(chi)
}

/// P_φ(μ) = h_μ + χ_φ(μ).
pub fn measure_pressure(mu: &MarkovMeasure, phi: &Potential) -> Result<f64> {
    Ok(mu.entropy() + lyapunov(mu, phi)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressurePoint {
    pub n: usize,
    /// ln Σ_{w ∈ L_{n+m−1}} e^{φ_n(w)}.
    pub ln_sum: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureReport {
    pub n: usize,
    pub m: u32,
    pub range: usize,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// ln of the spectral radius of the weighted transfer matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure_side: Option<f64>,
    pub series: Vec<PressurePoint>,
}

impl PressureReport {
    pub fn with_measure(mut self, mu: &MarkovMeasure, phi: &Potential) -> Result<PressureReport> {
        self.measure_side = Some(measure_pressure(mu, phi)?);
        Ok(self)
    }
}

/// (1/n) ln Σ e^{φ_n} over allowed (n+m−1)-words, for every length up to n.
///
/// Needs m ≥ r so that φ_n is constant on the cylinders summed over.
pub fn pressure_estimate(
    space: &ShiftSpace,
    phi: &Potential,
    n: usize,
    scale: EpsScale,
) -> Result<PressureReport> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let m = scale.m();
    if (m as usize) < phi.range {
        return invalid(format!(
            "scale m = {m} is below the potential range {}; phi_n is not cylinder-constant",
            phi.range
        ));
    }
    phi.check_defined(space)?;
    let series = (1..=n)
        .into_par_iter()
        .map(|k| {
            let words = space.language(scale.window(k))?;
            let terms = words
                .iter()
                .map(|w| phi.birkhoff(w, k))
                .collect::<Result<Vec<f64>>>()?;
            let ln_sum = log_sum_exp(&terms);
            let value = ln_sum / k as f64;
            let interval = phi.errors().map(|e| {
                let r = e.get(k - 1).copied().unwrap_or(f64::NAN) / k as f64;
                [value - r, value + r]
            });
            Ok(PressurePoint {
                n: k,
                ln_sum,
                value,
                interval,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if series
        .iter()
        .any(|p| p.interval.is_some_and(|[lo, _]| lo.is_nan()))
    {
        return invalid(format!("error bounds must cover every n <= {n}"));
    }
    let last = series.last().expect("n >= 1");
    Ok(PressureReport {
        n,
        m,
        range: phi.range,
        value: last.value,
        interval: last.interval,
        reference: pressure_reference(space, phi)?,
        measure_side: None,
        series,
    })
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Higher-block graph of an SFT on allowed words of length q: u → v when
/// u[1..] = v[..q−1]. Every cycle is a periodic orbit and vice versa.
struct BlockGraph {
    vertices: Vec<Word>,
    succ: Vec<Vec<usize>>,
}

fn block_graph(space: &ShiftSpace, min_len: usize, limit: usize) -> Result<Option<BlockGraph>> {
    let memory = match space.backend() {
        Backend::Full => 1,
        Backend::Sft(s) => s.state_len(),
        _ => return Ok(None),
    };
    let q = min_len.max(memory + 1);
    if space.count_language(q)? > limit as u128 {
        return Ok(None);
    }
    let vertices: Vec<Word> = space.language(q)?.to_vec();
    let index: std::collections::HashMap<&[u8], usize> =
        vertices.iter().enumerate().map(|(i, w)| (&w[..], i)).collect();
    let succ = vertices
        .iter()
        .map(|u| {
            (0..space.alphabet() as u8)
                .filter_map(|s| {
                    let mut v = u[1..].to_vec();
                    v.push(s);
                    index.get(&v[..]).copied()
                })
                .collect()
        })
        .collect();
    Ok(Some(BlockGraph { vertices, succ }))
}

/// Exact P(f, φ) as ln ρ of the weighted transfer matrix, for full shifts
/// and SFTs with a small enough block graph.
pub fn pressure_reference(space: &ShiftSpace, phi: &Potential) -> Result<Option<f64>> {
    let Some(g) = block_graph(space, phi.range, REFERENCE_VERTICES)? else {
        return Ok(None);
    };
    let n = g.vertices.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in g.succ.iter().enumerate() {
        let w = phi.eval(&g.vertices[i])?.exp();
        for &j in row {
            m[(i, j)] = w;
        }
    }
    Ok(Some(spectral_radius(&m).ln()))
}

/// Minimum and maximum of χ_φ over invariant measures: the extreme cycle
/// means of the block graph (Karp's algorithm).
pub fn chi_extremes(space: &ShiftSpace, phi: &Potential) -> Result<(f64, f64)> {
    phi.check_defined(space)?;
    let g = block_graph(space, phi.range, KARP_VERTICES)?.ok_or_else(|| {
        Error::Invalid("cycle means need a full shift or SFT with a small block graph".into())
    })?;
    let weights = g
        .vertices
        .iter()
        .map(|v| phi.eval(v))
        .collect::<Result<Vec<f64>>>()?;
    let min = karp_min_mean(&g.succ, &weights);
    let neg: Vec<f64> = weights.iter().map(|w| -w).collect();
    let max = -karp_min_mean(&g.succ, &neg);
    Ok((min, max))
}

/// Minimum mean cycle weight with vertex weights paid on departure.
fn karp_min_mean(succ: &[Vec<usize>], weight: &[f64]) -> f64 {
    let n = succ.len();
    // d[k][v]: least weight of a k-edge walk ending at v, from any start.
    let mut d: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for k in 1..=n {
        let prev = &d[k - 1];
        let mut next = vec![f64::INFINITY; n];
        for (u, row) in succ.iter().enumerate() {
            if prev[u].is_finite() {
                for &v in row {
                    next[v] = f64::min(next[v], prev[u] + weight[u]);
                }
            }
        }
        d.push(next);
    }
    (0..n)
        .filter(|&v| d[n][v].is_finite())
        .map(|v| {
            (0..n)
                .filter(|&k| d[k][v].is_finite())
                .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> EpsScale {
        EpsScale::new(1).unwrap()
    }

    #[test]
    fn indicator_exponent_is_the_symbol_frequency() {
        let phi = Potential::indicator(2, &[1], 1.0).unwrap();
        let mu = MarkovMeasure::bernoulli2(0.3).unwrap();
        assert!((lyapunov(&mu, &phi).unwrap() - 0.3).abs() < 1e-15);
        let c = Potential::constant(2, -1.5).unwrap();
        assert!((lyapunov(&mu, &c).unwrap() + 1.5).abs() < 1e-15);
    }

    #[test]
    fn pressure_refuses_coarse_scales() {
        let phi = Potential::indicator(2, &[0, 1], 1.0).unwrap();
        assert!(pressure_estimate(&ShiftSpace::full(2), &phi, 4, one()).is_err());
        let two = EpsScale::new(2).unwrap();
        assert!(pressure_estimate(&ShiftSpace::full(2), &phi, 4, two).is_ok());
    }

    #[test]
    fn zero_potential_pressure_is_entropy() {
        let phi = Potential::constant(2, 0.0).unwrap();
        let g = ShiftSpace::golden_mean();
        let r = pressure_estimate(&g, &phi, 12, one()).unwrap();
        assert!((r.value - (g.count_language(12).unwrap() as f64).ln() / 12.0).abs() < 1e-12);
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((r.reference.unwrap() - golden).abs() < 1e-12);
    }

    #[test]
    fn karp_finds_fixed_points_and_two_cycles() {
        let phi = Potential::indicator(2, &[1], 1.0).unwrap();
        assert_eq!(chi_extremes(&ShiftSpace::full(2), &phi).unwrap(), (0.0, 1.0));
        // On the golden mean shift the densest orbit is (01)^∞.
        let (lo, hi) = chi_extremes(&ShiftSpace::golden_mean(), &phi).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"range": 2, "alphabet": 2, "table": {"00": 0.5, "01": 1, "10": -1, "11": 0}}"#;
        let phi = Potential::from_json(json).unwrap();
        assert_eq!(phi.eval(&[1, 0, 1]).unwrap(), -1.0);
        assert_eq!(Potential::from_spec(&phi.to_spec()).unwrap(), phi);
        assert!(Potential::from_json(r#"{"range": 1, "alphabet": 2, "table": {"01": 1}}"#).is_err());
        assert!(Potential::from_json(r#"{"range": 1, "alphabet": 2, "table": {}, "extra": 1}"#).is_err());
    }

    #[test]
    fn partial_tables_are_enough_on_the_language() {
        let json = r#"{"range": 2, "alphabet": 2, "table": {"00": 0, "01": 1, "10": 2}}"#;
        let phi = Potential::from_json(json).unwrap();
        assert!(phi.check_defined(&ShiftSpace::golden_mean()).is_ok());
        assert!(phi.check_defined(&ShiftSpace::full(2)).is_err());
    }
}
