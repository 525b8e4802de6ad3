//! Separated and spanning counts, entropy estimates, the Q(n, δ) bound and
//! Hamming-separated sets.
//!
//! Points are compared with d(x, y) = 2^{−min{k : x_k ≠ y_k}} and the Bowen
//! metric d_n(x, y) = max_{k<n} d(σᵏx, σᵏy). At scale ε = 2^{−m} two points
//! are (n, ε)-separated exactly when they differ somewhere in their first
//! n+m−1 symbols, and an (n, ε)-ball is an (n+m−1)-cylinder, so the maximal
//! separated and minimal spanning cardinalities both equal |L_{n+m−1}|. The
//! brute-force methods here search the metric directly and are used to check
//! that identity.

pub mod graph;
pub mod hamming;
pub mod q;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::shift::ShiftSpace;
use graph::{min_cover, BitGraph, Bitset};
pub use hamming::{hamming_separated_set, HammingOptions, HammingSet};
pub use q::{binary_entropy, q_count, q_count_and_bound, QBound};

/// Largest n+m−1 accepted by the brute-force separated search.
pub const BRUTE_SEPARATED_LIMIT: usize = 13;
/// Largest n+m−1 accepted by the exact spanning cover.
pub const BRUTE_SPANNING_LIMIT: usize = 9;
/// Extra symbols carried by each brute-force point beyond n+m−1.
const PAD: usize = 1;
const MAX_BRUTE_POINTS: usize = 1 << 14;

/// The scale ε = 2^{−m}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct EpsScale(u32);

impl EpsScale {
    pub fn new(m: u32) -> Result<EpsScale> {
        if m == 0 || m > 52 {
            return invalid(format!("scale m must lie in 1..=52, got {m}"));
        }
        Ok(EpsScale(m))
    }

    pub fn m(self) -> u32 {
        self.0
    }

    pub fn epsilon(self) -> f64 {
        (-(self.0 as f64)).exp2()
    }

    /// Word length n+m−1 that resolves (n, ε)-distances.
    pub fn window(self, n: usize) -> usize {
        n + self.0 as usize - 1
    }
}

impl TryFrom<u32> for EpsScale {
    type Error = Error;
    fn try_from(m: u32) -> Result<EpsScale> {
        EpsScale::new(m)
    }
}

impl From<EpsScale> for u32 {
    fn from(s: EpsScale) -> u32 {
        s.0
    }
}

/// d(x, y) on the common finite horizon; 0 when the words agree there.
pub fn shift_distance(x: &[u8], y: &[u8]) -> f64 {
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(k) => (-(k as f64)).exp2(),
        None => 0.0,
    }
}

/// d_n(x, y) = max_{k<n} d(σᵏx, σᵏy) on the common finite horizon.
pub fn bowen_distance(x: &[u8], y: &[u8], n: usize) -> f64 {
    (0..n.min(x.len()).min(y.len()))
        .map(|k| shift_distance(&x[k..], &y[k..]))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CylinderShortcut,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub n: usize,
    pub m: u32,
    pub count: u128,
    pub method: Method,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub n: usize,
    pub count: u128,
    pub ln_count_over_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub n_max: usize,
    pub m: u32,
    /// ln(count)/n at n_max.
    pub at_n_max: f64,
    /// Least-squares slope of ln(count) against n over [⌈n_max/2⌉, n_max].
    pub slope: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    pub series: Vec<SeriesPoint>,
}

/// Maximal cardinality of an (n, 2^{−m})-separated set.
pub fn separated_count(
    space: &ShiftSpace,
    n: usize,
    scale: EpsScale,
    method: Method,
) -> Result<SeparationReport> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let count = match method {
        Method::CylinderShortcut => space.count_language(scale.window(n))?,
        Method::BruteForce => brute_separated(space, n, scale)? as u128,
    };
    Ok(SeparationReport {
        n,
        m: scale.m(),
        count,
        method,
        budget: space.budget(),
    })
}

/// Minimal cardinality of an (n, 2^{−m})-spanning set.
pub fn spanning_count(space: &ShiftSpace, n: usize, scale: EpsScale) -> Result<u128> {
    if n == 0 {
        return invalid("n must be positive");
    }
    space.count_language(scale.window(n))
}

/// Sample points for the brute-force searches: allowed words of length
/// n+m−1+PAD, packed for fast comparison.
struct Points {
    packed: Vec<u64>,
    bits: u32,
    len: usize,
}

impl Points {
    fn new(space: &ShiftSpace, len: usize) -> Result<Points> {
        let bits = (usize::BITS - (space.alphabet() - 1).leading_zeros()).max(1);
        if bits as usize * len > 64 {
            return invalid("brute-force points do not fit in 64 bits");
        }
        let words = space.language(len)?;
        if words.len() > MAX_BRUTE_POINTS {
            return invalid(format!(
                "brute-force search limited to {MAX_BRUTE_POINTS} points, need {}",
                words.len()
            ));
        }
        let packed = words
            .iter()
            .map(|w| {
                w.iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &s)| acc | (s as u64) << (i as u32 * bits))
            })
            .collect();
        Ok(Points { packed, bits, len })
    }

    /// Bit i set iff the two points differ at coordinate i.
    fn diff_mask(&self, a: usize, b: usize) -> u64 {
        let x = self.packed[a] ^ self.packed[b];
        if self.bits == 1 {
            return x;
        }
        let sym = (1u64 << self.bits) - 1;
        (0..self.len).fold(0, |acc, i| {
            acc | (((x >> (i as u32 * self.bits)) & sym != 0) as u64) << i
        })
    }

    /// d_n = 2^{−e}: e is the least distance from a start k < n to the next
    /// differing coordinate (64 when none is visible).
    fn bowen_exponent(&self, a: usize, b: usize, n: usize) -> u32 {
        let mask = self.diff_mask(a, b);
        (0..n).map(|k| (mask >> k).trailing_zeros()).min().unwrap_or(64)
    }

    fn separated(&self, a: usize, b: usize, n: usize, scale: EpsScale) -> bool {
        // d_n > 2^{-m}
        self.bowen_exponent(a, b, n) < scale.m()
    }
}

fn brute_separated(space: &ShiftSpace, n: usize, scale: EpsScale) -> Result<usize> {
    let window = scale.window(n);
    if window > BRUTE_SEPARATED_LIMIT {
        return invalid(format!(
            "brute-force separated search needs n+m-1 <= {BRUTE_SEPARATED_LIMIT}"
        ));
    }
    let pts = Points::new(space, window + PAD)?;
    let v = pts.packed.len();
    let rows: Vec<Bitset> = (0..v)
        .into_par_iter()
        .map(|a| {
            let mut row = Bitset::new(v);
            for b in 0..v {
                if a != b && pts.separated(a, b, n, scale) {
                    row.insert(b);
                }
            }
            row
        })
        .collect();
    Ok(BitGraph::from_rows(rows).max_clique(space.budget())?.len())
}

/// Minimal spanning cardinality by exact set cover over sample points.
pub fn spanning_count_brute(space: &ShiftSpace, n: usize, scale: EpsScale) -> Result<usize> {
    let window = scale.window(n);
    if n == 0 || window > BRUTE_SPANNING_LIMIT {
        return invalid(format!(
            "exact spanning cover needs 1 <= n and n+m-1 <= {BRUTE_SPANNING_LIMIT}"
        ));
    }
    let pts = Points::new(space, window + PAD)?;
    let v = pts.packed.len();
    let balls: Vec<Bitset> = (0..v)
        .into_par_iter()
        .map(|c| {
            let mut ball = Bitset::new(v);
            for x in 0..v {
                if !pts.separated(c, x, n, scale) {
                    ball.insert(x);
                }
            }
            ball
        })
        .collect();
    min_cover(v, &balls, space.budget())
}

/// Counts ln|L_{n+m−1}|/n for n = 1..=n_max.
pub fn separation_series(space: &ShiftSpace, n_max: usize, scale: EpsScale) -> Result<Vec<SeriesPoint>> {
    (1..=n_max)
        .map(|n| {
            let count = spanning_count(space, n, scale)?;
            Ok(SeriesPoint {
                n,
                count,
                ln_count_over_n: (count as f64).ln() / n as f64,
            })
        })
        .collect()
}

/// Least-squares slope of y against x.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn entropy_estimate(space: &ShiftSpace, n_max: usize, scale: EpsScale) -> Result<EntropyEstimate> {
    if n_max == 0 {
        return invalid("n_max must be positive");
    }
    let series = separation_series(space, n_max, scale)?;
    let at_n_max = series[n_max - 1].ln_count_over_n;
    let lo = n_max.div_ceil(2);
    let slope = if n_max - lo < 1 {
        at_n_max
    } else {
        let tail = &series[lo - 1..];
        let xs: Vec<f64> = tail.iter().map(|p| p.n as f64).collect();
        let ys: Vec<f64> = tail.iter().map(|p| (p.count as f64).ln()).collect();
        ls_slope(&xs, &ys)
    };
    Ok(EntropyEstimate {
        n_max,
        m: scale.m(),
        at_n_max,
        slope,
        reference: space.entropy_reference(),
        series,
    })
}

/// Writes a series as CSV with columns n, count, ln_count_over_n.
pub fn write_series_csv<W: Write>(series: &[SeriesPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "count", "ln_count_over_n"])
        .map_err(|e| Error::Io(e.into()))?;
    for p in series {
        w.write_record([
            p.n.to_string(),
            p.count.to_string(),
            format!("{:.16e}", p.ln_count_over_n),
        ])
        .map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
