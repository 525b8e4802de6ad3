//! Markov and empirical measures, the weak-* metric D on depth-K cylinder
//! marginals, Katok entropy estimates and the Z_{N,δ} membership test.

pub mod empirical;
pub mod markov;

use serde::{Deserialize, Serialize};

use crate::entropy::EpsScale;
use crate::error::{invalid, Error, Result};
use crate::shift::ShiftSpace;
pub use empirical::EmpiricalMeasure;
pub use markov::MarkovMeasure;

/// Default cylinder depth of the weak metric.
pub const DEFAULT_DEPTH: usize = 6;

/// Lexicographic rank of `w` among words of its length.
pub fn dense_index(w: &[u8], alphabet: usize) -> usize {
    w.iter().fold(0, |acc, &s| acc * alphabet + s as usize)
}

/// Anything that can report cylinder masses level by level.
pub trait CylinderMeasure {
    fn alphabet(&self) -> usize;
    /// Masses of all |A|^k cylinders of length k, lexicographically indexed.
    fn level(&self, k: usize) -> Result<Vec<f64>>;
}

/// JSON description of a measure.
///
/// ```json
/// {"kind": "bernoulli", "probs": [0.89, 0.11]}
/// {"kind": "markov", "p": [[0.5, 0.5], [1.0, 0.0]]}
/// {"kind": "max-entropy"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Bernoulli {
        probs: Vec<f64>,
    },
    Markov {
        p: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<Vec<f64>>,
    },
    /// The maximal-entropy measure of the space it is paired with.
    MaxEntropy,
}

impl MeasureSpec {
    pub fn from_json(s: &str) -> Result<MeasureSpec> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn build(&self, space: &ShiftSpace) -> Result<MarkovMeasure> {
        let mu = match self {
            MeasureSpec::Bernoulli { probs } => MarkovMeasure::bernoulli(probs)?,
            MeasureSpec::Markov { p, pi: Some(pi) } => MarkovMeasure::with_stationary(p.clone(), pi.clone())?,
            MeasureSpec::Markov { p, pi: None } => MarkovMeasure::from_matrix(p.clone())?,
            MeasureSpec::MaxEntropy => return MarkovMeasure::max_entropy(space),
        };
        if mu.alphabet() != space.alphabet() {
            return invalid(format!(
                "measure alphabet {} does not match space alphabet {}",
                mu.alphabet(),
                space.alphabet()
            ));
        }
        if !mu.supported_on(space)? {
            return invalid("measure gives positive mass to words outside the language");
        }
        Ok(mu)
    }
}

/// A finite convex combination of Markov measures.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mixture {
    pub parts: Vec<(f64, MarkovMeasure)>,
}

impl Mixture {
    pub fn new(parts: Vec<(f64, MarkovMeasure)>) -> Result<Mixture> {
        if parts.is_empty() || parts.iter().any(|(w, _)| *w < 0.0) {
            return invalid("mixture weights must be nonnegative and nonempty");
        }
        if (parts.iter().map(|(w, _)| w).sum::<f64>() - 1.0).abs() > 1e-12 {
            return invalid("mixture weights must sum to 1");
        }
        let a = parts[0].1.alphabet();
        if parts.iter().any(|(_, m)| m.alphabet() != a) {
            return invalid("mixture components must share an alphabet");
        }
        Ok(Mixture { parts })
    }

    /// Σ w_i h(μ_i), the entropy of the mixture by affinity.
    pub fn entropy(&self) -> f64 {
        self.parts.iter().map(|(w, m)| w * m.entropy()).sum()
    }
}

impl CylinderMeasure for Mixture {
    fn alphabet(&self) -> usize {
        self.parts[0].1.alphabet()
    }

    fn level(&self, k: usize) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = Vec::new();
        for (w, m) in &self.parts {
            let l = m.level(k)?;
            if out.is_empty() {
                out = vec![0.0; l.len()];
            }
            out.iter_mut().zip(l).for_each(|(o, x)| *o += w * x);
        }
        Ok(out)
    }
}

/// D(μ, ν) = Σ_{k=1}^{K} 2^{−k} |A|^{−k} Σ_{|w|=k} |μ[w] − ν[w]|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureMetricConfig {
    pub depth: usize,
    pub alphabet: usize,
}

impl MeasureMetricConfig {
    pub fn new(depth: usize, alphabet: usize) -> Result<MeasureMetricConfig> {
        if depth == 0 || alphabet == 0 {
            return invalid("metric depth and alphabet must be positive");
        }
        Ok(MeasureMetricConfig { depth, alphabet })
    }

    pub fn weight(&self, k: usize) -> f64 {
        (-(k as f64)).exp2() / (self.alphabet as f64).powi(k as i32)
    }

    /// Diameter D* = Σ_k 2^{1−k} |A|^{−k}, attained by two distinct fixed points.
    pub fn diameter(&self) -> f64 {
        (1..=self.depth).map(|k| 2.0 * self.weight(k)).sum()
    }
}

pub fn weak_metric<A, B>(mu: &A, nu: &B, cfg: &MeasureMetricConfig) -> Result<f64>
where
    A: CylinderMeasure + ?Sized,
    B: CylinderMeasure + ?Sized,
{
    if mu.alphabet() != cfg.alphabet || nu.alphabet() != cfg.alphabet {
        return invalid("measure alphabet differs from the metric's");
    }
    let mut d = 0.0;
    for k in 1..=cfg.depth {
        let (a, b) = (mu.level(k)?, nu.level(k)?);
        let l1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        d += cfg.weight(k) * l1;
    }
    Ok(d)
}

/// Closed form of var(2^{−m}) = Σ_{k=m+1}^{K} 2^{1−k} |A|^{−k}: two points
/// within 2^{−m} agree on their first m symbols and may differ right after.
pub fn var_eps_closed_form(scale: EpsScale, cfg: &MeasureMetricConfig) -> f64 {
    (scale.m() as usize + 1..=cfg.depth)
        .map(|k| 2.0 * cfg.weight(k))
        .sum()
}

/// var(ε) = max{D(δ_x, δ_y) : d(x, y) ≤ ε}, maximised over allowed words of
/// length K (point masses only see the first K symbols).
pub fn var_eps(space: &ShiftSpace, scale: EpsScale, cfg: &MeasureMetricConfig) -> Result<f64> {
    let k = cfg.depth;
    let words = space.language(k)?;
    let m = scale.m() as usize;
    let dist = |x: &[u8], y: &[u8]| -> f64 {
        (1..=k)
            .filter(|&j| x[..j] != y[..j])
            .map(|j| 2.0 * cfg.weight(j))
            .sum()
    };
    let mut best: f64 = 0.0;
    // Words sharing the first m symbols are contiguous in lexicographic order.
    let mut start = 0;
    while start < words.len() {
        let key = &words[start][..m.min(k)];
        let end = words[start..]
            .iter()
            .position(|w| &w[..m.min(k)] != key)
            .map_or(words.len(), |p| start + p);
        for i in start..end {
            for j in i + 1..end {
                best = best.max(dist(&words[i], &words[j]));
            }
        }
        start = end;
    }
    Ok(best)
}

/// Masses of all (n+m−1)-cylinders, sorted descending.
fn sorted_masses<M: CylinderMeasure + ?Sized>(mu: &M, len: usize, budget: u64) -> Result<Vec<f64>> {
    let size = (mu.alphabet() as u128).pow(len as u32);
    if size > budget as u128 {
        return Err(Error::Budget(format!("{size} cylinders exceed the budget")));
    }
    let mut masses: Vec<f64> = mu.level(len)?.into_iter().filter(|&x| x > 0.0).collect();
    masses.sort_by(|a, b| b.total_cmp(a));
    Ok(masses)
}

/// ln(r_μ(n, ε, δ))/n, where r is the least number of (n+m−1)-cylinders
/// with total mass > 1 − δ.
pub fn katok_entropy_estimate<M: CylinderMeasure + ?Sized>(
    mu: &M,
    n: usize,
    scale: EpsScale,
    delta: f64,
    budget: u64,
) -> Result<f64> {
    if n == 0 || !(delta > 0.0 && delta < 1.0) {
        return invalid("need n >= 1 and delta in (0, 1)");
    }
    let masses = sorted_masses(mu, scale.window(n), budget)?;
    let mut acc = 0.0;
    for (i, x) in masses.iter().enumerate() {
        acc += x;
        if acc > 1.0 - delta {
            return Ok(((i + 1) as f64).ln() / n as f64);
        }
    }
    Ok((masses.len() as f64).ln() / n as f64)
}

/// Block entropy −(1/n) Σ_{|w|=n} μ[w] ln μ[w].
pub fn block_entropy<M: CylinderMeasure + ?Sized>(mu: &M, n: usize, budget: u64) -> Result<f64> {
    let masses = sorted_masses(mu, n, budget)?;
    Ok(-masses.iter().map(|&x| x * x.ln()).sum::<f64>() / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZMembership {
    pub member: bool,
    pub n: usize,
    pub delta: f64,
    pub horizon: usize,
    /// max_k D(E(σᵏx, N), μ) over the checked shifts.
    pub max_distance: f64,
    /// First shift k with distance above δ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<usize>,
}

/// Whether D(E(σᵏx, N), μ) ≤ δ for every 0 ≤ k ≤ horizon.
pub fn z_membership<M: CylinderMeasure + ?Sized>(
    space: &ShiftSpace,
    x: &[u8],
    n: usize,
    delta: f64,
    mu: &M,
    horizon: usize,
    cfg: &MeasureMetricConfig,
) -> Result<ZMembership> {
    let need = horizon + n + cfg.depth - 1;
    if x.len() < need {
        return Err(Error::TooShort { need, got: x.len() });
    }
    if !space.is_allowed(x)? {
        return Err(Error::NotInLanguage(crate::shift::word::render(x)));
    }
    let mut max_distance: f64 = 0.0;
    let mut first_failure = None;
    for k in 0..=horizon {
        let e = EmpiricalMeasure::new(&x[k..], n, cfg.depth, cfg.alphabet)?;
        let d = weak_metric(&e, mu, cfg)?;
        max_distance = max_distance.max(d);
        if d > delta && first_failure.is_none() {
            first_failure = Some(k);
        }
    }
    Ok(ZMembership {
        member: first_failure.is_none(),
        n,
        delta,
        horizon,
        max_distance,
        first_failure,
    })
}

/// The finite-n bound δ + N·D*/n on D(E(x, n), μ) for members of Z_{N,δ}.
pub fn measclose_bound(delta: f64, big_n: usize, diameter: f64, n: usize) -> f64 {
    delta + big_n as f64 * diameter / n as f64
}
