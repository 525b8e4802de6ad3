use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::ConstructionParams;
use crate::entropy::{hamming_separated_set, q_count, HammingOptions};
use crate::error::{invalid, Error, Result};
use crate::measures::{weak_metric, EmpiricalMeasure};
use crate::shift::{ShiftSpace, SpaceSpec, Word};
use crate::tracing::mismatch_allowance;

/// Smallest admissible |Γ_M| = ⌈e^{M h₀}⌉.
pub fn gamma_target(m_len: usize, h0: f64) -> usize {
    (m_len as f64 * h0).exp().ceil() as usize
}

#[derive(Clone, Debug, Serialize)]
pub struct Gamma {
    pub m_len: usize,
    pub target: usize,
    pub upper: f64,
    /// Words of length M whose empirical measure is within η of μ.
    pub candidates: usize,
    pub words: Vec<Word>,
}

/// Distances within this of the ball radius count as on the boundary.
const BALL_GUARD: f64 = 1e-12;

/// Γ_M: the first ⌈e^{M h₀}⌉ words of the greedy (M, δ₀, γ₀)-separated set
/// drawn from words whose empirical measure lies in B(μ, η).
pub fn build_gamma(space: &ShiftSpace, params: &ConstructionParams) -> Result<Gamma> {
    let m_len = params.m_len;
    let target = params.gamma_size;
    if target as f64 >= params.gamma_upper {
        return Err(Error::Infeasible(format!(
            "|Gamma_M| = {target} does not fit below e^(M(h0+beta)) = {:.4} at M={m_len}",
            params.gamma_upper
        )));
    }
    let cfg = params.metric;
    if cfg.depth > m_len {
        return invalid("metric depth exceeds the block length");
    }
    let mu = &params.mu;
    let eta = params.eta;
    let near = move |w: &[u8]| {
        EmpiricalMeasure::new(w, m_len + 1 - cfg.depth, cfg.depth, cfg.alphabet)
            .and_then(|e| weak_metric(&e, mu, &cfg))
            .is_ok_and(|d| d < eta - BALL_GUARD)
    };
    let opts = HammingOptions {
        filter: Some(&near),
        ..Default::default()
    };
    let set = hamming_separated_set(space, m_len, params.delta0, params.scale(), target, opts)?;
    Ok(Gamma {
        m_len,
        target,
        upper: params.gamma_upper,
        candidates: set.candidates,
        words: set.words.into_iter().take(target).collect(),
    })
}

/// Block length, gap range and mismatch fraction of the traced words.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockShape {
    pub m_len: usize,
    /// Gaps ξ(k) range over 0..m1.
    pub m1: usize,
    pub delta2: f64,
}

/// All Y-words of one gap pattern ξ.
#[derive(Clone, Debug, Serialize)]
pub struct YClass {
    pub xi: Vec<usize>,
    pub starts: Vec<usize>,
    pub len: usize,
    pub words: Vec<Word>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaApprox {
    pub depth: usize,
    pub shape: BlockShape,
    /// Mismatches allowed per block: the largest c < δ₂M.
    pub allowance: usize,
    pub gamma: Vec<Word>,
    pub y: Vec<YClass>,
    pub lambda_len: usize,
    /// Distinct factors of length `lambda_len` at offsets 0..M+M₁ of Y-words.
    pub lambda: Vec<Word>,
}

/// Builds the Y- and Λ-languages at depth `n` (construction scale m = 1).
pub fn lambda_language(
    space: &ShiftSpace,
    gamma: &[Word],
    shape: BlockShape,
    n: usize,
) -> Result<LambdaApprox> {
    let BlockShape { m_len, m1, delta2 } = shape;
    if n == 0 || m_len == 0 || m1 == 0 {
        return invalid("depth, M and M1 must be positive");
    }
    if gamma.is_empty() || gamma.iter().any(|g| g.len() != m_len) {
        return invalid(format!(
            "Gamma_M must be a nonempty set of words of length {m_len}"
        ));
    }
    let patterns = (m1 as u128)
        .checked_pow(n as u32)
        .filter(|&p| p <= space.budget() as u128)
        .ok_or_else(|| Error::Budget(format!("{m1}^{n} gap patterns")))?;
    let allowance = mismatch_allowance(m_len, delta2);
    let produced = AtomicU64::new(0);
    let y = (0..patterns as u64)
        .into_par_iter()
        .map(|code| {
            let xi = decode(code, m1, n);
            let mut starts = Vec::with_capacity(n);
            let mut t = 0;
            for &g in &xi {
                starts.push(t);
                t += m_len + g;
            }
            let words = traced_words(space, gamma, &starts, t, allowance, &produced)?;
            Ok(YClass {
                xi,
                starts,
                len: t,
                words,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let lambda_len = (n * m_len).saturating_sub(m_len + m1);
    let mut lambda: Vec<Word> = y
        .par_iter()
        .flat_map_iter(|c| {
            c.words
                .iter()
                .flat_map(move |w| (0..m_len + m1).map(move |tau| w.factor(tau, lambda_len)))
        })
        .collect();
    lambda.par_sort_unstable();
    lambda.dedup();
    Ok(LambdaApprox {
        depth: n,
        shape,
        allowance,
        gamma: gamma.to_vec(),
        y,
        lambda_len,
        lambda,
    })
}

fn decode(mut code: u64, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % base as u64) as usize;
        code /= base as u64;
    }
    out
}

const DEAD: u8 = u8::MAX;

/// Allowed words of length `len` whose block at each start matches some Γ
/// word in all but at most `allowance` positions, in lexicographic order.
fn traced_words(
    space: &ShiftSpace,
    gamma: &[Word],
    starts: &[usize],
    len: usize,
    allowance: usize,
    produced: &AtomicU64,
) -> Result<Vec<Word>> {
    let m_len = gamma[0].len();
    let mut block_at = vec![None; len];
    for (k, &s) in starts.iter().enumerate() {
        for j in 0..m_len {
            block_at[s + j] = Some((k, j));
        }
    }
    struct Dfs<'a> {
        space: &'a ShiftSpace,
        gamma: &'a [Word],
        block_at: Vec<Option<(usize, usize)>>,
        allowance: u8,
        produced: &'a AtomicU64,
        out: Vec<Word>,
    }
    impl Dfs<'_> {
        fn go(&mut self, w: &mut Vec<u8>, counts: &[u8]) -> Result<()> {
            let pos = w.len();
            if pos == self.block_at.len() {
                let total = self.produced.fetch_add(1, Ordering::Relaxed) + 1;
                if total > self.space.budget() {
                    return Err(Error::Budget(format!(
                        "traced language exceeds {} words",
                        self.space.budget()
                    )));
                }
                self.out.push(Word::new(w.clone()));
                return Ok(());
            }
            for s in 0..self.space.alphabet() as u8 {
                if !self.space.extends(w, s)? {
                    continue;
                }
                let next = match self.block_at[pos] {
                    None => counts.to_vec(),
                    Some((_, j)) => {
                        let fresh;
                        let base = if j == 0 {
                            fresh = vec![0u8; self.gamma.len()];
                            &fresh[..]
                        } else {
                            counts
                        };
                        let next: Vec<u8> = base
                            .iter()
                            .zip(self.gamma)
                            .map(|(&c, g)| {
                                let c = if c == DEAD { DEAD } else { c + u8::from(g[j] != s) };
                                if c != DEAD && c > self.allowance {
                                    DEAD
                                } else {
                                    c
                                }
                            })
                            .collect();
                        if next.iter().all(|&c| c == DEAD) {
                            continue;
                        }
                        next
                    }
                };
                w.push(s);
                self.go(w, &next)?;
                w.pop();
            }
            Ok(())
        }
    }
    let allowance = u8::try_from(allowance)
        .ok()
        .filter(|&a| a < DEAD)
        .ok_or_else(|| Error::Invalid("mismatch allowance too large".into()))?;
    let mut dfs = Dfs {
        space,
        gamma,
        block_at,
        allowance,
        produced,
        out: Vec::new(),
    };
    dfs.go(&mut Vec::with_capacity(len), &[])?;
    Ok(dfs.out)
}

impl LambdaApprox {
    pub fn y_count(&self) -> usize {
        self.y.iter().map(|c| c.words.len()).sum()
    }

    /// Indices of the Γ words matching block `k` of `w` within the allowance.
    pub fn block_matches(&self, w: &[u8], start: usize) -> Vec<usize> {
        let m_len = self.shape.m_len;
        self.gamma
            .iter()
            .enumerate()
            .filter(|(_, g)| {
                g.iter()
                    .zip(&w[start..start + m_len])
                    .filter(|(a, b)| a != b)
                    .count()
                    <= self.allowance
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Distinct length-`len` prefixes of Λ-words.
    pub fn factor_count(&self, len: usize) -> Result<usize> {
        if len > self.lambda_len {
            return Err(Error::Horizon {
                requested: len,
                horizon: self.lambda_len,
            });
        }
        let set: HashSet<&[u8]> = self.lambda.iter().map(|w| &w[..len]).collect();
        Ok(set.len())
    }

    /// Finite-depth invariance: the one-step shift of every Λ-word is a
    /// prefix of some Λ-word. Returns the number of failures.
    pub fn shift_failures(&self) -> usize {
        if self.lambda_len == 0 {
            return 0;
        }
        let prefixes: HashSet<&[u8]> = self.lambda.iter().map(|w| &w[..self.lambda_len - 1]).collect();
        self.lambda.iter().filter(|w| !prefixes.contains(&w[1..])).count()
    }

    /// Λ-language as a word list.
    pub fn export(&self, alphabet: usize) -> WordList {
        WordList {
            alphabet,
            length: self.lambda_len,
            words: self.lambda.clone(),
        }
    }

    /// The SFT forbidding every length-`len` word of `space` that is not a
    /// Λ-factor: an outer approximation of Λ readable by shift-core.
    pub fn forbidden_spec(&self, space: &ShiftSpace, len: usize) -> Result<SpaceSpec> {
        if len == 0 || len > self.lambda_len {
            return invalid(format!("factor length must lie in 1..={}", self.lambda_len));
        }
        let factors: HashSet<&[u8]> = self
            .lambda
            .iter()
            .flat_map(|w| (0..=w.len() - len).map(move |i| &w[i..i + len]))
            .collect();
        let forbidden = space
            .language(len)?
            .iter()
            .filter(|w| !factors.contains(&w[..]))
            .map(|w| w.to_string())
            .collect();
        Ok(SpaceSpec::Sft {
            alphabet: Some(space.alphabet()),
            forbidden: Some(forbidden),
            matrix: None,
            budget: None,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WordList {
    pub alphabet: usize,
    pub length: usize,
    pub words: Vec<Word>,
}

/// Both sides of the upper and lower counting inequalities at depth n.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub q: u128,
    pub r_eps: u128,
    pub r_m1: u128,
    /// ln(e^{M(h₀+β)} M₁ Q(M,δ₂) r(ε)^{δ₂M} r(M₁,ε)).
    pub block_factor: f64,
    /// Distinct Λ-words: the (ℓ, ε)-separated count, which dominates the
    /// (ℓ, 2ε) count bounded by the paper.
    pub lambda_words: usize,
    /// ln of (M+M₁)·exp(block_factor)^{n+2}.
    pub upper_ln: f64,
    pub upper_holds: bool,
    pub gamma_size: usize,
    /// |Γ_M|ⁿ / M₁^{n−1}.
    pub lower: f64,
    /// Gap prefix ξ(1..n−1) with the most distinct block sequences.
    pub cylinder: Vec<usize>,
    pub cylinder_blocks: usize,
    pub lower_holds: bool,
    /// Every Y-word in the cylinder matches exactly one Γ word per block.
    pub unique_blocks: bool,
    /// Y-words with different block sequences differ before nM(1+δ₁).
    pub separated: bool,
    pub separation_time: usize,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.upper_holds && self.lower_holds && self.unique_blocks && self.separated
    }
}

/// Γ-index sequence of each word's blocks, to the words sharing it.
type BlockIndex<'a> = HashMap<Vec<usize>, Vec<&'a Word>>;

pub fn count_bounds_check(
    space: &ShiftSpace,
    lambda: &LambdaApprox,
    params: &ConstructionParams,
) -> Result<BoundsReport> {
    let n = lambda.depth;
    let BlockShape { m_len, m1, delta2 } = lambda.shape;
    let scale = params.scale();
    let q = q_count(m_len as u64, delta2)?;
    let r_eps = space.count_language(scale.window(1))?;
    let r_m1 = space.count_language(scale.window(m1))?;
    let block_factor = m_len as f64 * (params.h0 + params.beta)
        + (m1 as f64).ln()
        + (q as f64).ln()
        + delta2 * m_len as f64 * (r_eps as f64).ln()
        + (r_m1 as f64).ln();
    let upper_ln = ((m_len + m1) as f64).ln() + (n + 2) as f64 * block_factor;
    let lambda_words = lambda.lambda.len();

    let gamma_size = lambda.gamma.len();
    let lower = (gamma_size as f64).powi(n as i32) / (m1 as f64).powi(n as i32 - 1);
    let separation_time = (n as f64 * m_len as f64 * (1.0 + params.delta1)).floor() as usize;

    let mut by_cylinder: HashMap<&[usize], Vec<&YClass>> = HashMap::new();
    for c in &lambda.y {
        by_cylinder.entry(&c.xi[..n - 1]).or_default().push(c);
    }
    let mut unique_blocks = true;
    let mut best: Option<(&[usize], BlockIndex)> = None;
    let mut keys: Vec<&[usize]> = by_cylinder.keys().copied().collect();
    keys.sort();
    for key in keys {
        let mut blocks: BlockIndex = HashMap::new();
        for c in &by_cylinder[key] {
            for w in &c.words {
                let mut seq = Vec::with_capacity(n);
                for &s in &c.starts {
                    let matches = lambda.block_matches(w, s);
                    unique_blocks &= matches.len() == 1;
                    seq.push(matches[0]);
                }
                blocks.entry(seq).or_default().push(w);
            }
        }
        if best.as_ref().is_none_or(|(_, b)| blocks.len() > b.len()) {
            best = Some((key, blocks));
        }
    }
    let (cylinder, blocks) = best.ok_or_else(|| Error::Infeasible("Y-language is empty".into()))?;
    let cylinder_blocks = blocks.len();
    let lower_holds = (cylinder_blocks as u128)
        .checked_mul((m1 as u128).pow(n as u32 - 1))
        .zip((gamma_size as u128).checked_pow(n as u32))
        .map(|(a, b)| a >= b)
        .unwrap_or(cylinder_blocks as f64 >= lower);

    // Block n starts at the same time across the cylinder, so its first M
    // symbols lie inside every word; cap the window there.
    let t_n = by_cylinder[cylinder][0].starts[n - 1];
    let window = separation_time.min(t_n + m_len);
    let mut owner: HashMap<&[u8], &Vec<usize>> = HashMap::new();
    let mut separated = true;
    for (seq, words) in &blocks {
        for w in words {
            if let Some(prev) = owner.insert(&w[..window], seq) {
                separated &= prev == seq;
            }
        }
    }
    Ok(BoundsReport {
        n,
        q,
        r_eps,
        r_m1,
        block_factor,
        lambda_words,
        upper_ln,
        upper_holds: (lambda_words as f64).ln() < upper_ln,
        gamma_size,
        lower,
        cylinder: cylinder.to_vec(),
        cylinder_blocks,
        lower_holds,
        unique_blocks,
        separated,
        separation_time,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyWindow {
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    pub low_end: f64,
    pub high_end: f64,
    pub holds: bool,
}

/// Entropy estimates of Λ read off the two counting bounds at depth n.
pub fn entropy_window(bounds: &BoundsReport, params: &ConstructionParams) -> EntropyWindow {
    let n = bounds.n as f64;
    let m = params.m_len as f64;
    let lower = bounds.lower.ln() / (n * m * (1.0 + params.delta1));
    let upper = bounds.upper_ln / (n * m);
    let slack = ((params.m_len + params.m1) as f64).ln() / (n * m) + 2.0 / n * (bounds.block_factor / m);
    let low_end = params.h0 - params.beta0 - slack;
    let high_end = params.h0 + params.beta0 + slack;
    EntropyWindow {
        lower,
        upper,
        slack,
        low_end,
        high_end,
        holds: low_end < lower && upper < high_end && lower <= upper,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureCheck {
    pub depth: usize,
    pub max_distance: f64,
    pub limit: f64,
    pub holds: bool,
}

/// Largest distance from μ of the empirical measure of a Λ-word.
pub fn measure_check(lambda: &LambdaApprox, params: &ConstructionParams) -> Result<MeasureCheck> {
    let cfg = params.metric;
    if lambda.lambda_len < cfg.depth {
        return invalid("Λ-words are shorter than the metric depth");
    }
    let n = lambda.lambda_len + 1 - cfg.depth;
    let max_distance = lambda
        .lambda
        .par_iter()
        .map(|w| {
            let e = EmpiricalMeasure::new(w, n, cfg.depth, cfg.alphabet)?;
            weak_metric(&e, &params.mu, &cfg)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let limit = 3.0 * params.eta;
    Ok(MeasureCheck {
        depth: cfg.depth,
        max_distance,
        limit,
        holds: max_distance < limit,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityCheck {
    pub len: usize,
    pub lambda_count: usize,
    pub language_count: u128,
    pub holds: bool,
}

/// Whether Λ misses some allowed word of length `len`.
pub fn minimality_check(space: &ShiftSpace, lambda: &LambdaApprox, len: usize) -> Result<MinimalityCheck> {
    let lambda_count = lambda.factor_count(len)?;
    let language_count = space.count_language(len)?;
    Ok(MinimalityCheck {
        len,
        lambda_count,
        language_count,
        holds: (lambda_count as u128) < language_count,
    })
}
