//! Subshifts of finite type presented by forbidden words or a 0/1 matrix.
//!
//! Internally every SFT is a graph on "states" (allowed words of length `k`,
//! where `k + 1` is at least the longest forbidden word). Only live states,
//! those with an infinite forward path, are kept, so a word is in the
//! language exactly when it walks the live graph.

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Largest state space (alphabet^k) the higher-block presentation will build.
const MAX_STATES: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct Sft {
    alphabet: usize,
    state_len: usize,
    forbidden: Vec<Vec<u8>>,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    succ: Vec<Vec<usize>>,
    prefixes: HashSet<Vec<u8>>,
}

impl Sft {
    pub fn from_forbidden(alphabet: usize, forbidden: Vec<Vec<u8>>) -> Result<Sft> {
        if alphabet == 0 {
            return invalid("alphabet must be positive");
        }
        for f in &forbidden {
            if f.is_empty() {
                return invalid("empty forbidden word");
            }
            crate::shift::word::check_symbols(f, alphabet)?;
        }
        let longest = forbidden.iter().map(Vec::len).max().unwrap_or(1);
        let state_len = longest.saturating_sub(1).max(1);
        let total = alphabet
            .checked_pow(state_len as u32)
            .filter(|&t| t <= MAX_STATES)
            .ok_or_else(|| Error::Budget(format!("{alphabet}^{state_len} SFT states")))?;

        let avoids = |w: &[u8]| !forbidden.iter().any(|f| contains(w, f));

        let mut candidates = Vec::new();
        for code in 0..total {
            let w = decode(code, alphabet, state_len);
            if avoids(&w) {
                candidates.push(w);
            }
        }
        let cand_index: HashMap<Vec<u8>, usize> = candidates
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); candidates.len()];
        for (i, s) in candidates.iter().enumerate() {
            for a in 0..alphabet as u8 {
                let mut ext = s.clone();
                ext.push(a);
                if !forbidden.iter().any(|f| ext.ends_with(f)) {
                    if let Some(&j) = cand_index.get(&ext[1..]) {
                        succ[i].push(j);
                    }
                }
            }
        }

        // Prune states without an infinite forward path.
        let mut live = vec![true; candidates.len()];
        loop {
            let mut changed = false;
            for i in 0..candidates.len() {
                if live[i] && !succ[i].iter().any(|&j| live[j]) {
                    live[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let states: Vec<Vec<u8>> = candidates
            .iter()
            .zip(&live)
            .filter(|(_, &l)| l)
            .map(|(w, _)| w.clone())
            .collect();
        let index: HashMap<Vec<u8>, usize> = states.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let succ: Vec<Vec<usize>> = states
            .iter()
            .map(|s| {
                let i = cand_index[s];
                succ[i]
                    .iter()
                    .filter(|&&j| live[j])
                    .map(|&j| index[&candidates[j]])
                    .collect()
            })
            .collect();
        let mut prefixes = HashSet::new();
        for s in &states {
            for l in 0..=state_len {
                prefixes.insert(s[..l].to_vec());
            }
        }

        Ok(Sft {
            alphabet,
            state_len,
            forbidden,
            states,
            index,
            succ,
            prefixes,
        })
    }

    /// Builds the vertex shift of a square 0/1 matrix: `a[i][j] == 0` forbids "ij".
    pub fn from_matrix(matrix: &[Vec<u8>]) -> Result<Sft> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|row| row.len() != n) {
            return invalid("transition matrix must be square and nonempty");
        }
        let mut forbidden = Vec::new();
        for (i, row) in matrix.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                match e {
                    0 => forbidden.push(vec![i as u8, j as u8]),
                    1 => {}
                    _ => return invalid("transition matrix entries must be 0 or 1"),
                }
            }
        }
        // Keep state_len = 1 even when nothing is forbidden.
        Sft::from_forbidden(n, forbidden)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn state_len(&self) -> usize {
        self.state_len
    }

    pub fn forbidden(&self) -> &[Vec<u8>] {
        &self.forbidden
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn is_allowed(&self, w: &[u8]) -> bool {
        let k = self.state_len;
        if w.len() <= k {
            return self.prefixes.contains(w);
        }
        let mut prev = match self.index.get(&w[..k]) {
            Some(&i) => i,
            None => return false,
        };
        for end in k + 1..=w.len() {
            match self.index.get(&w[end - k..end]) {
                Some(&j) if self.succ[prev].contains(&j) => prev = j,
                _ => return false,
            }
        }
        true
    }

    /// Whether `prefix + [s]` is allowed, given that `prefix` is.
    pub fn extends(&self, prefix: &[u8], s: u8) -> bool {
        let k = self.state_len;
        let n = prefix.len() + 1;
        if n <= k {
            let mut w = prefix.to_vec();
            w.push(s);
            return self.prefixes.contains(&w);
        }
        let mut state = prefix[n - k..].to_vec();
        state.push(s);
        let Some(&j) = self.index.get(&state) else {
            return false;
        };
        let prev = &prefix[n - 1 - k..];
        self.succ[self.index[prev]].contains(&j)
    }

    /// 0/1 adjacency matrix of the live state graph.
    pub fn transfer_matrix(&self) -> DMatrix<f64> {
        let n = self.states.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.succ.iter().enumerate() {
            for &j in row {
                m[(i, j)] = 1.0;
            }
        }
        m
    }

    /// Exact number of allowed words of length `n`, by transfer-matrix powers.
    pub fn count(&self, n: usize) -> Result<u128> {
        let k = self.state_len;
        if n < k {
            return Ok(self.prefixes.iter().filter(|p| p.len() == n).count() as u128);
        }
        let mut v: Vec<u128> = vec![1; self.states.len()];
        for _ in 0..n - k {
            let mut next = vec![0u128; v.len()];
            for (i, row) in self.succ.iter().enumerate() {
                let mut acc: u128 = 0;
                for &j in row {
                    acc = acc
                        .checked_add(v[j])
                        .ok_or_else(|| Error::Budget(format!("SFT count overflows at n={n}")))?;
                }
                next[i] = acc;
            }
            v = next;
        }
        v.iter().try_fold(0u128, |a, &b| {
            a.checked_add(b)
                .ok_or_else(|| Error::Budget(format!("SFT count overflows at n={n}")))
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.transfer_matrix())
    }

    /// Uniformly random allowed word of length `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<u8>> {
        let k = self.state_len;
        if n < k {
            let mut short: Vec<&Vec<u8>> = self.prefixes.iter().filter(|p| p.len() == n).collect();
            short.sort();
            return Ok(short[rng.random_range(0..short.len())].clone());
        }
        // ways[l][i]: number of l-step paths leaving state i.
        let overflow = || Error::Budget(format!("SFT path count overflows at n={n}"));
        let mut ways: Vec<Vec<u128>> = vec![vec![1; self.states.len()]];
        for l in 1..=n - k {
            let prev = &ways[l - 1];
            let row = self
                .succ
                .iter()
                .map(|next| {
                    next.iter()
                        .try_fold(0u128, |a, &j| a.checked_add(prev[j]))
                        .ok_or_else(overflow)
                })
                .collect::<Result<Vec<_>>>()?;
            ways.push(row);
        }
        let pick = |weights: &mut dyn Iterator<Item = (usize, u128)>, total: u128, rng: &mut R| {
            let mut r = rng.random_range(0..total);
            for (i, w) in weights {
                if r < w {
                    return i;
                }
                r -= w;
            }
            unreachable!("weights sum to total")
        };
        let last = &ways[n - k];
        let total = last
            .iter()
            .try_fold(0u128, |a, &b| a.checked_add(b))
            .ok_or_else(overflow)?;
        let mut state = pick(&mut last.iter().copied().enumerate(), total, rng);
        let mut word = self.states[state].clone();
        for l in (0..n - k).rev() {
            let total = ways[l + 1][state];
            let succ = &self.succ[state];
            let i = pick(&mut succ.iter().map(|&j| ways[l][j]).enumerate(), total, rng);
            state = succ[i];
            word.push(*self.states[state].last().expect("state_len >= 1"));
        }
        Ok(word)
    }
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn contains(w: &[u8], f: &[u8]) -> bool {
    f.len() <= w.len() && w.windows(f.len()).any(|x| x == f)
}

fn decode(mut code: usize, alphabet: usize, len: usize) -> Vec<u8> {
    let mut w = vec![0u8; len];
    for slot in w.iter_mut().rev() {
        *slot = (code % alphabet) as u8;
        code /= alphabet;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Sft {
        Sft::from_forbidden(2, vec![vec![1, 1]]).unwrap()
    }

    #[test]
    fn golden_mean_counts_are_fibonacci() {
        let g = golden();
        let counts: Vec<u128> = (1..=6).map(|n| g.count(n).unwrap()).collect();
        assert_eq!(counts, vec![2, 3, 5, 8, 13, 21]);
        assert_eq!(g.count(0).unwrap(), 1);
    }

    #[test]
    fn dead_ends_are_pruned() {
        // "00" and "01" forbidden: a 0 can never be followed, so only 1^inf survives.
        let s = Sft::from_forbidden(2, vec![vec![0, 0], vec![0, 1]]).unwrap();
        assert!(!s.is_allowed(&[0]));
        assert!(s.is_allowed(&[1, 1, 1]));
        assert_eq!(s.count(5).unwrap(), 1);
    }

    #[test]
    fn matrix_and_forbidden_presentations_agree() {
        let m = Sft::from_matrix(&[vec![1, 1], vec![1, 0]]).unwrap();
        let g = golden();
        for n in 1..10 {
            assert_eq!(m.count(n).unwrap(), g.count(n).unwrap());
        }
        assert!((m.spectral_radius() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn longer_forbidden_words_use_higher_blocks() {
        let s = Sft::from_forbidden(2, vec![vec![1, 0, 1]]).unwrap();
        assert_eq!(s.state_len(), 2);
        assert!(!s.is_allowed(&[0, 1, 0, 1]));
        assert!(s.is_allowed(&[1, 1, 0, 0, 1]));
        assert!(s.extends(&[1, 1], 0));
        assert!(!s.extends(&[1, 1, 0], 1));
    }
}
