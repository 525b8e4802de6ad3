//! Shift spaces as language oracles.
//!
//! Every backend answers "is this finite word a factor of some point?" and
//! "can this allowed word be extended by one symbol?". Enumeration, counting
//! and all higher-level searches are built on those two questions.

pub mod beta;
pub mod hereditary;
pub mod sft;
pub mod spec;
pub mod word;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
pub use beta::BetaShift;
pub use hereditary::{DensityBound, Hereditary};
pub use sft::Sft;
pub use spec::SpaceSpec;
pub use word::Word;

/// Default cap on the number of words any single enumeration may produce.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Clone, Debug)]
pub enum Backend {
    Full,
    Sft(Sft),
    Beta(BetaShift),
    Hereditary(Hereditary),
    Product(Box<ShiftSpace>, Box<ShiftSpace>),
    Union(Box<Union>),
}

#[derive(Clone, Debug)]
pub struct Union {
    pub left: ShiftSpace,
    pub right: ShiftSpace,
    /// Global-to-local symbol maps; `None` marks a symbol the side never uses.
    left_inv: Vec<Option<u8>>,
    right_inv: Vec<Option<u8>>,
}

impl Union {
    fn local(inv: &[Option<u8>], w: &[u8]) -> Option<Vec<u8>> {
        w.iter()
            .map(|&s| inv.get(s as usize).copied().flatten())
            .collect()
    }
}

/// A one-sided subshift described by its language.
///
/// Spaces are immutable; the only interior state is a per-length cache of
/// enumerated languages, guarded by a mutex.
pub struct ShiftSpace {
    alphabet: usize,
    backend: Backend,
    budget: u64,
    cache: Mutex<HashMap<usize, Arc<Vec<Word>>>>,
}

impl Clone for ShiftSpace {
    fn clone(&self) -> Self {
        ShiftSpace {
            alphabet: self.alphabet,
            backend: self.backend.clone(),
            budget: self.budget,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for ShiftSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftSpace")
            .field("alphabet", &self.alphabet)
            .field("backend", &self.backend)
            .field("budget", &self.budget)
            .finish()
    }
}

impl ShiftSpace {
    fn with_backend(alphabet: usize, backend: Backend) -> ShiftSpace {
        ShiftSpace {
            alphabet,
            backend,
            budget: DEFAULT_BUDGET,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn full(alphabet: usize) -> ShiftSpace {
        assert!(alphabet >= 1);
        Self::with_backend(alphabet, Backend::Full)
    }

    pub fn sft(sft: Sft) -> ShiftSpace {
        Self::with_backend(sft.alphabet(), Backend::Sft(sft))
    }

    /// SFT from forbidden words given as digit strings.
    pub fn sft_forbidden(alphabet: usize, forbidden: &[&str]) -> Result<ShiftSpace> {
        let words = forbidden
            .iter()
            .map(|s| s.parse::<Word>().map(Word::into_inner))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::sft(Sft::from_forbidden(alphabet, words)?))
    }

    /// The golden-mean shift: binary sequences without "11".
    pub fn golden_mean() -> ShiftSpace {
        Self::sft_forbidden(2, &["11"]).expect("static golden-mean spec")
    }

    pub fn beta(b: BetaShift) -> ShiftSpace {
        Self::with_backend(b.alphabet, Backend::Beta(b))
    }

    pub fn hereditary(h: Hereditary) -> ShiftSpace {
        Self::with_backend(h.alphabet, Backend::Hereditary(h))
    }

    /// Binary hereditary shift with L(n) = floor(1 + ln n).
    pub fn hereditary_log() -> ShiftSpace {
        Self::hereditary(Hereditary::new(2, &[1], DensityBound::log()).expect("static spec"))
    }

    pub fn product(left: ShiftSpace, right: ShiftSpace) -> Result<ShiftSpace> {
        let alphabet = left.alphabet * right.alphabet;
        if alphabet > 256 {
            return invalid("product alphabet exceeds 256 symbols");
        }
        Ok(Self::with_backend(
            alphabet,
            Backend::Product(Box::new(left), Box::new(right)),
        ))
    }

    /// Union of two languages after relabelling each side into a shared alphabet.
    pub fn union(
        left: ShiftSpace,
        right: ShiftSpace,
        left_symbols: Option<Vec<u8>>,
        right_symbols: Option<Vec<u8>>,
    ) -> Result<ShiftSpace> {
        let lmap = left_symbols.unwrap_or_else(|| (0..left.alphabet as u8).collect());
        let rmap = right_symbols.unwrap_or_else(|| (0..right.alphabet as u8).collect());
        if lmap.len() != left.alphabet || rmap.len() != right.alphabet {
            return invalid("union symbol map length must equal the side's alphabet");
        }
        let alphabet = lmap
            .iter()
            .chain(&rmap)
            .map(|&s| s as usize + 1)
            .max()
            .unwrap_or(1);
        let invert = |map: &[u8]| -> Result<Vec<Option<u8>>> {
            let mut inv = vec![None; alphabet];
            for (local, &global) in map.iter().enumerate() {
                if inv[global as usize].is_some() {
                    return invalid("union symbol map must be injective");
                }
                inv[global as usize] = Some(local as u8);
            }
            Ok(inv)
        };
        let left_inv = invert(&lmap)?;
        let right_inv = invert(&rmap)?;
        Ok(Self::with_backend(
            alphabet,
            Backend::Union(Box::new(Union {
                left,
                right,
                left_inv,
                right_inv,
            })),
        ))
    }

    /// The union space X₁ ∪ X₂ with X₁ over {0,1} and X₂ over {0,2}, both
    /// with L(n) = floor(1 + ln n).
    pub fn hereditary_union() -> ShiftSpace {
        let x1 = Self::hereditary_log();
        let x2 = Self::hereditary_log();
        Self::union(x1, x2, Some(vec![0, 1]), Some(vec![0, 2])).expect("static spec")
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<ShiftSpace> {
        let space = match spec {
            SpaceSpec::Full { alphabet, .. } => {
                if *alphabet == 0 || *alphabet > 256 {
                    return invalid("full shift alphabet must be in 1..=256");
                }
                Self::full(*alphabet)
            }
            SpaceSpec::Sft {
                alphabet,
                forbidden,
                matrix,
                ..
            } => match (forbidden, matrix) {
                (Some(f), None) => {
                    let a = alphabet
                        .ok_or_else(|| Error::Invalid("sft with forbidden words needs an alphabet".into()))?;
                    let refs: Vec<&str> = f.iter().map(String::as_str).collect();
                    Self::sft_forbidden(a, &refs)?
                }
                (None, Some(m)) => {
                    let sft = Sft::from_matrix(m)?;
                    if alphabet.is_some_and(|a| a != sft.alphabet()) {
                        return invalid("sft alphabet disagrees with matrix size");
                    }
                    Self::sft(sft)
                }
                _ => return invalid("sft needs exactly one of `forbidden` or `matrix`"),
            },
            SpaceSpec::Beta {
                beta,
                expansion,
                precision,
                ..
            } => match (beta, expansion) {
                (Some(b), None) => Self::beta(BetaShift::new(*b, *precision)?),
                (None, Some(e)) => {
                    let digits = e.parse::<Word>()?.into_inner();
                    Self::beta(BetaShift::from_expansion(digits, *precision)?)
                }
                _ => return invalid("beta needs exactly one of `beta` or `expansion`"),
            },
            SpaceSpec::Hereditary {
                alphabet,
                marked,
                bound,
                ..
            } => Self::hereditary(Hereditary::new(*alphabet, marked, bound.clone())?),
            SpaceSpec::Product { left, right, .. } => {
                Self::product(Self::from_spec(left)?, Self::from_spec(right)?)?
            }
            SpaceSpec::Union {
                left,
                right,
                left_symbols,
                right_symbols,
                ..
            } => Self::union(
                Self::from_spec(left)?,
                Self::from_spec(right)?,
                left_symbols.clone(),
                right_symbols.clone(),
            )?,
        };
        Ok(match spec.budget() {
            Some(b) => space.with_budget(b),
            None => space,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> ShiftSpace {
        self.budget = budget;
        self.cache = Mutex::new(HashMap::new());
        self
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn backend_name(&self) -> &'static str {
        match self.backend {
            Backend::Full => "full",
            Backend::Sft(_) => "sft",
            Backend::Beta(_) => "beta",
            Backend::Hereditary(_) => "hereditary",
            Backend::Product(..) => "product",
            Backend::Union(_) => "union",
        }
    }

    pub fn as_sft(&self) -> Option<&Sft> {
        match &self.backend {
            Backend::Sft(s) => Some(s),
            _ => None,
        }
    }

    /// Whether `w` is a factor of some point of the space.
    pub fn is_allowed(&self, w: &[u8]) -> Result<bool> {
        word::check_symbols(w, self.alphabet)?;
        self.allowed_unchecked(w)
    }

    fn allowed_unchecked(&self, w: &[u8]) -> Result<bool> {
        match &self.backend {
            Backend::Full => Ok(true),
            Backend::Sft(s) => Ok(s.is_allowed(w)),
            Backend::Beta(b) => b.is_allowed(w),
            Backend::Hereditary(h) => h.is_allowed(w),
            Backend::Product(a, b) => {
                let (u, v) = self.split(w, b.alphabet);
                Ok(a.allowed_unchecked(&u)? && b.allowed_unchecked(&v)?)
            }
            Backend::Union(un) => {
                let l = match Union::local(&un.left_inv, w) {
                    Some(u) => un.left.allowed_unchecked(&u)?,
                    None => false,
                };
                if l {
                    return Ok(true);
                }
                match Union::local(&un.right_inv, w) {
                    Some(u) => un.right.allowed_unchecked(&u),
                    None => Ok(false),
                }
            }
        }
    }

    /// Whether `prefix + [s]` is allowed, assuming `prefix` is.
    pub fn extends(&self, prefix: &[u8], s: u8) -> Result<bool> {
        if s as usize >= self.alphabet {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                alphabet: self.alphabet,
            });
        }
        match &self.backend {
            Backend::Full => Ok(true),
            Backend::Sft(sft) => Ok(sft.extends(prefix, s)),
            Backend::Beta(b) => b.extends(prefix, s),
            Backend::Hereditary(h) => h.extends(prefix, s),
            Backend::Product(a, b) => {
                let (u, v) = self.split(prefix, b.alphabet);
                let (sa, sb) = (s / b.alphabet as u8, s % b.alphabet as u8);
                Ok(a.extends(&u, sa)? && b.extends(&v, sb)?)
            }
            Backend::Union(_) => {
                let mut w = prefix.to_vec();
                w.push(s);
                self.allowed_unchecked(&w)
            }
        }
    }

    /// Splits a product word into its two coordinate words.
    pub fn split(&self, w: &[u8], right_alphabet: usize) -> (Vec<u8>, Vec<u8>) {
        let r = right_alphabet as u8;
        w.iter().map(|&s| (s / r, s % r)).unzip()
    }

    /// Combines coordinate words into a product word (no membership check).
    pub fn pair(&self, u: &[u8], v: &[u8]) -> Result<Word> {
        let Backend::Product(_, b) = &self.backend else {
            return invalid("pair() needs a product space");
        };
        if u.len() != v.len() {
            return invalid("coordinate words differ in length");
        }
        let r = b.alphabet as u8;
        Ok(Word::new(u.iter().zip(v).map(|(&x, &y)| x * r + y).collect()))
    }

    /// Exact number of allowed words of length `n`.
    ///
    /// Full shifts, SFTs and products of those use closed forms and are only
    /// limited by u128 overflow; other backends count by depth-first search
    /// and fail once the count passes the enumeration budget.
    pub fn count_language(&self, n: usize) -> Result<u128> {
        if let Some(c) = self.closed_form_count(n)? {
            return Ok(c);
        }
        if let Some(words) = self.cache.lock().unwrap().get(&n) {
            return Ok(words.len() as u128);
        }
        let counter = AtomicU64::new(0);
        let roots = self.split_prefixes(n)?;
        roots
            .par_iter()
            .try_for_each(|p| self.dfs(p.clone(), n, &counter, &mut |_| ()))?;
        Ok(counter.load(Ordering::Relaxed) as u128)
    }

    fn closed_form_count(&self, n: usize) -> Result<Option<u128>> {
        let overflow = || Error::Budget(format!("language count overflows u128 at n={n}"));
        Ok(match &self.backend {
            Backend::Full => Some(
                (self.alphabet as u128)
                    .checked_pow(n as u32)
                    .ok_or_else(overflow)?,
            ),
            Backend::Sft(s) => Some(s.count(n)?),
            Backend::Product(a, b) => match (a.closed_form_count(n)?, b.closed_form_count(n)?) {
                (Some(x), Some(y)) => Some(x.checked_mul(y).ok_or_else(overflow)?),
                _ => None,
            },
            _ => None,
        })
    }

    /// All allowed words of length `n` in lexicographic order (memoized).
    pub fn language(&self, n: usize) -> Result<Arc<Vec<Word>>> {
        if let Some(words) = self.cache.lock().unwrap().get(&n) {
            return Ok(words.clone());
        }
        if let Some(c) = self.closed_form_count(n)? {
            if c > self.budget as u128 {
                return Err(self.budget_error(n));
            }
        }
        let counter = AtomicU64::new(0);
        let roots = self.split_prefixes(n)?;
        let chunks: Vec<Vec<Word>> = roots
            .par_iter()
            .map(|p| {
                let mut out = Vec::new();
                self.dfs(p.clone(), n, &counter, &mut |w: &[u8]| out.push(Word::from(w)))?;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let words: Arc<Vec<Word>> = Arc::new(chunks.into_iter().flatten().collect());
        self.cache.lock().unwrap().insert(n, words.clone());
        Ok(words)
    }

    fn budget_error(&self, n: usize) -> Error {
        Error::Budget(format!(
            "language at n={n} exceeds the budget of {} words",
            self.budget
        ))
    }

    /// Allowed prefixes used to split enumeration into parallel subtrees.
    fn split_prefixes(&self, n: usize) -> Result<Vec<Vec<u8>>> {
        let mut depth = 0;
        let mut roots = vec![Vec::new()];
        while depth < n && roots.len() < 64 {
            let mut next = Vec::new();
            for p in &roots {
                for s in 0..self.alphabet as u8 {
                    if self.extends(p, s)? {
                        let mut q = p.clone();
                        q.push(s);
                        next.push(q);
                    }
                }
            }
            roots = next;
            depth += 1;
        }
        Ok(roots)
    }

    fn dfs(
        &self,
        mut prefix: Vec<u8>,
        n: usize,
        counter: &AtomicU64,
        emit: &mut dyn FnMut(&[u8]),
    ) -> Result<()> {
        if prefix.len() == n {
            if counter.fetch_add(1, Ordering::Relaxed) >= self.budget {
                return Err(self.budget_error(n));
            }
            emit(&prefix);
            return Ok(());
        }
        for s in 0..self.alphabet as u8 {
            if self.extends(&prefix, s)? {
                prefix.push(s);
                self.dfs(prefix.clone(), n, counter, emit)?;
                prefix.pop();
            }
        }
        Ok(())
    }

    /// Lexicographically first allowed extension of `w` to length `len`.
    pub fn extend_to(&self, w: &[u8], len: usize) -> Result<Option<Word>> {
        fn go(space: &ShiftSpace, w: &mut Vec<u8>, len: usize, nodes: &mut u64) -> Result<bool> {
            if w.len() >= len {
                return Ok(true);
            }
            *nodes += 1;
            if *nodes > space.budget {
                return Err(Error::Budget("extension search".into()));
            }
            for s in 0..space.alphabet as u8 {
                if space.extends(w, s)? {
                    w.push(s);
                    if go(space, w, len, nodes)? {
                        return Ok(true);
                    }
                    w.pop();
                }
            }
            Ok(false)
        }
        if !self.is_allowed(w)? {
            return Ok(None);
        }
        let mut v = w.to_vec();
        let mut nodes = 0;
        Ok(go(self, &mut v, len, &mut nodes)?.then(|| Word::new(v)))
    }

    /// Uniformly random allowed word of length `n`.
    ///
    /// Full shifts, SFTs and their products sample exactly at any length;
    /// other backends pick from the enumerated language.
    pub fn sample_word<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Word> {
        match &self.backend {
            Backend::Full => Ok(Word::new(
                (0..n).map(|_| rng.random_range(0..self.alphabet) as u8).collect(),
            )),
            Backend::Sft(s) => Ok(Word::new(s.sample(n, rng)?)),
            Backend::Product(a, b) if self.closed_form_count(n)?.is_some() => {
                let u = a.sample_word(n, rng)?;
                let v = b.sample_word(n, rng)?;
                self.pair(&u, &v)
            }
            _ => {
                let lang = self.language(n)?;
                if lang.is_empty() {
                    return Err(Error::Infeasible(format!("no allowed words of length {n}")));
                }
                Ok(lang[rng.random_range(0..lang.len())].clone())
            }
        }
    }

    /// Exact topological entropy where a closed form exists.
    pub fn entropy_reference(&self) -> Option<f64> {
        match &self.backend {
            Backend::Full => Some((self.alphabet as f64).ln()),
            Backend::Sft(s) => {
                let r = s.spectral_radius();
                Some(if r > 0.0 { r.ln() } else { 0.0 })
            }
            Backend::Beta(b) => Some(b.beta.ln()),
            Backend::Product(a, b) => Some(a.entropy_reference()? + b.entropy_reference()?),
            Backend::Union(u) => Some(u.left.entropy_reference()?.max(u.right.entropy_reference()?)),
            Backend::Hereditary(_) => None,
        }
    }

    /// Whether allowed words of length `q` present the space as a
    /// one-step graph (so cycles of the q-word graph are periodic points).
    pub fn is_markov_at(&self, q: usize) -> bool {
        match &self.backend {
            Backend::Full => true,
            Backend::Sft(s) => q >= s.state_len(),
            Backend::Product(a, b) => a.is_markov_at(q) && b.is_markov_at(q),
            _ => false,
        }
    }
}
