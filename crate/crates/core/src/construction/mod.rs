//! The intermediate-entropy invariant set at finite depth: parameter ledger,
//! the separated block set Γ_M, traced-word languages Y and Λ, and exact
//! checks of the counting inequalities behind the entropy window.

mod lambda;

pub use lambda::{
    build_gamma, count_bounds_check, entropy_window, gamma_target, lambda_language, measure_check,
    minimality_check, BlockShape, BoundsReport, EntropyWindow, Gamma, LambdaApprox, MeasureCheck,
    MinimalityCheck, WordList, YClass,
};

use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, EpsScale};
use crate::error::{invalid, Error, Result};
use crate::measures::{
    var_eps_closed_form, CylinderMeasure, MarkovMeasure, MeasureMetricConfig, DEFAULT_DEPTH,
};
use crate::shift::ShiftSpace;

/// Largest block length searched when `m_len` is not given.
pub const MAX_BLOCK_LEN: usize = 64;

/// User-facing inputs of the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionInputs {
    pub h0: f64,
    pub beta0: f64,
    pub eta0: f64,
    /// Block length M; the smallest feasible one is searched when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_len: Option<usize>,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_max_depth")]
    pub max_metric_depth: usize,
    /// Lengths n ≤ table_len are checked for the growth bound on r(n, ε).
    #[serde(default = "default_table_len")]
    pub table_len: usize,
}

fn default_delta0() -> f64 {
    0.1
}

fn default_max_depth() -> usize {
    DEFAULT_DEPTH
}

fn default_table_len() -> usize {
    64
}

impl ConstructionInputs {
    pub fn new(h0: f64, beta0: f64, eta0: f64) -> ConstructionInputs {
        ConstructionInputs {
            h0,
            beta0,
            eta0,
            m_len: None,
            delta0: default_delta0(),
            max_metric_depth: default_max_depth(),
            table_len: default_table_len(),
        }
    }

    pub fn with_block_len(mut self, m_len: usize) -> ConstructionInputs {
        self.m_len = Some(m_len);
        self
    }
}

/// One inequality of the ledger, `lhs < rhs` (or `≤` when not strict).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub margin: f64,
    pub holds: bool,
}

impl Constraint {
    pub fn new(name: &'static str, lhs: f64, rhs: f64, strict: bool) -> Constraint {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        Constraint {
            name,
            lhs,
            rhs,
            strict,
            margin: rhs - lhs,
            holds,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionParams {
    pub mu: MarkovMeasure,
    pub h_mu: f64,
    /// Topological entropy h(f) of the ambient space.
    pub h_top: f64,
    pub h0: f64,
    pub beta0: f64,
    pub eta0: f64,
    pub eta: f64,
    pub beta: f64,
    pub metric: MeasureMetricConfig,
    pub d_star: f64,
    pub var_eps: f64,
    pub t: usize,
    pub m: u32,
    pub epsilon: f64,
    pub gamma0: f64,
    /// h*(f, 2ε), zero for expansive systems such as subshifts.
    pub tail_entropy: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Root of H(δ) = β on (0, 1/2).
    pub delta_h: f64,
    /// r(ε) = r(1, ε).
    pub r_eps: u128,
    pub n0: usize,
    pub table_len: usize,
    pub m_len: usize,
    pub m1: usize,
    pub gamma_size: usize,
    pub gamma_upper: f64,
    pub ledger: Vec<Constraint>,
}

impl ConstructionParams {
    pub fn scale(&self) -> EpsScale {
        EpsScale::new(self.m).expect("construction scale is valid")
    }

    pub fn shape(&self) -> BlockShape {
        BlockShape {
            m_len: self.m_len,
            m1: self.m1,
            delta2: self.delta2,
        }
    }

    pub fn feasible(&self) -> bool {
        self.ledger.iter().all(|c| c.holds)
    }

    /// Errors with the first violated constraint.
    pub fn check(&self) -> Result<()> {
        match self.ledger.iter().find(|c| !c.holds) {
            None => Ok(()),
            Some(c) => Err(Error::Infeasible(format!(
                "{} fails: {} vs {} (margin {:.3e})",
                c.name, c.lhs, c.rhs, c.margin
            ))),
        }
    }
}

/// Parameters satisfying every ledger constraint, or the first violation.
pub fn derive_params(
    space: &ShiftSpace,
    mu: &MarkovMeasure,
    inputs: &ConstructionInputs,
) -> Result<ConstructionParams> {
    let params = derive_params_unchecked(space, mu, inputs)?;
    params.check()?;
    Ok(params)
}

/// Like [`derive_params`] but returns the ledger even when it fails.
///
/// Without an explicit block length the smallest M in 1..=64 passing the
/// whole ledger is chosen (or 64 when none does).
pub fn derive_params_unchecked(
    space: &ShiftSpace,
    mu: &MarkovMeasure,
    inputs: &ConstructionInputs,
) -> Result<ConstructionParams> {
    let ConstructionInputs {
        h0,
        beta0,
        eta0,
        delta0,
        ..
    } = *inputs;
    if !(eta0 > 0.0 && beta0 > 0.0) {
        return invalid("eta0 and beta0 must be positive");
    }
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return invalid(format!("delta0 must lie in (0, 1), got {delta0}"));
    }
    if mu.alphabet() != space.alphabet() {
        return invalid("measure and space alphabets differ");
    }
    if !mu.supported_on(space)? {
        return invalid("measure is not supported on the space");
    }
    if !mu.is_ergodic() {
        return invalid("measure is not ergodic (support graph not irreducible)");
    }
    let h_mu = mu.entropy();
    let h_top = space
        .entropy_reference()
        .ok_or_else(|| Error::Invalid("construction needs a space with exact entropy".into()))?;
    if !(h0 > 0.0 && h0 < h_mu) {
        return invalid(format!("h0 must lie in (0, h_mu) = (0, {h_mu}), got {h0}"));
    }
    if h_mu > h_top + 1e-9 {
        return invalid("measure entropy exceeds topological entropy");
    }

    let eta = eta0 / 4.0;
    let beta = beta0.min(h_mu - h0).min(h0) / 7.0;
    let m = 1u32;
    let scale = EpsScale::new(m)?;
    let epsilon = scale.epsilon();
    let gamma0 = epsilon;

    // Deepest metric with var(ε) < η/4.
    let alphabet = space.alphabet();
    let mut depth = 1;
    for k in 1..=inputs.max_metric_depth.max(1) {
        let cfg = MeasureMetricConfig::new(k, alphabet)?;
        if var_eps_closed_form(scale, &cfg) < eta / 4.0 {
            depth = k;
        }
    }
    let metric = MeasureMetricConfig::new(depth, alphabet)?;
    let d_star = metric.diameter();
    let var = var_eps_closed_form(scale, &metric);
    let t = (2.0 * d_star / eta).ceil() as usize + 1;

    let delta1 = (1.0 / (2 * t + 1) as f64).min(beta / (2.0 * (h_top + beta)));
    let r_eps = space.count_language(scale.window(1))?;
    let delta_h = invert_binary_entropy(beta);
    let mut d2 = (delta0 / 2.0).min(1.0 / t as f64).min(delta_h);
    if r_eps > 1 {
        d2 = d2.min(beta / (r_eps as f64).ln());
    }
    let delta2 = d2 / 2.0;

    let mut worst_growth: f64 = 0.0;
    let mut n0 = 0;
    for n in 1..=inputs.table_len {
        let r = space.count_language(scale.window(n))? as f64;
        let rate = r.ln() / n as f64;
        if rate > h_top + beta {
            n0 = n;
        }
    }
    for n in n0 + 1..=inputs.table_len {
        let r = space.count_language(scale.window(n))? as f64;
        worst_growth = worst_growth.max(r.ln() / n as f64);
    }

    let base = ConstructionParams {
        mu: mu.clone(),
        h_mu,
        h_top,
        h0,
        beta0,
        eta0,
        eta,
        beta,
        metric,
        d_star,
        var_eps: var,
        t,
        m,
        epsilon,
        gamma0,
        tail_entropy: 0.0,
        delta0,
        delta1,
        delta2,
        delta_h,
        r_eps,
        n0,
        table_len: inputs.table_len,
        m_len: 0,
        m1: 0,
        gamma_size: 0,
        gamma_upper: 0.0,
        ledger: Vec::new(),
    };
    let with_block = |m_len: usize| {
        let mut p = base.clone();
        p.m_len = m_len;
        p.m1 = ((delta1 * m_len as f64).ceil() as usize).max(1);
        p.gamma_size = gamma_target(m_len, h0);
        p.gamma_upper = (m_len as f64 * (h0 + beta)).exp();
        p.ledger = ledger(&p, worst_growth);
        p
    };
    match inputs.m_len {
        Some(0) => invalid("block length M must be positive"),
        Some(m_len) => Ok(with_block(m_len)),
        None => Ok((1..=MAX_BLOCK_LEN)
            .map(with_block)
            .find(ConstructionParams::feasible)
            .unwrap_or_else(|| with_block(MAX_BLOCK_LEN))),
    }
}

fn ledger(p: &ConstructionParams, worst_growth: f64) -> Vec<Constraint> {
    let m = p.m_len as f64;
    let mut out = vec![
        Constraint::new("T > 2D*/eta", 2.0 * p.d_star / p.eta, p.t as f64, true),
        Constraint::new("var(eps) < eta/4", p.var_eps, p.eta / 4.0, true),
        Constraint::new("eps <= gamma0", p.epsilon, p.gamma0, false),
        Constraint::new("h*(f,2eps) < beta", p.tail_entropy, p.beta, true),
        Constraint::new("delta1 < 1/(2T)", p.delta1, 1.0 / (2 * p.t) as f64, true),
        Constraint::new(
            "delta1 (h(f) + beta) < beta",
            p.delta1 * (p.h_top + p.beta),
            p.beta,
            true,
        ),
        Constraint::new("2 delta2 < delta0", 2.0 * p.delta2, p.delta0, true),
        Constraint::new("delta2 < 1/T", p.delta2, 1.0 / p.t as f64, true),
    ];
    if p.r_eps > 1 {
        out.push(Constraint::new(
            "delta2 < beta / ln r(eps)",
            p.delta2,
            p.beta / (p.r_eps as f64).ln(),
            true,
        ));
    }
    out.extend([
        Constraint::new("H(delta2) < beta", binary_entropy(p.delta2), p.beta, true),
        Constraint::new(
            "var(eps) + (delta1 + delta2) D* < eta",
            p.var_eps + (p.delta1 + p.delta2) * p.d_star,
            p.eta,
            true,
        ),
        Constraint::new(
            "ln r(n,eps)/n <= h(f) + beta for n > N0",
            worst_growth,
            p.h_top + p.beta,
            false,
        ),
        Constraint::new("N0/delta1 < M", p.n0 as f64 / p.delta1, m, true),
        Constraint::new("ln(delta1 M)/M < beta", (p.delta1 * m).ln() / m, p.beta, true),
        Constraint::new("1 <= M1", 1.0, p.m1 as f64, false),
        Constraint::new("M1 - 1 < delta1 M", p.m1 as f64 - 1.0, p.delta1 * m, true),
        Constraint::new(
            "e^(M h0) <= |Gamma_M|",
            (m * p.h0).exp(),
            p.gamma_size as f64,
            false,
        ),
        Constraint::new(
            "|Gamma_M| < e^(M (h0 + beta))",
            p.gamma_size as f64,
            p.gamma_upper,
            true,
        ),
    ]);
    out
}

/// Length at which the minimality check compares Λ with the full language.
pub const MINIMALITY_LEN: usize = 12;

/// Everything the desk construction produces, with each check's verdict.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub inputs: ConstructionInputs,
    pub depth: usize,
    pub params: ConstructionParams,
    pub gamma: Gamma,
    pub y_words: usize,
    pub lambda_len: usize,
    pub lambda_words: usize,
    pub shift_failures: usize,
    pub bounds: BoundsReport,
    pub window: EntropyWindow,
    pub measures: MeasureCheck,
    pub minimality: MinimalityCheck,
    pub pass: bool,
}

/// Runs the whole construction at depth `n` and checks every bound.
pub fn construct(
    space: &ShiftSpace,
    mu: &MarkovMeasure,
    inputs: &ConstructionInputs,
    n: usize,
) -> Result<(ConstructionReport, LambdaApprox)> {
    let params = derive_params(space, mu, inputs)?;
    let gamma = build_gamma(space, &params)?;
    let lambda = lambda_language(space, &gamma.words, params.shape(), n)?;
    let bounds = count_bounds_check(space, &lambda, &params)?;
    let window = entropy_window(&bounds, &params);
    let measures = measure_check(&lambda, &params)?;
    let minimality = minimality_check(space, &lambda, MINIMALITY_LEN.min(lambda.lambda_len))?;
    let shift_failures = lambda.shift_failures();
    let pass = params.feasible()
        && bounds.holds()
        && window.holds
        && measures.holds
        && minimality.holds
        && shift_failures == 0;
    let report = ConstructionReport {
        inputs: inputs.clone(),
        depth: n,
        params,
        gamma,
        y_words: lambda.y_count(),
        lambda_len: lambda.lambda_len,
        lambda_words: lambda.lambda.len(),
        shift_failures,
        bounds,
        window,
        measures,
        minimality,
        pass,
    };
    Ok((report, lambda))
}

fn invert_binary_entropy(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> ConstructionParams {
        let mu = MarkovMeasure::bernoulli2(0.5).unwrap();
        let inputs = ConstructionInputs::new(0.3, 0.15, 0.4).with_block_len(10);
        derive_params(&ShiftSpace::full(2), &mu, &inputs).unwrap()
    }

    #[test]
    fn desk_instance_is_feasible() {
        let p = desk();
        assert!((p.beta - 0.15 / 7.0).abs() < 1e-15);
        assert_eq!(p.metric.depth, 1);
        assert_eq!(p.t, 11);
        assert_eq!(p.m1, 1);
        assert_eq!(p.gamma_size, 21);
        assert_eq!(p.n0, 0);
        assert!(p.ledger.iter().all(|c| c.holds && c.margin >= 0.0));
        assert!(binary_entropy(p.delta_h) - p.beta < 1e-12);
    }

    #[test]
    fn h0_above_measure_entropy_is_rejected() {
        let mu = MarkovMeasure::bernoulli2(0.11).unwrap();
        let inputs = ConstructionInputs::new(0.5, 0.15, 0.4).with_block_len(10);
        assert!(matches!(
            derive_params(&ShiftSpace::full(2), &mu, &inputs),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn short_blocks_fail_the_gamma_window() {
        let mu = MarkovMeasure::bernoulli2(0.5).unwrap();
        let inputs = ConstructionInputs::new(0.3, 0.15, 0.4).with_block_len(4);
        let p = derive_params_unchecked(&ShiftSpace::full(2), &mu, &inputs).unwrap();
        // ⌈e^1.2⌉ = 4 but e^{4(0.3+β)} ≈ 3.75.
        assert!(!p.feasible());
        assert!(matches!(p.check(), Err(Error::Infeasible(msg)) if msg.contains("Gamma_M")));
    }

    #[test]
    fn block_length_search_finds_the_first_feasible_m() {
        let mu = MarkovMeasure::bernoulli2(0.5).unwrap();
        let p = derive_params(
            &ShiftSpace::full(2),
            &mu,
            &ConstructionInputs::new(0.3, 0.15, 0.4),
        )
        .unwrap();
        assert!(p.feasible());
        let earlier = ConstructionInputs::new(0.3, 0.15, 0.4).with_block_len(p.m_len - 1);
        assert!(!derive_params_unchecked(&ShiftSpace::full(2), &mu, &earlier)
            .unwrap()
            .feasible());
    }
}
