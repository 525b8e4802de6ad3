use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{chi_extremes, lyapunov, measure_pressure, Potential};
use crate::error::{invalid, Error, Result};
use crate::measures::{CylinderMeasure, MarkovMeasure};
use crate::shift::ShiftSpace;

const GRID: usize = 256;
const TOL: f64 = 1e-10;

/// A one-parameter family of Markov measures, t ∈ [lo, hi].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// Binary Bernoulli measures with P(1) = t.
    Bernoulli {
        #[serde(default)]
        lo: f64,
        #[serde(default = "one")]
        hi: f64,
    },
    /// Entrywise interpolation (1−t)·from + t·to, t ∈ [0, 1].
    Line { from: MarkovMeasure, to: MarkovMeasure },
}

fn one() -> f64 {
    1.0
}

impl Family {
    pub fn bernoulli() -> Family {
        Family::Bernoulli { lo: 0.0, hi: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Bernoulli { .. } => "bernoulli",
            Family::Line { .. } => "line",
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Family::Bernoulli { lo, hi } => (lo, hi),
            Family::Line { .. } => (0.0, 1.0),
        }
    }

    pub fn member(&self, t: f64) -> Result<MarkovMeasure> {
        match self {
            Family::Bernoulli { .. } => MarkovMeasure::bernoulli2(t.clamp(0.0, 1.0)),
            Family::Line { from, to } => from.interpolate(to, t),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return invalid(format!(
                "family parameter range [{lo}, {hi}] must be inside [0, 1]"
            ));
        }
        Ok(())
    }
}

/// What the solver should hit: h_ν, χ_φ(ν) or P_φ(ν).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Entropy(f64),
    Exponent(f64),
    Pressure(f64),
}

impl Target {
    pub fn value(self) -> f64 {
        match self {
            Target::Entropy(v) | Target::Exponent(v) | Target::Pressure(v) => v,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            Target::Entropy(_) => "entropy",
            Target::Exponent(_) => "exponent",
            Target::Pressure(_) => "pressure",
        }
    }

    fn objective(self, mu: &MarkovMeasure, phi: Option<&Potential>) -> Result<f64> {
        let need = || Error::Invalid(format!("{} targets need a potential", self.kind()));
        match self {
            Target::Entropy(_) => Ok(mu.entropy()),
            Target::Exponent(_) => lyapunov(mu, phi.ok_or_else(need)?),
            Target::Pressure(_) => measure_pressure(mu, phi.ok_or_else(need)?),
        }
    }
}

/// Parses `entropy=0.34657`, `exponent=0.25` or `pressure=1.0`.
impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Target> {
        let (kind, value) = s
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("target {s:?} must look like kind=value")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("target value {value:?} is not a number")))?;
        match kind.trim() {
            "entropy" => Ok(Target::Entropy(v)),
            "exponent" => Ok(Target::Exponent(v)),
            "pressure" => Ok(Target::Pressure(v)),
            other => invalid(format!("unknown target kind {other:?}")),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.kind(), self.value())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSolution {
    pub family: &'static str,
    pub target: Target,
    pub parameter: f64,
    pub value: f64,
    pub residual: f64,
    /// Smallest and largest objective values seen on the family.
    pub range: [f64; 2],
    pub ergodic: bool,
    pub measure: MarkovMeasure,
}

/// Finds a family member hitting the target by grid scan plus bisection.
///
/// The first bracketing grid cell from the low end is refined; a target at
/// an interior extremum is reached by golden-section search instead.
pub fn spectrum_solve(
    space: &ShiftSpace,
    phi: Option<&Potential>,
    family: &Family,
    target: Target,
) -> Result<SpectrumSolution> {
    family.validate()?;
    let eval = |t: f64| -> Result<f64> {
        let mu = family.member(t)?;
        target.objective(&mu, phi)
    };
    let goal = target.value();
    let (lo, hi) = family.bounds();
    let ts: Vec<f64> = (0..=GRID)
        .map(|i| lo + (hi - lo) * i as f64 / GRID as f64)
        .collect();
    let fs = ts.iter().map(|&t| eval(t)).collect::<Result<Vec<f64>>>()?;

    let refine = |i: usize, sign: f64| -> Result<(f64, f64)> {
        let (a, b) = (ts[i.saturating_sub(1)], ts[(i + 1).min(GRID)]);
        golden_section(a, b, |t| eval(t).map(|v| sign * v)).map(|(t, v)| (t, sign * v))
    };
    let argmin = (0..=GRID).min_by(|&a, &b| fs[a].total_cmp(&fs[b])).expect("grid");
    let argmax = (0..=GRID).max_by(|&a, &b| fs[a].total_cmp(&fs[b])).expect("grid");
    let min = refine(argmin, 1.0)?;
    let max = refine(argmax, -1.0)?;
    let range = [min.1.min(fs[argmin]), max.1.max(fs[argmax])];
    if goal < range[0] - TOL || goal > range[1] + TOL {
        return Err(Error::Infeasible(format!(
            "{target} lies outside the {} family range [{}, {}]",
            family.name(),
            range[0],
            range[1]
        )));
    }

    let mut best = None;
    for i in 0..=GRID {
        if (fs[i] - goal).abs() <= f64::EPSILON * goal.abs().max(1.0) {
            best = Some(ts[i]);
            break;
        }
        if i < GRID && (fs[i] - goal).signum() != (fs[i + 1] - goal).signum() {
            best = Some(bisect(ts[i], ts[i + 1], fs[i] - goal, |t| {
                eval(t).map(|v| v - goal)
            })?);
            break;
        }
    }
    let parameter = match best {
        Some(t) => t,
        None if (max.1 - goal).abs() <= TOL => max.0,
        None if (min.1 - goal).abs() <= TOL => min.0,
        None => {
            return Err(Error::Infeasible(format!(
                "no member of the {} family reaches {target}",
                family.name()
            )))
        }
    };
    let measure = family.member(parameter)?;
    let value = target.objective(&measure, phi)?;
    if measure.alphabet() != space.alphabet() || !measure.supported_on(space)? {
        return invalid("solution is not supported on the space");
    }
    Ok(SpectrumSolution {
        family: family.name(),
        target,
        parameter,
        value,
        residual: (value - goal).abs(),
        range,
        ergodic: measure.is_ergodic(),
        measure,
    })
}

fn bisect(mut a: f64, mut b: f64, fa: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let sa = fa.signum();
    let mut best = (a, fa.abs());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm.abs() < best.1 {
            best = (mid, fm.abs());
        }
        if fm == 0.0 {
            break;
        }
        if fm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    let fb = f(b)?.abs();
    Ok(if fb < best.1 { b } else { best.0 })
}

/// Minimises f on [a, b]; returns (argmin, min).
fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let candidates = [(a, f(a)?), (b, f(b)?), (c, fc), (d, fd)];
    Ok(candidates
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty"))
}

/// Infimum of P_φ over Bernoulli measures approaching the vertices of the
/// simplex, against χ_min.
#[derive(Clone, Debug, Serialize)]
pub struct PinfReport {
    pub chi_min: f64,
    pub chi_max: f64,
    pub best_probs: Vec<f64>,
    pub best_value: f64,
    pub gap: f64,
    /// Distance of the best member from the nearest point mass.
    pub boundary_distance: f64,
    pub steps: Vec<[f64; 2]>,
}

/// Scans Bernoulli measures with mass 1 − (|A|−1)·10^{−k} on one symbol,
/// k = 1..=k_max, over a full shift.
pub fn pinf_report(space: &ShiftSpace, phi: &Potential, k_max: u32) -> Result<PinfReport> {
    let a = space.alphabet();
    if space.count_language(1)? != a as u128 || space.count_language(2)? != (a * a) as u128 {
        return invalid("the boundary family needs a full shift");
    }
    let (chi_min, chi_max) = chi_extremes(space, phi)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut steps = Vec::new();
    for k in 1..=k_max {
        let small = 10f64.powi(-(k as i32));
        let mut step_best = f64::INFINITY;
        for s in 0..a {
            let mut probs = vec![small; a];
            probs[s] = 1.0 - small * (a - 1) as f64;
            let mu = MarkovMeasure::bernoulli(&probs)?;
            let v = measure_pressure(&mu, phi)?;
            step_best = step_best.min(v);
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((probs, v));
            }
        }
        steps.push([small, step_best]);
    }
    let (best_probs, best_value) = best.ok_or_else(|| Error::Invalid("k_max must be positive".into()))?;
    let boundary_distance = 1.0 - best_probs.iter().copied().fold(0.0, f64::max);
    Ok(PinfReport {
        chi_min,
        chi_max,
        gap: best_value - chi_min,
        best_probs,
        best_value,
        boundary_distance,
        steps,
    })
}
