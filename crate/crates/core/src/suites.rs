//! Invariant suites, one per module, run by `ergokit verify`.
//!
//! Every suite is seeded and fixed-size, so reports are reproducible byte
//! for byte. Timings are deliberately not recorded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::construction::{construct, ConstructionInputs};
use crate::entropy::{
    binary_entropy, entropy_estimate, hamming_separated_set, q_count_and_bound, separated_count,
    spanning_count, EpsScale, HammingOptions, Method,
};
use crate::error::{invalid, Result};
use crate::measures::{
    katok_entropy_estimate, measclose_bound, weak_metric, z_membership, EmpiricalMeasure, MarkovMeasure,
    MeasureMetricConfig, Mixture,
};
use crate::pressure::{
    lyapunov, measure_pressure, pinf_report, pressure_estimate, spectrum_solve, Family, Potential, Target,
};
use crate::shift::hereditary::{zero_trace_threshold, DensityBound};
use crate::shift::{ShiftSpace, Word};
use crate::tracing::{
    compose_tempered_gap, estimate_gap, two_stage_tracer, verify_trace, GapFunction, GapProperty, OrbitTask,
    Sampling,
};

pub const SUITES: [&str; 6] = [
    "shift-core",
    "entropy-metrics",
    "tracing-spec",
    "measures",
    "lambda-construction",
    "pressure",
];

const SEED: u64 = 20240917;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs `name` ("all" or one of [`SUITES`]).
pub fn run_suites(name: &str) -> Result<VerifyReport> {
    let names: Vec<&'static str> = if name == "all" {
        SUITES.to_vec()
    } else {
        match SUITES.iter().find(|s| **s == name) {
            Some(s) => vec![*s],
            None => {
                return invalid(format!(
                    "unknown suite {name:?}; expected all or one of {SUITES:?}"
                ))
            }
        }
    };
    let suites: Vec<SuiteReport> = names.into_iter().map(run_one).collect();
    Ok(VerifyReport {
        pass: suites.iter().all(|s| s.pass),
        suites,
    })
}

fn run_one(suite: &'static str) -> SuiteReport {
    let cases: Vec<(&'static str, CheckFn)> = match suite {
        "shift-core" => vec![
            ("closed-form counts", shift_counts),
            ("factorial and extendable", shift_factorial),
            ("golden beta-shift equals golden mean", shift_beta),
            ("product counts multiply", shift_product),
        ],
        "entropy-metrics" => vec![
            ("full shift estimate is ln 2", entropy_full),
            ("golden mean slope and reference", entropy_golden),
            ("separated equals cylinder count", entropy_separated),
            ("spanning equals separated", entropy_spanning),
            ("Q(n, delta) bound", entropy_q),
            ("Hamming set is separated", entropy_hamming),
        ],
        "tracing-spec" => vec![
            ("gluing gaps", tracing_gluing),
            ("hereditary all-zeros tracer", tracing_hereditary),
            ("union cross-component witness", tracing_union),
            ("product gap composition", tracing_compose),
            ("two-stage product tracers", tracing_two_stage),
        ],
        "measures" => vec![
            ("closed-form entropies", measures_closed_forms),
            ("Katok estimates", measures_katok),
            ("weak metric convexity", measures_convexity),
            ("measclose finite bound", measures_measclose),
        ],
        "lambda-construction" => vec![("desk construction", construction_desk)],
        "pressure" => vec![
            ("binomial identity", pressure_identity),
            ("equilibrium state", pressure_equilibrium),
            ("variational inequality", pressure_variational),
            ("entropy spectrum", pressure_entropy_spectrum),
            ("pressure spectrum", pressure_pressure_spectrum),
            ("infimum pressure", pressure_pinf),
        ],
        _ => unreachable!(),
    };
    let checks: Vec<Check> = cases
        .into_iter()
        .map(|(name, f)| match f() {
            Ok((pass, detail)) => Check { name, pass, detail },
            Err(e) => Check {
                name,
                pass: false,
                detail: json!({ "error": e.to_string() }),
            },
        })
        .collect();
    SuiteReport {
        suite,
        seed: SEED,
        pass: checks.iter().all(|c| c.pass),
        checks,
    }
}

type CheckFn = fn() -> Result<(bool, Value)>;

fn scale(m: u32) -> EpsScale {
    EpsScale::new(m).expect("positive scale")
}

fn fixtures() -> Vec<(&'static str, ShiftSpace)> {
    vec![
        ("full2", ShiftSpace::full(2)),
        ("golden", ShiftSpace::golden_mean()),
        ("hereditary-log", ShiftSpace::hereditary_log()),
    ]
}

fn shift_counts() -> Result<(bool, Value)> {
    let hereditary = [2u128, 3, 5, 8, 12, 17, 23, 34];
    let (mut fib, mut prev) = (2u128, 1u128);
    let mut ok = true;
    for n in 1..=8 {
        ok &= ShiftSpace::full(2).count_language(n)? == 1 << n;
        ok &= ShiftSpace::golden_mean().count_language(n)? == fib;
        ok &= ShiftSpace::hereditary_log().count_language(n)? == hereditary[n - 1];
        (fib, prev) = (fib + prev, fib);
    }
    Ok((ok, json!({ "max_n": 8 })))
}

fn shift_factorial() -> Result<(bool, Value)> {
    let mut ok = true;
    for (_, space) in fixtures() {
        let lang = space.language(8)?;
        for w in lang.iter() {
            for i in 0..8 {
                ok &= space.is_allowed(&w[i..])? && space.is_allowed(&w[..i])?;
            }
            ok &= space.extend_to(w, 9)?.is_some();
        }
    }
    Ok((ok, json!({ "len": 8, "spaces": 3 })))
}

fn shift_beta() -> Result<(bool, Value)> {
    let b = ShiftSpace::from_spec(&crate::SpaceSpec::Beta {
        beta: None,
        expansion: Some("11".into()),
        precision: 64,
        budget: None,
    })?;
    let g = ShiftSpace::golden_mean();
    let mut ok = true;
    for n in 1..=10 {
        let mut left: Vec<Word> = b.language(n)?.to_vec();
        let mut right: Vec<Word> = g.language(n)?.to_vec();
        left.sort();
        right.sort();
        ok &= left == right;
    }
    Ok((ok, json!({ "max_n": 10 })))
}

fn shift_product() -> Result<(bool, Value)> {
    let p = ShiftSpace::product(ShiftSpace::full(2), ShiftSpace::golden_mean())?;
    let mut ok = true;
    for n in 1..=6 {
        let direct = p.language(n)?.len() as u128;
        ok &= direct == (1u128 << n) * ShiftSpace::golden_mean().count_language(n)?;
        ok &= direct == p.count_language(n)?;
    }
    Ok((ok, json!({ "max_n": 6 })))
}

fn entropy_full() -> Result<(bool, Value)> {
    let e = entropy_estimate(&ShiftSpace::full(2), 12, scale(1))?;
    let err = e
        .series
        .iter()
        .map(|p| (p.ln_count_over_n - 2f64.ln()).abs())
        .fold(0.0, f64::max);
    Ok((err == 0.0, json!({ "max_error": err })))
}

fn entropy_golden() -> Result<(bool, Value)> {
    let e = entropy_estimate(&ShiftSpace::golden_mean(), 12, scale(1))?;
    let exact = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let reference = e.reference.unwrap_or(f64::NAN);
    let pass = (e.slope - exact).abs() < 0.02 && (reference - exact).abs() < 1e-10;
    Ok((
        pass,
        json!({ "slope": e.slope, "reference": reference, "exact": exact }),
    ))
}

fn entropy_separated() -> Result<(bool, Value)> {
    let mut cases = 0;
    let mut ok = true;
    for (_, space) in fixtures() {
        for m in 1..=3u32 {
            for n in 1..=(9 - m as usize) {
                let brute = separated_count(&space, n, scale(m), Method::BruteForce)?.count;
                ok &= brute == space.count_language(n + m as usize - 1)?;
                cases += 1;
            }
        }
    }
    Ok((ok, json!({ "cases": cases, "max_window": 8 })))
}

fn entropy_spanning() -> Result<(bool, Value)> {
    let mut ok = true;
    for (_, space) in fixtures() {
        for n in 1..=6 {
            ok &= spanning_count(&space, n, scale(2))? == space.count_language(n + 1)?;
        }
    }
    Ok((ok, json!({ "m": 2, "max_n": 6 })))
}

fn entropy_q() -> Result<(bool, Value)> {
    let mut min_gap = f64::INFINITY;
    let mut ok = true;
    for n in 1..=24u64 {
        for i in 1..=9 {
            let q = q_count_and_bound(n, i as f64 * 0.05)?;
            ok &= q.holds && q.gap > 0.0;
            min_gap = min_gap.min(q.gap);
        }
    }
    Ok((ok, json!({ "min_gap": min_gap })))
}

fn entropy_hamming() -> Result<(bool, Value)> {
    let g = ShiftSpace::golden_mean();
    let set = hamming_separated_set(&g, 10, 0.2, scale(1), 1, HammingOptions::default())?;
    let mut ok = set.words.iter().all(|w| g.is_allowed(w).unwrap_or(false));
    for (i, a) in set.words.iter().enumerate() {
        for b in &set.words[i + 1..] {
            ok &= crate::entropy::hamming::is_separated(a, b, 10, 0.2, scale(1));
        }
    }
    Ok((ok, json!({ "size": set.words.len() })))
}

fn tracing_gluing() -> Result<(bool, Value)> {
    let sampling = Sampling {
        seed: SEED,
        tasks: 50,
        exhaustive_len: Some(4),
        ..Default::default()
    };
    let prop = GapProperty::Gluing { max_gap: 4 };
    let full = estimate_gap(&ShiftSpace::full(2), scale(1), &prop, &sampling)?.estimate;
    let golden = estimate_gap(&ShiftSpace::golden_mean(), scale(1), &prop, &sampling)?.estimate;
    Ok((
        full == Some(1) && golden == Some(2),
        json!({ "full2": full, "golden": golden }),
    ))
}

fn tracing_hereditary() -> Result<(bool, Value)> {
    let space = ShiftSpace::hereditary_log();
    let delta2 = 0.3;
    let Some(threshold) = zero_trace_threshold(&DensityBound::log(), 2, delta2, 1000)? else {
        return Ok((false, json!({ "threshold": null })));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    for _ in 0..20 {
        let n = rng.random_range(threshold + 1..=threshold + 4);
        let k = rng.random_range(1..=5);
        let points: Vec<Word> = (0..k)
            .map(|_| space.sample_word(n, &mut rng))
            .collect::<Result<_>>()?;
        let mut task = OrbitTask::approximate(points, n, 0.2, delta2);
        task.starts = Some((0..k).map(|i| i * n).collect());
        ok &= verify_trace(&space, &Word::zeros(k * n), &task, scale(1))?.ok;
    }
    Ok((ok, json!({ "threshold": threshold, "tasks": 20 })))
}

fn tracing_union() -> Result<(bool, Value)> {
    let sampling = Sampling {
        seed: SEED,
        tasks: 10,
        exhaustive_len: Some(2),
        ..Default::default()
    };
    let e = estimate_gap(
        &ShiftSpace::hereditary_union(),
        scale(1),
        &GapProperty::Gluing { max_gap: 6 },
        &sampling,
    )?;
    let witness = e.witnesses.first().map(|w| {
        w.task
            .points
            .iter()
            .map(|p| crate::shift::word::render(p))
            .collect::<Vec<_>>()
    });
    Ok((
        e.estimate.is_none() && witness.is_some(),
        json!({ "witness": witness }),
    ))
}

fn tracing_compose() -> Result<(bool, Value)> {
    let lx = GapFunction::from_fn(200, |n| 1 + (n as f64).sqrt() as u64)?;
    let ly = GapFunction::constant(2, 200)?;
    let l = compose_tempered_gap(&lx, &ly)?;
    let mut ok = true;
    for n in 1..=l.horizon() {
        let y = ly.eval(n)?;
        ok &= l.eval(n)? == lx.eval(y as usize)? + y + lx.eval(n)? - 1;
    }
    Ok((ok, json!({ "horizon": l.horizon() })))
}

fn tracing_two_stage() -> Result<(bool, Value)> {
    let p = ShiftSpace::product(ShiftSpace::full(2), ShiftSpace::golden_mean())?;
    let ly = GapFunction::constant(2, 500)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    for _ in 0..10 {
        let n = rng.random_range(42..=50);
        let k = rng.random_range(1..=4);
        let points = (0..k)
            .map(|_| p.sample_word(n, &mut rng))
            .collect::<Result<_>>()?;
        let task = OrbitTask::approximate(points, n, 0.2, 0.2);
        ok &= two_stage_tracer(&p, &task, scale(1), &ly, 1 << 20)?.report.ok;
    }
    Ok((ok, json!({ "tasks": 10 })))
}

fn measures_closed_forms() -> Result<(bool, Value)> {
    let mut err: f64 = 0.0;
    for p in [0.11, 0.3, 0.5] {
        err = err.max((MarkovMeasure::bernoulli2(p)?.entropy() - binary_entropy(p)).abs());
    }
    let parry = MarkovMeasure::max_entropy(&ShiftSpace::golden_mean())?;
    err = err.max((parry.entropy() - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs());
    Ok((err < 1e-10, json!({ "max_error": err })))
}

fn measures_katok() -> Result<(bool, Value)> {
    let mut worst: f64 = 0.0;
    for p in [0.5, 0.11] {
        let mu = MarkovMeasure::bernoulli2(p)?;
        for delta in [0.1, 0.2] {
            let k = katok_entropy_estimate(&mu, 14, scale(1), delta, 1 << 20)?;
            worst = worst.max((k - binary_entropy(p)).abs());
        }
    }
    Ok((worst < 0.08, json!({ "n": 14, "max_error": worst })))
}

fn random_markov(rng: &mut ChaCha8Rng) -> Result<MarkovMeasure> {
    let a: f64 = rng.random_range(0.02..0.98);
    let b: f64 = rng.random_range(0.02..0.98);
    MarkovMeasure::from_matrix(vec![vec![1.0 - a, a], vec![b, 1.0 - b]])
}

fn measures_convexity() -> Result<(bool, Value)> {
    let cfg = MeasureMetricConfig::new(4, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    for _ in 0..20 {
        let (m1, m2, n1, n2) = (
            random_markov(&mut rng)?,
            random_markov(&mut rng)?,
            random_markov(&mut rng)?,
            random_markov(&mut rng)?,
        );
        let t: f64 = rng.random_range(0.0..1.0);
        let mix =
            |x: &MarkovMeasure, y: &MarkovMeasure| Mixture::new(vec![(t, x.clone()), (1.0 - t, y.clone())]);
        let lhs = weak_metric(&mix(&m1, &m2)?, &mix(&n1, &n2)?, &cfg)?;
        let rhs = t * weak_metric(&m1, &n1, &cfg)? + (1.0 - t) * weak_metric(&m2, &n2, &cfg)?;
        ok &= lhs <= rhs + 1e-12;
    }
    Ok((ok, json!({ "quadruples": 20 })))
}

fn measures_measclose() -> Result<(bool, Value)> {
    let full = ShiftSpace::full(2);
    let mu = MarkovMeasure::bernoulli2(0.5)?;
    let cfg = MeasureMetricConfig::new(2, 2)?;
    let mut members = 0;
    let mut ok = true;
    for seed in 0..10 {
        let x = mu.sample_seeded(1000, SEED + seed);
        let z = z_membership(&full, &x, 200, 0.12, &mu, 600, &cfg)?;
        if !z.member {
            continue;
        }
        members += 1;
        for n in (200..=600).step_by(50) {
            let e = EmpiricalMeasure::new(&x, n, cfg.depth, 2)?;
            ok &= weak_metric(&e, &mu, &cfg)? < measclose_bound(0.12, 200, cfg.diameter(), n);
        }
    }
    Ok((ok && members > 0, json!({ "members": members })))
}

fn construction_desk() -> Result<(bool, Value)> {
    let space = ShiftSpace::full(2);
    let mu = MarkovMeasure::max_entropy(&space)?;
    let inputs = ConstructionInputs::new(0.3, 0.15, 0.4).with_block_len(10);
    let (r, _) = construct(&space, &mu, &inputs, 3)?;
    Ok((
        r.pass && r.gamma.words.len() == 21,
        json!({
            "gamma": r.gamma.words.len(),
            "y_words": r.y_words,
            "lambda_words": r.lambda_words,
            "window": [r.window.lower, r.window.upper],
            "slack": r.window.slack,
        }),
    ))
}

fn ln_one_plus_e() -> f64 {
    (1.0 + 1f64.exp()).ln()
}

fn pressure_identity() -> Result<(bool, Value)> {
    let phi = Potential::indicator(2, &[1], 1.0)?;
    let r = pressure_estimate(&ShiftSpace::full(2), &phi, 14, scale(1))?;
    let err = r
        .series
        .iter()
        .map(|p| (p.value - ln_one_plus_e()).abs())
        .fold(0.0, f64::max);
    Ok((err < 1e-12, json!({ "max_error": err })))
}

fn pressure_equilibrium() -> Result<(bool, Value)> {
    let phi = Potential::indicator(2, &[1], 1.0)?;
    let e = 1f64.exp();
    let v = measure_pressure(&MarkovMeasure::bernoulli2(e / (1.0 + e))?, &phi)?;
    Ok(((v - ln_one_plus_e()).abs() < 1e-10, json!({ "value": v })))
}

fn pressure_variational() -> Result<(bool, Value)> {
    let full = ShiftSpace::full(2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let mu = random_markov(&mut rng)?;
        let table: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let phi = Potential::from_fn(2, 2, |w| table[(w[0] * 2 + w[1]) as usize])?;
        let top = pressure_estimate(&full, &phi, 14, scale(2))?.value;
        worst = worst.max(measure_pressure(&mu, &phi)? - top);
    }
    Ok((worst <= 0.05, json!({ "max_excess": worst })))
}

fn pressure_entropy_spectrum() -> Result<(bool, Value)> {
    let full = ShiftSpace::full(2);
    let fam = Family::Bernoulli { lo: 0.0, hi: 0.5 };
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let h = 2f64.ln() * i as f64 / 20.0;
        let s = spectrum_solve(&full, None, &fam, Target::Entropy(h))?;
        worst = worst.max((binary_entropy(s.parameter) - h).abs());
    }
    Ok((worst <= 1e-10, json!({ "targets": 20, "max_residual": worst })))
}

fn pressure_pressure_spectrum() -> Result<(bool, Value)> {
    let full = ShiftSpace::full(2);
    let phi = Potential::indicator(2, &[1], 1.0)?;
    let e = 1f64.exp();
    let fam = Family::Bernoulli {
        lo: 0.0,
        hi: e / (1.0 + e),
    };
    let mut worst: f64 = 0.0;
    for i in 1..=10 {
        let alpha = ln_one_plus_e() * i as f64 / 10.0;
        let s = spectrum_solve(&full, Some(&phi), &fam, Target::Pressure(alpha))?;
        let mu = MarkovMeasure::bernoulli2(s.parameter)?;
        worst = worst.max((mu.entropy() + lyapunov(&mu, &phi)? - alpha).abs());
    }
    Ok((worst <= 1e-10, json!({ "targets": 10, "max_residual": worst })))
}

fn pressure_pinf() -> Result<(bool, Value)> {
    let phi = Potential::indicator(2, &[1], 1.0)?;
    let r = pinf_report(&ShiftSpace::full(2), &phi, 8)?;
    Ok((
        r.gap <= 1e-3 && r.boundary_distance <= 1e-3,
        json!({ "chi_min": r.chi_min, "gap": r.gap, "boundary_distance": r.boundary_distance }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suites("nope").is_err());
    }

    #[test]
    fn shift_suite_passes() {
        let r = run_suites("shift-core").unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.suites[0].checks.len(), 4);
    }
}
