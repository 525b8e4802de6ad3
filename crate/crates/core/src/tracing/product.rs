//! Two-stage tracers on a product X × Y where X has the approximate product
//! property and Y has tempered specification.
//!
//! Stage one traces the X-coordinates as segments of length
//! n′ = ⌊(1+δ₁′)n⌋ with parameters (δ₁′, δ₂′), which fixes the spacing. Stage
//! two traces the Y-coordinates exactly with the induced gaps
//! t′_k = t_{k+1} − t_k − (n−1), which exceed L_Y(n) once L_Y(n) < δ₁′n.

use serde::Serialize;

use super::gapfn::GapFunction;
use super::search::find_tracer;
use super::{verify_trace, Mode, OrbitTask, TraceReport};
use crate::entropy::EpsScale;
use crate::error::{invalid, Error, Result};
use crate::shift::{Backend, ShiftSpace, Word};

/// (δ₁′, δ₂′) with (1+δ₁′)² < 1+δ₁ and δ₂′(1+δ₁′) < δ₂.
pub fn product_deltas(delta1: f64, delta2: f64) -> (f64, f64) {
    let d1p = ((1.0 + delta1).sqrt() - 1.0) / 2.0;
    let d2p = delta2 / (2.0 * (1.0 + d1p));
    (d1p, d2p)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductTracer {
    pub z: Word,
    pub starts: Vec<usize>,
    pub n_prime: usize,
    pub delta1_prime: f64,
    pub delta2_prime: f64,
    pub y_gaps: Vec<usize>,
    pub report: TraceReport,
}

/// Smallest n with L_Y(n) < δ₁′n for every tabulated n′ ≥ n.
pub fn threshold_length(ly: &GapFunction, delta1_prime: f64) -> Option<usize> {
    let h = ly.horizon();
    (1..=h)
        .rev()
        .take_while(|&n| (ly.table[n - 1] as f64) < delta1_prime * n as f64)
        .last()
}

pub fn two_stage_tracer(
    product: &ShiftSpace,
    task: &OrbitTask,
    scale: EpsScale,
    ly: &GapFunction,
    node_budget: u64,
) -> Result<ProductTracer> {
    let Backend::Product(xs, ys) = product.backend() else {
        return invalid("two-stage tracing needs a product space");
    };
    let Mode::Approximate {
        n, delta1, delta2, ..
    } = task.mode()?
    else {
        return invalid("two-stage tracing needs an approximate-mode task");
    };
    let (d1p, d2p) = product_deltas(delta1, delta2);
    let ly_n = ly.eval(n)?;
    if ly_n as f64 >= d1p * n as f64 {
        return invalid(format!(
            "n={n} too small: L_Y(n)={ly_n} is not below delta1'*n={:.4}",
            d1p * n as f64
        ));
    }
    let m = scale.m() as usize;
    let n_prime = ((1.0 + d1p) * n as f64).floor() as usize;

    // Stage one: X-coordinates as n′-segments.
    let mut xs_points = Vec::with_capacity(task.len());
    let mut ys_points = Vec::with_capacity(task.len());
    for p in &task.points {
        let (u, v) = product.split(p, ys.alphabet());
        let u = xs
            .extend_to(&u, n_prime + m - 1)?
            .ok_or_else(|| Error::NotInLanguage(crate::shift::word::render(&u)))?;
        xs_points.push(u);
        ys_points.push(Word::new(v));
    }
    let x_task = OrbitTask::approximate(xs_points, n_prime, d1p, d2p);
    let x_tracer = find_tracer(xs, &x_task, scale, node_budget)?
        .ok_or_else(|| Error::Infeasible("first factor has no spaced tracer".into()))?;
    let starts = x_tracer.starts.clone();

    // Stage two: Y-coordinates exactly, with the gaps the X-spacing leaves.
    let y_gaps: Vec<usize> = starts.windows(2).map(|w| w[1] - w[0] - (n - 1)).collect();
    if y_gaps.iter().any(|&g| (g as u64) < ly_n) {
        return Err(Error::CheckFailed("induced gap below L_Y(n)".into()));
    }
    let y_task = OrbitTask::exact(ys_points, vec![n; task.len()], Some(y_gaps.clone()));
    let y_tracer = find_tracer(ys, &y_task, scale, node_budget)?
        .ok_or_else(|| Error::Infeasible("second factor has no tracer with the induced gaps".into()))?;

    let total = starts.last().copied().unwrap_or(0) + n + m - 1;
    let fit = |space: &ShiftSpace, z: &Word| -> Result<Vec<u8>> {
        let long = if z.len() < total {
            space
                .extend_to(z, total)?
                .ok_or_else(|| Error::Infeasible("tracer cannot be extended".into()))?
        } else {
            z.clone()
        };
        Ok(long[..total].to_vec())
    };
    let z = product.pair(&fit(xs, &x_tracer.z)?, &fit(ys, &y_tracer.z)?)?;
    let mut checked = task.clone();
    checked.starts = Some(starts.clone());
    let report = verify_trace(product, &z, &checked, scale)?;
    Ok(ProductTracer {
        z,
        starts,
        n_prime,
        delta1_prime: d1p,
        delta2_prime: d2p,
        y_gaps,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn deltas_satisfy_both_constraints() {
        for (d1, d2) in [(0.2, 0.2), (0.01, 0.5), (0.9, 0.05)] {
            let (a, b) = product_deltas(d1, d2);
            assert!((1.0 + a).powi(2) < 1.0 + d1);
            assert!(b * (1.0 + a) < d2);
            assert!(a > 0.0 && b > 0.0);
        }
    }

    #[test]
    fn threshold_for_constant_gap() {
        let ly = GapFunction::constant(2, 200).unwrap();
        let (d1p, _) = product_deltas(0.2, 0.2);
        assert_eq!(threshold_length(&ly, d1p), Some(42));
    }

    #[test]
    fn full_times_golden_traces() {
        let p = ShiftSpace::product(ShiftSpace::full(2), ShiftSpace::golden_mean()).unwrap();
        let ly = GapFunction::constant(2, 200).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 42;
        let points = (0..3).map(|_| p.sample_word(n, &mut rng).unwrap()).collect();
        let task = OrbitTask::approximate(points, n, 0.2, 0.2);
        let t = two_stage_tracer(&p, &task, EpsScale::new(1).unwrap(), &ly, 1 << 20).unwrap();
        assert!(t.report.ok, "{:?}", t.report);
        assert_eq!(t.n_prime, 44);
        assert!(t.y_gaps.iter().all(|&g| g >= 2));
    }

    #[test]
    fn short_segments_are_refused() {
        let p = ShiftSpace::product(ShiftSpace::full(2), ShiftSpace::golden_mean()).unwrap();
        let ly = GapFunction::constant(2, 200).unwrap();
        let task = OrbitTask::approximate(vec![Word::zeros(10)], 10, 0.2, 0.2);
        assert!(two_stage_tracer(&p, &task, EpsScale::new(1).unwrap(), &ly, 1000).is_err());
    }
}
