use ergokit_core::shift::hereditary::{zero_trace_threshold, DensityBound};
use ergokit_core::shift::Word;
use ergokit_core::tracing::{
    compose_tempered_gap, estimate_gap, find_gluing_tracer, find_tracer, two_stage_tracer, verify_trace,
    GapFunction, GapProperty, OrbitTask, Sampling,
};
use ergokit_core::{EpsScale, ShiftSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn one() -> EpsScale {
    EpsScale::new(1).unwrap()
}

fn exhaustive(len: usize) -> Sampling {
    Sampling {
        tasks: 100,
        exhaustive_len: Some(len),
        ..Default::default()
    }
}

#[test]
fn gluing_gap_full_shift_is_one() {
    let e = estimate_gap(
        &ShiftSpace::full(2),
        one(),
        &GapProperty::Gluing { max_gap: 4 },
        &exhaustive(6),
    )
    .unwrap();
    assert_eq!(e.estimate, Some(1));
    assert!(e.tasks_checked >= 126 * 126);
}

#[test]
fn gluing_gap_golden_mean_is_two() {
    let e = estimate_gap(
        &ShiftSpace::golden_mean(),
        one(),
        &GapProperty::Gluing { max_gap: 4 },
        &exhaustive(6),
    )
    .unwrap();
    assert_eq!(e.estimate, Some(2));
    let w = &e.witnesses[0];
    assert_eq!(w.needed, Some(2));
    assert!(w.task.points[0].last() == Some(&1) && w.task.points[1].first() == Some(&1));
}

#[test]
fn hereditary_zero_tracer_passes_verification() {
    let space = ShiftSpace::hereditary_log();
    let delta2 = 0.3;
    let threshold = zero_trace_threshold(&DensityBound::log(), 2, delta2, 1000)
        .unwrap()
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n = rng.random_range(threshold + 1..=threshold + 4);
        let k = rng.random_range(1..=5);
        let points: Vec<Word> = (0..k).map(|_| space.sample_word(n, &mut rng).unwrap()).collect();
        let mut task = OrbitTask::approximate(points, n, 0.2, delta2);
        task.starts = Some((0..k).map(|i| i * n).collect());
        let z = Word::zeros(k * n);
        let r = verify_trace(&space, &z, &task, one()).unwrap();
        assert!(r.ok, "{r:?}");
        // The search finds the same tracer: zeros come first in every branch.
        task.starts = None;
        let t = find_tracer(&space, &task, one(), 1 << 16).unwrap().unwrap();
        assert_eq!(t.z, z);
    }
}

#[test]
fn union_space_cross_component_failure() {
    let sampling = Sampling {
        tasks: 20,
        exhaustive_len: Some(2),
        ..Default::default()
    };
    let union = ShiftSpace::hereditary_union();
    let e = estimate_gap(&union, one(), &GapProperty::Gluing { max_gap: 6 }, &sampling).unwrap();
    assert_eq!(e.estimate, None);
    assert!(!e.witnesses.is_empty());
    for w in &e.witnesses {
        let syms: Vec<u8> = w.task.points.iter().flat_map(|p| p.iter().copied()).collect();
        assert!(syms.contains(&1) && syms.contains(&2), "{w:?}");
    }
    // Approximate product still holds through the all-zeros point.
    let prop = GapProperty::ApproximateProduct {
        delta1: 0.2,
        delta2: 0.3,
        n_min: 28,
        n_max: 30,
    };
    let s = Sampling {
        tasks: 20,
        node_budget: 1 << 16,
        ..Default::default()
    };
    let a = estimate_gap(&union, one(), &prop, &s).unwrap();
    assert_eq!(a.estimate, Some(28));
}

#[test]
fn unit_gaps_at_scale_one_are_exact_matching() {
    let full = ShiftSpace::full(3);
    let points: Vec<Word> = ["012", "2", "10"].iter().map(|s| s.parse().unwrap()).collect();
    let task = OrbitTask::exact(points.clone(), vec![3, 1, 2], Some(vec![1, 1]));
    let concat: Vec<u8> = points.iter().flat_map(|p| p.iter().copied()).collect();
    assert!(verify_trace(&full, &concat, &task, one()).unwrap().ok);
    let mut other = concat.clone();
    other[3] = 0;
    assert!(!verify_trace(&full, &other, &task, one()).unwrap().ok);
}

#[test]
fn gluing_bound_gives_spaced_tracers() {
    // Golden mean glues with M = 2; spaced tracing then works once δ₁n > 1.
    let g = ShiftSpace::golden_mean();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let delta1 = 0.25;
    for n in 5..=12 {
        for _ in 0..20 {
            let k = rng.random_range(2..=5);
            let points = (0..k).map(|_| g.sample_word(n, &mut rng).unwrap()).collect();
            let task = OrbitTask::approximate(points, n, delta1, 0.2);
            let t = find_tracer(&g, &task, one(), 1 << 18).unwrap();
            assert!(t.is_some(), "n={n}");
        }
    }
}

#[test]
fn product_composition_and_two_stage_tracers() {
    let lx = GapFunction::constant(1, 500).unwrap();
    let ly = GapFunction::constant(2, 500).unwrap();
    let l = compose_tempered_gap(&lx, &ly).unwrap();
    for n in 1..=l.horizon() {
        let y = ly.eval(n).unwrap();
        assert_eq!(
            l.eval(n).unwrap(),
            lx.eval(y as usize).unwrap() + y + lx.eval(n).unwrap() - 1
        );
    }
    let p = ShiftSpace::product(ShiftSpace::full(2), ShiftSpace::golden_mean()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let n = rng.random_range(42..=60);
        let k = rng.random_range(1..=5);
        let points = (0..k).map(|_| p.sample_word(n, &mut rng).unwrap()).collect();
        let task = OrbitTask::approximate(points, n, 0.2, 0.2);
        let t = two_stage_tracer(&p, &task, one(), &ly, 1 << 20).unwrap();
        assert!(t.report.ok, "{:?}", t.report);
    }
}

fn arb_space() -> impl Strategy<Value = ShiftSpace> {
    prop_oneof![
        Just(ShiftSpace::full(2)),
        Just(ShiftSpace::golden_mean()),
        Just(ShiftSpace::hereditary_log()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn found_tracers_verify(space in arb_space(), seed in any::<u64>(), m in 1u32..=2, approx in any::<bool>()) {
        let scale = EpsScale::new(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=4);
        if approx {
            let n = rng.random_range(4..=10);
            let points = (0..k).map(|_| space.sample_word(scale.window(n), &mut rng).unwrap()).collect();
            let mut task = OrbitTask::approximate(points, n, 0.3, 0.4);
            if let Ok(Some(t)) = find_tracer(&space, &task, scale, 1 << 16) {
                task.starts = Some(t.starts.clone());
                prop_assert!(verify_trace(&space, &t.z, &task, scale).unwrap().ok);
            }
        } else {
            let lengths: Vec<usize> = (0..k).map(|_| rng.random_range(1..=5)).collect();
            let points = lengths.iter().map(|&l| space.sample_word(scale.window(l), &mut rng).unwrap()).collect();
            let mut task = OrbitTask::exact(points, lengths, None);
            if let Ok(Some(t)) = find_gluing_tracer(&space, &task, 4, scale, 1 << 16) {
                task.gaps = t.gaps.clone();
                prop_assert!(verify_trace(&space, &t.z, &task, scale).unwrap().ok);
            }
        }
    }
}
