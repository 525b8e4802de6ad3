use std::collections::HashSet;

use ergokit_core::construction::{
    build_gamma, construct, count_bounds_check, derive_params, entropy_window, lambda_language, BlockShape,
    ConstructionInputs, ConstructionParams, LambdaApprox,
};
use ergokit_core::entropy::{hamming_separated_set, HammingOptions};
use ergokit_core::measures::MarkovMeasure;
use ergokit_core::tracing::{verify_trace, OrbitTask};
use ergokit_core::{EpsScale, ShiftSpace, SpaceSpec, Word};

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn one() -> EpsScale {
    EpsScale::new(1).unwrap()
}

fn desk_inputs() -> ConstructionInputs {
    ConstructionInputs::new(0.3, 0.15, 0.4).with_block_len(10)
}

fn half() -> MarkovMeasure {
    MarkovMeasure::bernoulli2(0.5).unwrap()
}

/// Desk parameters with the block shape overridden.
fn params_with(shape: BlockShape, delta1: f64) -> ConstructionParams {
    let mut p = derive_params(&ShiftSpace::full(2), &half(), &desk_inputs()).unwrap();
    p.m_len = shape.m_len;
    p.m1 = shape.m1;
    p.delta2 = shape.delta2;
    p.delta1 = delta1;
    p
}

/// Independent oracle: every binary word of length t_{n+1}(ξ) whose blocks
/// each lie within `allowance` mismatches of some Γ word.
fn brute_y(gamma: &[Word], m_len: usize, m1: usize, n: usize, allowance: usize) -> Vec<Vec<Word>> {
    let mut out = Vec::new();
    for code in 0..m1.pow(n as u32) {
        let xi: Vec<usize> = (0..n).rev().map(|k| code / m1.pow(k as u32) % m1).collect();
        let starts: Vec<usize> = (0..n).map(|k| (0..k).map(|j| m_len + xi[j]).sum()).collect();
        let len: usize = xi.iter().map(|g| m_len + g).sum();
        let mut words = Vec::new();
        for bits in 0u64..1 << len {
            let word: Vec<u8> = (0..len).rev().map(|i| (bits >> i & 1) as u8).collect();
            let ok = starts.iter().all(|&s| {
                gamma
                    .iter()
                    .any(|g| g.iter().zip(&word[s..s + m_len]).filter(|(a, b)| a != b).count() <= allowance)
            });
            if ok {
                words.push(Word::new(word));
            }
        }
        out.push(words);
    }
    out
}

fn y_words(l: &LambdaApprox) -> Vec<Vec<Word>> {
    l.y.iter().map(|c| c.words.clone()).collect()
}

#[test]
fn mismatch_language_matches_brute_force() {
    let gamma = vec![w("0000"), w("1111")];
    let shape = BlockShape {
        m_len: 4,
        m1: 2,
        delta2: 0.3,
    };
    let l = lambda_language(&ShiftSpace::full(2), &gamma, shape, 2).unwrap();
    assert_eq!(l.allowance, 1);
    assert_eq!(y_words(&l), brute_y(&gamma, 4, 2, 2, 1));
    // Each block has 2·(1 + 4) fillings and every gap symbol is free.
    let counts: Vec<usize> = l.y.iter().map(|c| c.words.len()).collect();
    assert_eq!(counts, vec![100, 200, 200, 400]);

    let p = params_with(shape, 0.5);
    let b = count_bounds_check(&ShiftSpace::full(2), &l, &p).unwrap();
    assert_eq!(b.q, 5);
    assert!(b.holds(), "{b:?}");
}

#[test]
fn exact_regime_counts_are_powers_of_gamma() {
    let gamma = vec![w("0011"), w("1100")];
    let shape = BlockShape {
        m_len: 4,
        m1: 1,
        delta2: 0.2,
    };
    let l = lambda_language(&ShiftSpace::full(2), &gamma, shape, 2).unwrap();
    assert_eq!(l.y_count(), 4);
    let p = params_with(shape, 0.1);
    let b = count_bounds_check(&ShiftSpace::full(2), &l, &p).unwrap();
    assert_eq!(b.lower, 4.0);
    assert_eq!(b.cylinder_blocks, 4);
    assert!(b.separated && b.unique_blocks && b.holds());
}

#[test]
fn single_block_depth_is_degenerate_but_consistent() {
    let gamma = vec![w("0011"), w("1100")];
    let shape = BlockShape {
        m_len: 4,
        m1: 1,
        delta2: 0.2,
    };
    let l = lambda_language(&ShiftSpace::full(2), &gamma, shape, 1).unwrap();
    assert_eq!(l.lambda_len, 0);
    let p = params_with(shape, 0.1);
    let b = count_bounds_check(&ShiftSpace::full(2), &l, &p).unwrap();
    assert!(b.holds());
    assert!(b.upper_ln - (b.lambda_words as f64).ln() > 1.0);
}

fn separated_gamma(m_len: usize, delta0: f64) -> Vec<Word> {
    hamming_separated_set(
        &ShiftSpace::full(2),
        m_len,
        delta0,
        one(),
        1,
        HammingOptions::default(),
    )
    .unwrap()
    .words
}

#[test]
fn distinct_blocks_force_separation() {
    // Distance ≥ 3 between Γ words, one mismatch allowed per block: 2δ₂ < δ₀.
    let (delta0, delta2) = (0.45, 0.2);
    for m_len in [5, 6] {
        let gamma = separated_gamma(m_len, delta0);
        assert!(gamma.len() >= 2);
        for (n, m1) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
            let shape = BlockShape { m_len, m1, delta2 };
            let l = lambda_language(&ShiftSpace::full(2), &gamma, shape, n).unwrap();
            let p = params_with(shape, 0.45);
            let b = count_bounds_check(&ShiftSpace::full(2), &l, &p).unwrap();
            assert!(b.unique_blocks && b.separated, "M={m_len} n={n} M1={m1}");
            assert!(b.lower_holds);
        }
    }
}

#[test]
fn mismatch_regime_window_against_brute_force() {
    let gamma = separated_gamma(6, 0.45);
    let shape = BlockShape {
        m_len: 6,
        m1: 1,
        delta2: 0.2,
    };
    let l = lambda_language(&ShiftSpace::full(2), &gamma, shape, 3).unwrap();
    let brute = brute_y(&gamma, 6, 1, 3, 1);
    assert_eq!(y_words(&l), brute);
    let lambda: HashSet<Word> = brute[0]
        .iter()
        .flat_map(|y| (0..7).map(move |t| y.factor(t, l.lambda_len)))
        .collect();
    assert_eq!(lambda.len(), l.lambda.len());
    let p = params_with(shape, 0.1);
    let b = count_bounds_check(&ShiftSpace::full(2), &l, &p).unwrap();
    assert!((lambda.len() as f64).ln() < b.upper_ln);
    let win = entropy_window(&b, &p);
    assert!(win.lower <= win.upper);
}

#[test]
fn y_words_trace_their_blocks() {
    let gamma = separated_gamma(6, 0.45);
    let (m_len, delta1, delta2) = (6, 0.2, 0.2);
    let shape = BlockShape { m_len, m1: 2, delta2 };
    let l = lambda_language(&ShiftSpace::full(2), &gamma, shape, 2).unwrap();
    for class in &l.y {
        for y in class.words.iter().step_by(7) {
            let points: Vec<Word> = class
                .starts
                .iter()
                .map(|&s| gamma[l.block_matches(y, s)[0]].clone())
                .collect();
            let mut task = OrbitTask::approximate(points, m_len, delta1, delta2);
            task.starts = Some(class.starts.clone());
            let r = verify_trace(&ShiftSpace::full(2), y, &task, one()).unwrap();
            assert!(r.ok, "{y} {:?}", r.violations);
        }
    }
}

#[test]
fn desk_construction_passes_every_check() {
    let space = ShiftSpace::full(2);
    let (report, lambda) = construct(&space, &half(), &desk_inputs(), 3).unwrap();
    let p = &report.params;
    assert!(p.ledger.iter().all(|c| c.holds));
    assert_eq!(report.gamma.words.len(), 21);
    assert!((21.0f64).ln() >= 3.0 && 21.0 < (10.0 * (0.3 + p.beta)).exp());
    assert_eq!(report.y_words, 21usize.pow(3));
    assert!(report.bounds.holds(), "{:?}", report.bounds);
    assert!(report.window.holds, "{:?}", report.window);
    assert!((report.window.lower - 21f64.ln() * 3.0 / (30.0 * (1.0 + p.delta1))).abs() < 1e-12);
    assert!(report.measures.holds);
    assert!(report.minimality.holds);
    assert!(report.minimality.lambda_count < 4096);
    assert_eq!(report.shift_failures, 0);
    assert!(report.pass);

    // Every Γ word sits in B(μ, η) and the set is (M, δ₀, γ₀)-separated.
    for (i, a) in report.gamma.words.iter().enumerate() {
        let ones = a.iter().filter(|&&s| s == 1).count();
        assert!((4..=6).contains(&ones));
        for b in &report.gamma.words[i + 1..] {
            let d = a.iter().zip(b.iter()).filter(|(x, y)| x != y).count();
            assert!(d as f64 > p.delta0 * 10.0);
        }
    }

    let spec = lambda.forbidden_spec(&space, 8).unwrap();
    let sft = ShiftSpace::from_spec(&spec).unwrap();
    let c = sft.count_language(8).unwrap();
    assert!(c > 0 && c <= lambda.factor_count(8).unwrap() as u128 * 12);
    let json = serde_json::to_string(&SpaceSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap())
        .unwrap();
    assert!(json.contains("\"backend\":\"sft\""));
}

#[test]
fn gamma_is_rejected_when_the_window_is_empty() {
    let mut p = derive_params(&ShiftSpace::full(2), &half(), &desk_inputs()).unwrap();
    p.gamma_upper = 20.5;
    assert!(build_gamma(&ShiftSpace::full(2), &p).is_err());
}
