//! Benchmark fixtures shared by the criterion targets.

use ergokit_core::construction::ConstructionInputs;
use ergokit_core::measures::MarkovMeasure;
use ergokit_core::pressure::Potential;
use ergokit_core::ShiftSpace;

/// The three spaces every counting benchmark runs over.
pub fn spaces() -> Vec<(&'static str, ShiftSpace)> {
    vec![
        ("full2", ShiftSpace::full(2)),
        ("golden", ShiftSpace::golden_mean()),
        ("hereditary-log", ShiftSpace::hereditary_log()),
    ]
}

/// Inputs of the desk construction (h₀ = 0.3, β₀ = 0.15, η₀ = 0.4, M = 10).
pub fn desk_inputs() -> ConstructionInputs {
    ConstructionInputs::new(0.3, 0.15, 0.4).with_block_len(10)
}

pub fn fair_coin() -> MarkovMeasure {
    MarkovMeasure::bernoulli2(0.5).expect("valid probability")
}

/// A range-2 potential with distinct values on every 2-block.
pub fn pair_potential() -> Potential {
    Potential::from_fn(2, 2, |w| [0.3, -1.2, 0.7, 1.9][(w[0] * 2 + w[1]) as usize]).expect("static table")
}
