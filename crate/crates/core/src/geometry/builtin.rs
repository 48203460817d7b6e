//! Ready-made sets used in examples and tests.

use super::{Block, DigitSet, GridScheme, SetSpec, Tail};

/// Middle-thirds Cantor set as a base-3 digit scheme.
pub fn cantor_middle_thirds() -> SetSpec {
    SetSpec::GridScheme(GridScheme::constant_1d(3, 0.0, 1.0, &[0, 2]).expect("valid scheme"))
}

pub fn harmonic_closure() -> SetSpec {
    SetSpec::HarmonicClosure
}

fn spread(count: u32, step: u32) -> DigitSet {
    DigitSet::from_1d(&(0..count).map(|i| i * step).collect::<Vec<_>>())
}

/// Pair of base-100 Cantor sets `(E, F)` whose digit counts alternate on the
/// scales `n_k = 5^k`, `k = 0..=k_max`. Going from level `m` to `m + 1`, `E`
/// keeps 27 digits for `m` in `[n_k, 2 n_k)`, 3 digits for `m` in
/// `[2 n_k, 3 n_k)` and 9 otherwise; `F` does the same on `[3 n_k, 4 n_k)`
/// and `[4 n_k, 5 n_k)`. `E` lives in `[0,1]` and `F` in `[2,3]`.
pub fn cantor_pair(k_max: u32) -> (SetSpec, SetSpec) {
    let make = |offset: u32, lower: f64| {
        let mut blocks = vec![Block { start: 1, digits: spread(9, 11) }];
        for k in 0..=k_max {
            let n = 5u32.pow(k);
            blocks.push(Block { start: offset * n + 1, digits: spread(27, 3) });
            blocks.push(Block { start: (offset + 1) * n + 1, digits: spread(3, 33) });
            blocks.push(Block { start: (offset + 2) * n + 1, digits: spread(9, 11) });
        }
        let g = GridScheme::new(100, vec![lower], vec![lower + 1.0], vec![], Tail::Blocks(blocks)).expect("valid scheme");
        SetSpec::GridScheme(g)
    };
    (make(1, 0.0), make(3, 2.0))
}

/// Levels `2 n_k` and `4 n_k` at which the pair attains its extreme rates.
pub fn cantor_pair_levels(k_max: u32) -> Vec<u32> {
    (0..=k_max).flat_map(|k| [2 * 5u32.pow(k), 4 * 5u32.pow(k)]).collect()
}
