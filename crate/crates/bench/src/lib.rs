//! Fixtures shared by the benchmarks in `benches/`.

use qsupermap::linalg::random;
use qsupermap::realization::random_deterministic_supermap;
use qsupermap::{QuantumOperation, Supermap, SupermapDims};

/// Deterministic supermap on `d`-dimensional spaces with memory `dim_b` and `dim_a` Kraus operators.
pub fn supermap_fixture(d: usize, dim_b: usize, dim_a: usize, seed: u64) -> Supermap {
    let mut rng = random::rng(seed);
    random_deterministic_supermap(&mut rng, SupermapDims::new(d, d, d, d), dim_b, dim_a)
        .expect("valid fixture dimensions")
}

pub fn channel_fixture(d: usize, seed: u64) -> QuantumOperation {
    QuantumOperation::random_channel(d, d, d, seed).expect("valid fixture dimensions")
}
