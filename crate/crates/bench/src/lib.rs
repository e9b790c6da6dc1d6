//! Shared fixtures for the criterion benchmarks.

use l1sketch::harness::seed::stream;
use l1sketch::{derive_rng, expand_to_binary, gv_construct, orthonormalize_rows, MeasurementMatrix, SparseCodebook};

/// Binary codebook from the `(q, k, 1/2)` greedy code.
pub fn codebook(q: u32, k: usize) -> SparseCodebook {
    expand_to_binary(&gv_construct(q, k, 0.5).expect("valid fixture parameters"))
}

/// Gaussian measurement matrix with orthonormalized rows.
pub fn orthonormal_matrix(rows: usize, cols: usize, seed: u64) -> MeasurementMatrix {
    let g = MeasurementMatrix::gaussian(rows, cols, &mut derive_rng(seed, 0, stream::MATRIX));
    orthonormalize_rows(&g).expect("rows ≤ cols")
}
