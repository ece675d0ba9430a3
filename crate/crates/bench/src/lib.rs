//! Fixtures shared by the criterion benchmarks in `benches/`.

use subspace_core::harness::synthetic;
use subspace_core::{seed, DenseMatrix, SparseBinaryMatrix};

/// Seeded Gaussian `n × d` matrix.
pub fn dense_fixture(n: usize, d: usize) -> DenseMatrix {
    synthetic::gaussian_matrix(n, d, &mut seed::rng(0xbe7c))
}

/// Seeded sparse binary `n × d` matrix with the given density.
pub fn sparse_fixture(n: usize, d: usize, density: f64) -> SparseBinaryMatrix {
    synthetic::sparse_binary_matrix(n, d, density, &mut seed::rng(0xbe7d)).expect("density in [0, 1]")
}
