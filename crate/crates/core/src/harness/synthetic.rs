//! Seeded synthetic datasets.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseBinaryMatrix};

/// `n × d` matrix of i.i.d. standard normal entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> DenseMatrix {
    let values = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_raw(n, d, values)
}

/// Gaussian rows with per-column standard deviations `stds`.
pub fn gaussian_matrix_with_stds<R: Rng + ?Sized>(n: usize, stds: &[f64], rng: &mut R) -> DenseMatrix {
    let d = stds.len();
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n {
        values.extend(stds.iter().map(|s| s * rng.sample::<f64, _>(StandardNormal)));
    }
    DenseMatrix::from_raw(n, d, values)
}

/// Binary rows where each entry is 1 independently with probability `density`.
pub fn sparse_binary_matrix<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    density: f64,
    rng: &mut R,
) -> Result<SparseBinaryMatrix> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::invalid(format!("density {density} outside [0, 1]")));
    }
    let rows = (0..n)
        .map(|_| (0..d).filter(|_| rng.random_bool(density)).collect())
        .collect();
    SparseBinaryMatrix::new(d, rows)
}

/// `n` one-hot rows of dimension `d`, hot coordinates cycling through `0..d`.
pub fn one_hot_matrix(n: usize, d: usize) -> SparseBinaryMatrix {
    let rows = (0..n).map(|i| vec![i % d]).collect();
    SparseBinaryMatrix::new(d, rows).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn shapes_and_density() {
        let mut rng = seed::rng(0);
        let g = gaussian_matrix(3, 4, &mut rng);
        assert_eq!((g.n_rows(), g.n_cols()), (3, 4));
        let s = sparse_binary_matrix(200, 100, 0.1, &mut rng).unwrap();
        let density = s.nnz() as f64 / 20_000.0;
        assert!((density - 0.1).abs() < 0.01);
        assert!(sparse_binary_matrix(1, 1, 1.5, &mut rng).is_err());
        let h = one_hot_matrix(5, 3);
        assert_eq!(h.row(4), &[1]);
    }
}
