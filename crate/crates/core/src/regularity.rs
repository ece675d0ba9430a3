//! The regularity constant `c = d · max_j x_j² / ‖x‖²`, which controls how
//! many coordinates random subspace sampling needs to keep.
//!
//! `c` lies in `[1, d]`: it is 1 when every coordinate has the same magnitude
//! and `d` for a one-hot vector. For a binary vector with `s` non-zeros it is
//! exactly `d / s`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{sparse_sq_distance, DataRef};

/// What the per-row values were computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityBasis {
    /// The observations themselves.
    Points,
    /// Differences of uniformly sampled distinct row pairs.
    SampledDifferences,
    /// Differences of every unordered row pair.
    AllDifferences,
}

impl RegularityBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            RegularityBasis::Points => "points",
            RegularityBasis::SampledDifferences => "sampled_differences",
            RegularityBasis::AllDifferences => "all_differences",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// One entry per row (or per pair); `None` for zero vectors.
    pub per_row_c: Vec<Option<f64>>,
    /// Maximum over the defined entries.
    pub dataset_c: f64,
    /// Rows (or pairs) skipped because the vector was zero.
    pub n_zero_rows: usize,
    pub basis: RegularityBasis,
    /// Row pairs behind `per_row_c`; 0 for the points basis.
    pub n_pairs_sampled: usize,
    /// Row indices `(i, j)` of each entry when the basis is a difference basis.
    pub pairs: Vec<(usize, usize)>,
}

pub fn regularity_of_vector(x: &[f64]) -> Result<f64> {
    let (max_sq, sum_sq) = x.iter().fold((0.0f64, 0.0f64), |(m, s), &v| {
        let sq = v * v;
        (m.max(sq), s + sq)
    });
    if sum_sq == 0.0 {
        return Err(Error::UndefinedRegularity);
    }
    // rounding can push the ratio a hair outside [1, d]
    Ok((x.len() as f64 * max_sq / sum_sq).clamp(1.0, x.len() as f64))
}

/// `c` of a binary vector with `s` non-zeros in dimension `d`.
pub fn regularity_of_binary(s: usize, d: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::UndefinedRegularity);
    }
    Ok(d as f64 / s as f64)
}

/// `c` of the difference of rows `i` and `j`, or `None` if they coincide.
fn difference_c(data: DataRef<'_>, i: usize, j: usize) -> Option<f64> {
    match data {
        DataRef::Dense(m) => {
            let diff: Vec<f64> = m.row(i).iter().zip(m.row(j)).map(|(a, b)| a - b).collect();
            regularity_of_vector(&diff).ok()
        }
        // entries of a binary difference are in {-1, 0, 1}
        DataRef::Sparse(m) => {
            regularity_of_binary(sparse_sq_distance(m.row(i), m.row(j)), m.n_cols()).ok()
        }
    }
}

fn row_c(data: DataRef<'_>, i: usize) -> Option<f64> {
    match data {
        DataRef::Dense(m) => regularity_of_vector(m.row(i)).ok(),
        DataRef::Sparse(m) => regularity_of_binary(m.row(i).len(), m.n_cols()).ok(),
    }
}

fn summarize(
    per_row_c: Vec<Option<f64>>,
    basis: RegularityBasis,
    pairs: Vec<(usize, usize)>,
) -> Result<RegularityReport> {
    let n_zero_rows = per_row_c.iter().filter(|c| c.is_none()).count();
    let dataset_c = per_row_c
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))))
        .ok_or(Error::NoDefinedRows)?;
    Ok(RegularityReport {
        per_row_c,
        dataset_c,
        n_zero_rows,
        basis,
        n_pairs_sampled: pairs.len(),
        pairs,
    })
}

/// Per-row regularity over the observations themselves.
pub fn regularity_of_points<'a>(data: impl Into<DataRef<'a>>) -> Result<RegularityReport> {
    let data = data.into();
    let per_row: Vec<Option<f64>> = (0..data.n_rows())
        .into_par_iter()
        .map(|i| row_c(data, i))
        .collect();
    summarize(per_row, RegularityBasis::Points, Vec::new())
}

/// Regularity of `n_pairs` difference vectors `X_i − X_j`, each pair drawn
/// uniformly from distinct rows (pairs may repeat across draws).
pub fn regularity_of_sampled_differences<'a, R: Rng + ?Sized>(
    data: impl Into<DataRef<'a>>,
    n_pairs: usize,
    rng: &mut R,
) -> Result<RegularityReport> {
    let data = data.into();
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs must be at least 1"));
    }
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::invalid("difference basis needs at least two rows"));
    }
    let pairs: Vec<(usize, usize)> = (0..n_pairs)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        })
        .collect();
    let per_row = pairs
        .par_iter()
        .map(|&(i, j)| difference_c(data, i, j))
        .collect();
    summarize(per_row, RegularityBasis::SampledDifferences, pairs)
}

/// Regularity of every difference `X_i − X_j`, `i < j`.
pub fn regularity_of_all_differences<'a>(data: impl Into<DataRef<'a>>) -> Result<RegularityReport> {
    let data = data.into();
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::invalid("difference basis needs at least two rows"));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let per_row = pairs
        .par_iter()
        .map(|&(i, j)| difference_c(data, i, j))
        .collect();
    summarize(per_row, RegularityBasis::AllDifferences, pairs)
}

/// Dispatches on `basis`. `n_pairs` and `rng` are only used for
/// [`RegularityBasis::SampledDifferences`].
pub fn regularity_of_dataset<'a, R: Rng + ?Sized>(
    data: impl Into<DataRef<'a>>,
    basis: RegularityBasis,
    n_pairs: usize,
    rng: &mut R,
) -> Result<RegularityReport> {
    match basis {
        RegularityBasis::Points => regularity_of_points(data),
        RegularityBasis::SampledDifferences => regularity_of_sampled_differences(data, n_pairs, rng),
        RegularityBasis::AllDifferences => regularity_of_all_differences(data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{DenseMatrix, SparseBinaryMatrix};
    use crate::seed;

    #[test]
    fn vector_examples() {
        assert_eq!(regularity_of_vector(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 1.0);
        let mut x = vec![0.0; 100];
        x[3] = 1.0;
        x[10] = 1.0;
        x[50] = 1.0;
        x[99] = 1.0;
        assert_eq!(regularity_of_vector(&x).unwrap(), 25.0);
        // 5 * 16 / 25
        let c = regularity_of_vector(&[3.0, 4.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((c - 3.2).abs() < 1e-15);
        assert!(matches!(
            regularity_of_vector(&[0.0, 0.0]),
            Err(Error::UndefinedRegularity)
        ));
    }

    #[test]
    fn identity_points() {
        let m = DenseMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let r = regularity_of_points(&m).unwrap();
        assert_eq!(r.per_row_c, vec![Some(3.0); 3]);
        assert_eq!(r.dataset_c, 3.0);
        assert_eq!(r.n_pairs_sampled, 0);
    }

    #[test]
    fn zero_rows_are_skipped_and_counted() {
        let m = DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let r = regularity_of_points(&m).unwrap();
        assert_eq!(r.n_zero_rows, 1);
        assert_eq!(r.dataset_c, 1.0);
        let z = DenseMatrix::zeros(3, 2);
        assert!(matches!(regularity_of_points(&z), Err(Error::NoDefinedRows)));
    }

    #[test]
    fn identical_rows_have_no_defined_difference() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0]]).unwrap();
        let err = regularity_of_sampled_differences(&m, 1, &mut seed::rng(0)).unwrap_err();
        assert!(matches!(err, Error::NoDefinedRows));
    }

    #[test]
    fn disjoint_binary_supports() {
        let s = SparseBinaryMatrix::new(
            8,
            vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]],
        )
        .unwrap();
        // oracle: every pair's difference vector, built densely
        let dense = s.to_dense();
        let mut brute = 0.0f64;
        for i in 0..4 {
            for j in i + 1..4 {
                let diff: Vec<f64> =
                    dense.row(i).iter().zip(dense.row(j)).map(|(a, b)| a - b).collect();
                let max = diff.iter().map(|v| v * v).fold(0.0, f64::max);
                let sum: f64 = diff.iter().map(|v| v * v).sum();
                brute = brute.max(8.0 * max / sum);
            }
        }
        assert_eq!(brute, 2.0);

        let r = regularity_of_sampled_differences(&s, 50, &mut seed::rng(3)).unwrap();
        assert_eq!(r.dataset_c, brute);
        assert_eq!(r.n_pairs_sampled, 50);
        assert!(r.pairs.iter().all(|&(i, j)| i < j));
        let all = regularity_of_all_differences(&s).unwrap();
        assert_eq!(all.dataset_c, brute);
        assert_eq!(all.n_pairs_sampled, 6);
        // dense and sparse storage agree
        let rd = regularity_of_all_differences(&dense).unwrap();
        assert_eq!(rd.per_row_c, all.per_row_c);
    }

    #[test]
    fn sampled_differences_validate_inputs() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(regularity_of_sampled_differences(&m, 10, &mut seed::rng(0)).is_err());
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 1.0]]).unwrap();
        assert!(regularity_of_sampled_differences(&m, 0, &mut seed::rng(0)).is_err());
    }
}
