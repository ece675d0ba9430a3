//! Monte Carlo checks of the norm and dot-product guarantees, and of the
//! one-hot failure mode.

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{required_k, BoundQuery, BoundVariant};
use crate::error::{Error, Result};
use crate::matrix::{dot, sq_distance, DataRef};
use crate::projections::{rs_project, rs_sample_indices};
use crate::regularity::regularity_of_all_differences;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub variant: BoundVariant,
    pub epsilon: f64,
    pub delta: f64,
    /// Independent RS draws.
    pub draws: usize,
    pub master_seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            variant: BoundVariant::Serfling,
            epsilon: 0.5,
            delta: 0.1,
            draws: 50,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    /// Regularity over all normalized pairwise differences.
    pub c: f64,
    /// Dimension from the bound; equals `d` when infeasible.
    pub k: usize,
    pub feasible: bool,
    pub raw_bound: f64,
    pub draws: usize,
    /// Draws in which at least one pair left its band. Zero when infeasible,
    /// since nothing is run.
    pub failed_draws: usize,
    /// `failed_draws / draws`; `None` when infeasible.
    pub rate: Option<f64>,
    /// Largest failure rate the guarantee allows: `δ` for norms, `2δ` for
    /// dot products.
    pub allowed: f64,
}

impl CheckResult {
    pub fn within_guarantee(&self) -> bool {
        self.rate.is_some_and(|r| r <= self.allowed)
    }
}

struct Setup {
    c: f64,
    k: usize,
    feasible: bool,
    raw_bound: f64,
}

fn setup(data: DataRef<'_>, cfg: &CheckConfig) -> Result<Setup> {
    if cfg.draws == 0 {
        return Err(Error::invalid("draws must be at least 1"));
    }
    let c = regularity_of_all_differences(data)?.dataset_c;
    let d = data.n_cols() as u64;
    let bound = required_k(&BoundQuery {
        c,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        n_points: data.n_rows() as u64,
        d: Some(d),
        variant: cfg.variant,
    })?;
    let feasible = bound.feasible && bound.k <= d;
    Ok(Setup {
        c,
        k: bound.k.min(d) as usize,
        feasible,
        raw_bound: bound.raw_bound,
    })
}

fn run_draws<F>(data: DataRef<'_>, cfg: &CheckConfig, tag: &str, allowed: f64, violated: F) -> Result<CheckResult>
where
    F: Fn(&crate::matrix::DenseMatrix) -> bool + Sync,
{
    let s = setup(data, cfg)?;
    let mut result = CheckResult {
        c: s.c,
        k: s.k,
        feasible: s.feasible,
        raw_bound: s.raw_bound,
        draws: cfg.draws,
        failed_draws: 0,
        rate: None,
        allowed,
    };
    if !s.feasible {
        log::warn!("{tag}: required k exceeds d={}; nothing to check", data.n_cols());
        return Ok(result);
    }
    let failures: Vec<bool> = (0..cfg.draws)
        .into_par_iter()
        .map(|draw| {
            let mut rng = seed::rng(seed::child_seed(cfg.master_seed, tag, s.k, draw));
            let subset = rs_sample_indices(data.n_cols(), s.k, &mut rng)?;
            let projected = rs_project(data, &subset, true)?;
            Ok(violated(&projected))
        })
        .collect::<Result<_>>()?;
    result.failed_draws = failures.iter().filter(|&&f| f).count();
    result.rate = Some(result.failed_draws as f64 / cfg.draws as f64);
    Ok(result)
}

/// Fraction of RS draws, at the dimension required by `cfg.variant`, in which
/// some pair's squared distance leaves `[(1−ε)·dist², (1+ε)·dist²]`. Every
/// pair of rows is evaluated.
pub fn jll_failure_rate<'a>(data: impl Into<DataRef<'a>>, cfg: &CheckConfig) -> Result<CheckResult> {
    let data = data.into();
    let n = data.n_rows();
    let eps = cfg.epsilon;
    run_draws(data, cfg, "jll", cfg.delta, |y| {
        (0..n).any(|i| {
            (i + 1..n).any(|j| {
                let orig = data.sq_distance(i, j);
                let proj = sq_distance(y.row(i), y.row(j));
                (proj - orig).abs() > eps * orig
            })
        })
    })
}

/// Fraction of RS draws in which some pair `i < j` has
/// `(d/k)(PX_i)ᵀ(PX_j)` outside `X_iᵀX_j ± ε‖X_i‖‖X_j‖`, with `k` taken from
/// the norm bound.
pub fn dot_product_failure_rate<'a>(data: impl Into<DataRef<'a>>, cfg: &CheckConfig) -> Result<CheckResult> {
    let data = data.into();
    let n = data.n_rows();
    let norms: Vec<f64> = (0..n).map(|i| data.sq_norm(i).sqrt()).collect();
    let eps = cfg.epsilon;
    run_draws(data, cfg, "dot", 2.0 * cfg.delta, |y| {
        (0..n).any(|i| {
            (i + 1..n).any(|j| {
                let half_width = eps * norms[i] * norms[j];
                (dot(y.row(i), y.row(j)) - data.dot(i, j)).abs() > half_width
            })
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneHotZero {
    pub draws: usize,
    pub zero_draws: usize,
    pub probability: f64,
    /// `(d − k)/d`, the share of size-`k` subsets that miss a given coordinate.
    pub exact: f64,
    /// Binomial standard error of `probability` around `exact`.
    pub std_error: f64,
}

/// Empirical probability that RS maps a one-hot vector to zero.
///
/// A size-`k` subset misses the hot coordinate for `C(d−1, k)` of the
/// `C(d, k)` subsets, so the probability is `(d − k)/d`. Note that the
/// complementary expression `1 − (d − k)/d` is the probability that the
/// vector survives, not that it vanishes.
pub fn one_hot_zero_probability<R: Rng + ?Sized>(
    d: usize,
    k: usize,
    draws: usize,
    rng: &mut R,
) -> Result<OneHotZero> {
    if k == 0 || k > d {
        return Err(Error::invalid(format!("need 1 <= k <= d, got k={k}, d={d}")));
    }
    if draws == 0 {
        return Err(Error::invalid("draws must be at least 1"));
    }
    let hot = rng.random_range(0..d);
    let mut zero_draws = 0;
    for _ in 0..draws {
        if !rs_sample_indices(d, k, rng)?.contains(hot) {
            zero_draws += 1;
        }
    }
    let exact = (d - k) as f64 / d as f64;
    Ok(OneHotZero {
        draws,
        zero_draws,
        probability: zero_draws as f64 / draws as f64,
        exact,
        std_error: (exact * (1.0 - exact) / draws as f64).sqrt(),
    })
}

/// Exact zero probability by enumerating every size-`k` subset of `0..d`
/// with coordinate 0 hot. Exponential; meant for small `d`.
pub fn one_hot_zero_probability_enumerated(d: usize, k: usize) -> Result<(u64, u64)> {
    if k == 0 || k > d || d > 30 {
        return Err(Error::invalid(format!("enumeration needs 1 <= k <= d <= 30, got k={k}, d={d}")));
    }
    let (mut zero, mut total) = (0u64, 0u64);
    for mask in 0u32..(1u32 << d) {
        if mask.count_ones() as usize == k {
            total += 1;
            if mask & 1 == 0 {
                zero += 1;
            }
        }
    }
    Ok((zero, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synthetic;
    use crate::matrix::DenseMatrix;

    #[test]
    fn enumeration_examples() {
        assert_eq!(one_hot_zero_probability_enumerated(2, 1).unwrap(), (1, 2));
        assert_eq!(one_hot_zero_probability_enumerated(5, 2).unwrap(), (6, 10));
        assert_eq!(one_hot_zero_probability_enumerated(4, 4).unwrap(), (0, 1));
    }

    #[test]
    fn full_subset_never_zero() {
        let r = one_hot_zero_probability(6, 6, 100, &mut seed::rng(0)).unwrap();
        assert_eq!(r.zero_draws, 0);
        assert_eq!(r.exact, 0.0);
        assert!(one_hot_zero_probability(3, 0, 10, &mut seed::rng(0)).is_err());
    }

    #[test]
    fn one_hot_dataset_is_infeasible() {
        let x = synthetic::one_hot_matrix(20, 50);
        let r = jll_failure_rate(&x, &CheckConfig::default()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.rate, None);
        assert_eq!(r.k, 50);
        assert!((r.c - 25.0).abs() < 1e-12);
    }

    #[test]
    fn flat_vectors_never_fail() {
        // rows are multiples of the all-ones vector: every difference has c = 1
        let rows: Vec<Vec<f64>> = (1..=10).map(|i| vec![i as f64; 40]).collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let cfg = CheckConfig {
            draws: 20,
            ..Default::default()
        };
        let r = jll_failure_rate(&x, &cfg).unwrap();
        assert!(r.feasible);
        assert_eq!(r.rate, Some(0.0));
        let r = dot_product_failure_rate(&x, &cfg).unwrap();
        assert_eq!(r.rate, Some(0.0));
        assert_eq!(r.allowed, 0.2);
    }

    #[test]
    fn draws_are_deterministic() {
        let x = synthetic::gaussian_matrix(15, 300, &mut seed::rng(1));
        let cfg = CheckConfig {
            epsilon: 1.0,
            draws: 8,
            master_seed: 5,
            ..Default::default()
        };
        let a = jll_failure_rate(&x, &cfg).unwrap();
        let b = jll_failure_rate(&x, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
