use crate::error::{Error, Result};
use crate::matrix::{sq_distance, DataRef, DenseMatrix};
use crate::projections::{apply_operator, ProjectionOperator};

/// Scaled norm ratio of one evaluation pair; `u`, `v` are row indices into
/// the original data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRatio {
    pub u: usize,
    pub v: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub mean_ratio: f64,
    pub p5: f64,
    pub p95: f64,
    /// Fraction of pairs with `|r² − 1| > ε`.
    pub fail_rate_sq: f64,
    /// Mean of `r²`.
    pub mean_sq_ratio: f64,
    pub n_pairs: usize,
    pub n_skipped: usize,
    pub ratios: Vec<PairRatio>,
}

/// Nearest-rank percentile of an ascending slice: the value at rank
/// `ceil(p/100 · n)`, 1-based.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Ratios `‖y_a − y_b‖ / ‖x_a − x_b‖` for every unordered pair of
/// `eval_rows`, where `projected` holds the already-scaled projections of
/// those rows in the same order.
pub fn ratio_stats_from_projection(
    data: DataRef<'_>,
    eval_rows: &[usize],
    projected: &DenseMatrix,
    epsilon: f64,
) -> Result<RatioStats> {
    if projected.n_rows() != eval_rows.len() {
        return Err(Error::DimensionMismatch {
            expected: eval_rows.len(),
            actual: projected.n_rows(),
        });
    }
    let n = eval_rows.len();
    let mut ratios = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut n_skipped = 0;
    for a in 0..n {
        for b in a + 1..n {
            let (u, v) = (eval_rows[a], eval_rows[b]);
            let orig = data.sq_distance(u, v);
            if orig == 0.0 {
                n_skipped += 1;
                continue;
            }
            let proj = sq_distance(projected.row(a), projected.row(b));
            ratios.push(PairRatio {
                u,
                v,
                ratio: (proj / orig).sqrt(),
            });
        }
    }
    if ratios.len() < 2 {
        return Err(Error::invalid(format!(
            "only {} usable pairs; need at least 2",
            ratios.len()
        )));
    }
    let count = ratios.len() as f64;
    let mean_ratio = ratios.iter().map(|p| p.ratio).sum::<f64>() / count;
    let mean_sq_ratio = ratios.iter().map(|p| p.ratio * p.ratio).sum::<f64>() / count;
    let failures = ratios
        .iter()
        .filter(|p| (p.ratio * p.ratio - 1.0).abs() > epsilon)
        .count();
    let mut sorted: Vec<f64> = ratios.iter().map(|p| p.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(RatioStats {
        mean_ratio,
        p5: nearest_rank(&sorted, 5.0),
        p95: nearest_rank(&sorted, 95.0),
        fail_rate_sq: failures as f64 / count,
        mean_sq_ratio,
        n_pairs: ratios.len(),
        n_skipped,
        ratios,
    })
}

/// Projects `eval_rows` with `op` (scaled) and summarizes the pairwise norm
/// ratios.
pub fn pairwise_ratio_stats<'a>(
    data: impl Into<DataRef<'a>>,
    op: &ProjectionOperator,
    eval_rows: &[usize],
    epsilon: f64,
) -> Result<RatioStats> {
    let data = data.into();
    check_distinct(eval_rows, data.n_rows())?;
    let subset = data.select_rows(eval_rows);
    let projected = apply_operator(op, &subset, true)?;
    ratio_stats_from_projection(data, eval_rows, &projected, epsilon)
}

pub(crate) fn check_distinct(rows: &[usize], n: usize) -> Result<()> {
    let mut sorted = rows.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("evaluation rows must be distinct"));
    }
    if sorted.last().is_some_and(|&r| r >= n) {
        return Err(Error::invalid("evaluation row out of range"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projections::{IndexSubset, ProjectionOperator};

    #[test]
    fn nearest_rank_definition() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 5.0), 1.0);
        assert_eq!(nearest_rank(&v, 95.0), 19.0);
        assert_eq!(nearest_rank(&v, 100.0), 20.0);
        assert_eq!(nearest_rank(&v, 0.0), 1.0);
        assert_eq!(nearest_rank(&[3.0], 50.0), 3.0);
    }

    #[test]
    fn full_rs_gives_unit_ratios() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, 1.0, 5.0], [3.0, 3.0, 3.0]]).unwrap();
        let op = ProjectionOperator::rs(IndexSubset::full(3));
        let s = pairwise_ratio_stats(&x, &op, &[0, 1, 2], 0.1).unwrap();
        assert_eq!(s.n_pairs, 3);
        assert_eq!(s.fail_rate_sq, 0.0);
        assert!(s.ratios.iter().all(|p| p.ratio == 1.0));
        assert_eq!((s.p5, s.p95, s.mean_ratio), (1.0, 1.0, 1.0));
    }

    #[test]
    fn duplicate_points_are_skipped() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [0.0, 0.0], [5.0, 1.0]]).unwrap();
        let op = ProjectionOperator::rs(IndexSubset::full(2));
        let s = pairwise_ratio_stats(&x, &op, &[0, 1, 2, 3], 0.1).unwrap();
        assert_eq!(s.n_skipped, 1);
        assert_eq!(s.n_pairs, 5);
    }

    #[test]
    fn pair_count_for_one_hundred_rows() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, 1.0]).collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let op = ProjectionOperator::rs(IndexSubset::full(2));
        let eval: Vec<usize> = (0..100).collect();
        assert_eq!(pairwise_ratio_stats(&x, &op, &eval, 0.1).unwrap().n_pairs, 4950);
    }

    #[test]
    fn too_few_pairs_and_bad_rows() {
        let x = DenseMatrix::from_rows(&[[1.0], [2.0], [2.0]]).unwrap();
        let op = ProjectionOperator::rs(IndexSubset::full(1));
        assert!(pairwise_ratio_stats(&x, &op, &[0, 1], 0.1).is_err());
        assert!(pairwise_ratio_stats(&x, &op, &[0, 0, 1], 0.1).is_err());
        assert!(pairwise_ratio_stats(&x, &op, &[0, 3], 0.1).is_err());
    }

    #[test]
    fn failure_uses_squared_ratio() {
        // projection keeps coordinate 0 only; scale sqrt(2)
        let x = DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let op = ProjectionOperator::rs(IndexSubset::new(2, vec![0]).unwrap());
        let s = pairwise_ratio_stats(&x, &op, &[0, 1, 2, 3], 0.5).unwrap();
        // squared ratios: (0,1)=2 (0,2)=0 (0,3)=1 (1,2)=1 (1,3)=0 (2,3)=2
        assert_eq!(s.n_pairs, 6);
        assert!((s.fail_rate_sq - 4.0 / 6.0).abs() < 1e-15);
        assert!((s.mean_sq_ratio - 1.0).abs() < 1e-15);
    }
}
