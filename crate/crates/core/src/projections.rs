//! Projection operators: random subspace (RS), Gaussian random projection,
//! Achlioptas sparse random projection, and PCA, each carrying the norm
//! scaling factor that makes projected squared norms comparable to the
//! originals.

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, DataRef, DenseMatrix};

/// A sorted set of `k` distinct coordinates out of `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSubset {
    d: usize,
    indices: Vec<usize>,
}

impl IndexSubset {
    pub fn new(d: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() || indices.len() > d {
            return Err(Error::invalid(format!(
                "subset size {} outside [1, {d}]",
                indices.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("subset indices must be distinct"));
        }
        if indices[indices.len() - 1] >= d {
            return Err(Error::invalid("subset index out of range"));
        }
        Ok(Self { d, indices })
    }

    /// Every coordinate, `0..d`.
    pub fn full(d: usize) -> Self {
        Self {
            d,
            indices: (0..d).collect(),
        }
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// `sqrt(d / k)`.
    pub fn scale(&self) -> f64 {
        (self.d as f64 / self.k() as f64).sqrt()
    }

    /// Output column of each input coordinate, `None` if not selected.
    fn positions(&self) -> Vec<Option<u32>> {
        let mut pos = vec![None; self.d];
        for (p, &j) in self.indices.iter().enumerate() {
            pos[j] = Some(p as u32);
        }
        pos
    }
}

/// Robert Floyd's algorithm: `k` distinct values from `0..n` in O(k).
fn floyd_sample<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> HashSet<usize> {
    let mut chosen = HashSet::with_capacity(k);
    for j in n - k..n {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen
}

/// Uniformly random `k`-subset of `0..d`, drawn without replacement.
///
/// Uses Floyd's algorithm directly for `k ≤ d/2`, otherwise draws the
/// `d − k` excluded coordinates instead.
pub fn rs_sample_indices<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<IndexSubset> {
    if k == 0 || k > d {
        return Err(Error::invalid(format!("k={k} outside [1, d={d}]")));
    }
    let indices = if 2 * k <= d {
        let mut v: Vec<usize> = floyd_sample(d, k, rng).into_iter().collect();
        v.sort_unstable();
        v
    } else {
        let excluded = floyd_sample(d, d - k, rng);
        (0..d).filter(|j| !excluded.contains(j)).collect()
    };
    Ok(IndexSubset { d, indices })
}

/// Keeps the subset's columns of every row, in ascending index order, and
/// optionally multiplies by `sqrt(d/k)`.
pub fn rs_project<'a>(
    data: impl Into<DataRef<'a>>,
    subset: &IndexSubset,
    apply_scale: bool,
) -> Result<DenseMatrix> {
    let data = data.into();
    check_dim(subset.d, data.n_cols())?;
    let k = subset.k();
    let scale = if apply_scale { subset.scale() } else { 1.0 };
    let mut out = vec![0.0; data.n_rows() * k];
    match data {
        DataRef::Dense(m) => {
            out.par_chunks_mut(k.max(1))
                .zip(m.as_slice().par_chunks(m.n_cols().max(1)))
                .for_each(|(dst, src)| {
                    for (o, &j) in dst.iter_mut().zip(&subset.indices) {
                        *o = src[j] * scale;
                    }
                });
        }
        DataRef::Sparse(m) => {
            let pos = subset.positions();
            out.par_chunks_mut(k.max(1)).enumerate().for_each(|(i, dst)| {
                for &j in m.row(i) {
                    if let Some(p) = pos[j] {
                        dst[p as usize] = scale;
                    }
                }
            });
        }
    }
    Ok(DenseMatrix::from_raw(data.n_rows(), k, out))
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjectionKind {
    Rs,
    GaussianRp,
    SparseRp,
    Pca,
}

impl ProjectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionKind::Rs => "rs",
            ProjectionKind::GaussianRp => "rp",
            ProjectionKind::SparseRp => "srp",
            ProjectionKind::Pca => "pca",
        }
    }
}

/// Scaling convention for sparse random projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SrpScaling {
    /// `sqrt(1/k)`. With ±1 entries of variance 1/3 this leaves projected
    /// squared norms at one third of the original on average.
    #[default]
    Paper,
    /// `sqrt(3/k)`, unbiased for the ±1 / 0 entry distribution.
    Unbiased,
}

impl SrpScaling {
    pub fn factor(self, k: usize) -> f64 {
        match self {
            SrpScaling::Paper => (1.0 / k as f64).sqrt(),
            SrpScaling::Unbiased => (3.0 / k as f64).sqrt(),
        }
    }
}

impl std::str::FromStr for SrpScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(SrpScaling::Paper),
            "unbiased" => Ok(SrpScaling::Unbiased),
            other => Err(Error::invalid(format!(
                "unknown srp scaling {other:?} (expected paper or unbiased)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Subset(IndexSubset),
    /// `k × d`, one projection direction per row.
    Matrix(DenseMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOperator {
    pub kind: ProjectionKind,
    pub d: usize,
    pub k: usize,
    pub payload: Payload,
    pub scale: f64,
    /// Column means subtracted before projecting (PCA only).
    pub center: Option<Vec<f64>>,
    /// Eigenvalues of the retained components (PCA only), descending.
    pub eigenvalues: Option<Vec<f64>>,
    /// `trace(Σ)` of the fitted data (PCA only).
    pub total_variance: Option<f64>,
}

impl ProjectionOperator {
    pub fn rs(subset: IndexSubset) -> Self {
        Self {
            kind: ProjectionKind::Rs,
            d: subset.d(),
            k: subset.k(),
            scale: subset.scale(),
            payload: Payload::Subset(subset),
            center: None,
            eigenvalues: None,
            total_variance: None,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn matrix(&self) -> Option<&DenseMatrix> {
        match &self.payload {
            Payload::Matrix(m) => Some(m),
            Payload::Subset(_) => None,
        }
    }

    pub fn subset(&self) -> Option<&IndexSubset> {
        match &self.payload {
            Payload::Subset(s) => Some(s),
            Payload::Matrix(_) => None,
        }
    }
}

/// Orthonormalizes the rows in place with two passes of modified
/// Gram–Schmidt. Returns the index of the first row that collapsed to
/// (numerically) zero, if any.
fn orthonormalize_rows(rows: &mut [f64], d: usize) -> Option<usize> {
    let k = rows.len() / d;
    for i in 0..k {
        let (done, rest) = rows.split_at_mut(i * d);
        let row = &mut rest[..d];
        let norm_before = dot(row, row).sqrt();
        for _pass in 0..2 {
            for prev in done.chunks_exact(d) {
                let proj = dot(row, prev);
                row.iter_mut().zip(prev).for_each(|(r, p)| *r -= proj * p);
            }
        }
        let norm = dot(row, row).sqrt();
        if norm.is_nan() || norm <= 1e-10 * norm_before {
            return Some(i);
        }
        row.iter_mut().for_each(|r| *r /= norm);
    }
    None
}

/// Gaussian random projection, scaled by `sqrt(d/k)`.
///
/// With `orthonormalize` the rows are replaced by an orthonormal basis of
/// their span. Without it, entries are i.i.d. `N(0, 1/d)` so that every row
/// has unit expected squared norm and the same `sqrt(d/k)` factor is unbiased.
pub fn gaussian_rp_matrix<R: Rng + ?Sized>(
    d: usize,
    k: usize,
    orthonormalize: bool,
    rng: &mut R,
) -> Result<ProjectionOperator> {
    if d == 0 || k == 0 {
        return Err(Error::invalid("d and k must be at least 1"));
    }
    if orthonormalize && k > d {
        return Err(Error::invalid(format!(
            "cannot orthonormalize k={k} rows in dimension d={d}"
        )));
    }
    let entry_scale = if orthonormalize { 1.0 } else { 1.0 / (d as f64).sqrt() };
    let mut values: Vec<f64> = (0..k * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * entry_scale)
        .collect();
    if orthonormalize {
        // rank deficiency has probability zero; redraw the offending row
        while let Some(bad) = orthonormalize_rows(&mut values, d) {
            for v in &mut values[bad * d..(bad + 1) * d] {
                *v = rng.sample(StandardNormal);
            }
        }
    }
    Ok(ProjectionOperator {
        kind: ProjectionKind::GaussianRp,
        d,
        k,
        payload: Payload::Matrix(DenseMatrix::from_raw(k, d, values)),
        scale: (d as f64 / k as f64).sqrt(),
        center: None,
        eigenvalues: None,
        total_variance: None,
    })
}

/// Achlioptas projection: entries `+1` and `−1` with probability 1/6 each,
/// `0` with probability 2/3.
pub fn sparse_rp_matrix<R: Rng + ?Sized>(
    d: usize,
    k: usize,
    scaling: SrpScaling,
    rng: &mut R,
) -> Result<ProjectionOperator> {
    if d == 0 || k == 0 {
        return Err(Error::invalid("d and k must be at least 1"));
    }
    let values = (0..k * d)
        .map(|_| match rng.random_range(0u8..6) {
            0 => 1.0,
            1 => -1.0,
            _ => 0.0,
        })
        .collect();
    Ok(ProjectionOperator {
        kind: ProjectionKind::SparseRp,
        d,
        k,
        payload: Payload::Matrix(DenseMatrix::from_raw(k, d, values)),
        scale: scaling.factor(k),
        center: None,
        eigenvalues: None,
        total_variance: None,
    })
}

/// Projects onto the top-`k` eigenvectors of the sample covariance
/// (column-centered, divisor `n − 1`), scaled by
/// `sqrt(trace(Σ) / Σ_{i ≤ k} λ_i)`.
///
/// When `d > n` the eigenproblem is solved on the `n × n` Gram matrix and the
/// eigenvectors are mapped back.
pub fn pca_operator(x: &DenseMatrix, k: usize) -> Result<ProjectionOperator> {
    let (n, d) = (x.n_rows(), x.n_cols());
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two rows"));
    }
    if k == 0 || k > d.min(n) {
        return Err(Error::invalid(format!(
            "k={k} outside [1, min(d={d}, n={n})]"
        )));
    }
    let means = x.column_means();
    let centered = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - means[j]);
    let denom = (n - 1) as f64;

    let (eigenvalues, mut components, trace) = if d <= n {
        let cov = (centered.transpose() * &centered) / denom;
        let trace = cov.trace();
        let eig = SymmetricEigen::new(cov);
        let order = descending_order(eig.eigenvalues.as_slice());
        let mut comps = Vec::with_capacity(k * d);
        let mut vals = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            vals.push(eig.eigenvalues[idx].max(0.0));
            comps.extend(eig.eigenvectors.column(idx).iter());
        }
        (vals, comps, trace)
    } else {
        let gram = (&centered * centered.transpose()) / denom;
        let trace = gram.trace();
        let eig = SymmetricEigen::new(gram);
        let order = descending_order(eig.eigenvalues.as_slice());
        let lambda_max = eig.eigenvalues.max().max(0.0);
        let mut comps = Vec::with_capacity(k * d);
        let mut vals = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let lambda = eig.eigenvalues[idx];
            if lambda <= lambda_max * 1e-12 || lambda <= 0.0 {
                break;
            }
            // v = Xcᵀu / sqrt((n−1)λ)
            let v = centered.transpose() * eig.eigenvectors.column(idx);
            let norm = ((n - 1) as f64 * lambda).sqrt();
            comps.extend(v.iter().map(|c| c / norm));
            vals.push(lambda);
        }
        (vals, comps, trace)
    };

    let mut eigenvalues = eigenvalues;
    if eigenvalues.len() < k {
        // the remaining directions span the null space of Σ
        complete_orthonormal_rows(&mut components, d, k);
        eigenvalues.resize(k, 0.0);
    }
    let retained: f64 = eigenvalues.iter().sum();
    if retained <= 0.0 {
        return Err(Error::DegenerateSpectrum { k });
    }
    // rounding of the eigenvalues can leave the ratio a hair under 1 at k = d
    let scale = if k == d { 1.0 } else { (trace / retained).max(1.0).sqrt() };
    components.truncate(k * d);
    Ok(ProjectionOperator {
        kind: ProjectionKind::Pca,
        d,
        k,
        payload: Payload::Matrix(DenseMatrix::from_raw(k, d, components)),
        scale,
        center: Some(means),
        eigenvalues: Some(eigenvalues),
        total_variance: Some(trace),
    })
}

/// Keeps the leading `k` components of a fitted PCA operator and recomputes
/// its trace-ratio scale, so one eigendecomposition can serve a whole grid
/// of dimensions.
pub fn pca_truncate(op: &ProjectionOperator, k: usize) -> Result<ProjectionOperator> {
    let (Payload::Matrix(m), Some(eig), Some(trace)) =
        (&op.payload, op.eigenvalues.as_ref(), op.total_variance)
    else {
        return Err(Error::invalid("not a fitted PCA operator"));
    };
    if k == 0 || k > op.k {
        return Err(Error::invalid(format!("k={k} outside [1, {}]", op.k)));
    }
    let retained: f64 = eig[..k].iter().sum();
    if retained <= 0.0 {
        return Err(Error::DegenerateSpectrum { k });
    }
    let scale = if k == op.d { 1.0 } else { (trace / retained).max(1.0).sqrt() };
    Ok(ProjectionOperator {
        kind: ProjectionKind::Pca,
        d: op.d,
        k,
        payload: Payload::Matrix(DenseMatrix::from_raw(
            k,
            op.d,
            m.as_slice()[..k * op.d].to_vec(),
        )),
        scale,
        center: op.center.clone(),
        eigenvalues: Some(eig[..k].to_vec()),
        total_variance: Some(trace),
    })
}

/// Indices sorting `values` descending; the sort is stable so ties keep the
/// solver's order.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Extends `rows` (orthonormal, `d` wide) to `k` rows using canonical basis
/// vectors orthogonalized against what is already there.
fn complete_orthonormal_rows(rows: &mut Vec<f64>, d: usize, k: usize) {
    let mut candidate = 0;
    while rows.len() / d < k && candidate < d {
        let start = rows.len();
        rows.extend((0..d).map(|j| if j == candidate { 1.0 } else { 0.0 }));
        candidate += 1;
        let n_rows = rows.len() / d;
        if orthonormalize_rows(&mut rows[..], d).is_some_and(|bad| bad == n_rows - 1) {
            rows.truncate(start);
        }
    }
}

/// Applies `op` to every row. RS operators dispatch to [`rs_project`]; PCA
/// subtracts the stored column means first. Rows are processed in parallel
/// with output identical to a sequential pass.
pub fn apply_operator<'a>(
    op: &ProjectionOperator,
    data: impl Into<DataRef<'a>>,
    apply_scale: bool,
) -> Result<DenseMatrix> {
    let data = data.into();
    let m = match &op.payload {
        Payload::Subset(subset) => {
            let mut out = rs_project(data, subset, false)?;
            if apply_scale && op.scale != 1.0 {
                out = out.scaled(op.scale);
            }
            return Ok(out);
        }
        Payload::Matrix(m) => m,
    };
    check_dim(op.d, data.n_cols())?;
    let (k, d) = (op.k, op.d);
    let scale = if apply_scale { op.scale } else { 1.0 };
    let n = data.n_rows();
    let mut out = vec![0.0; n * k];
    match data {
        DataRef::Dense(x) => {
            out.par_chunks_mut(k)
                .zip(x.as_slice().par_chunks(d))
                .for_each_init(
                    || vec![0.0; d],
                    |buf, (dst, src)| {
                        let src = match &op.center {
                            Some(mean) => {
                                buf.iter_mut()
                                    .zip(src.iter().zip(mean))
                                    .for_each(|(b, (s, m))| *b = s - m);
                                &buf[..]
                            }
                            None => src,
                        };
                        for (o, dir) in dst.iter_mut().zip(m.rows()) {
                            *o = dot(src, dir) * scale;
                        }
                    },
                );
        }
        DataRef::Sparse(x) => {
            let offsets: Vec<f64> = match &op.center {
                Some(mean) => m.rows().map(|dir| dot(mean, dir)).collect(),
                None => vec![0.0; k],
            };
            out.par_chunks_mut(k).enumerate().for_each(|(i, dst)| {
                let support = x.row(i);
                for ((o, dir), off) in dst.iter_mut().zip(m.rows()).zip(&offsets) {
                    let s: f64 = support.iter().map(|&j| dir[j]).sum();
                    *o = (s - off) * scale;
                }
            });
        }
    }
    Ok(DenseMatrix::from_raw(n, k, out))
}
