//! In-memory data containers shared by every module.

use crate::error::{Error, Result};

/// `n_rows` observations of dimension `n_cols`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(Error::invalid(format!(
                "{} values cannot fill a {n_rows}x{n_cols} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                pos / n_cols.max(1),
                pos % n_cols.max(1)
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {n_cols}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), n_cols, values)
    }

    /// Builds a matrix without validating finiteness. Used by internal kernels
    /// whose outputs are finite whenever their inputs are.
    pub(crate) fn from_raw(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n_rows * n_cols);
        Self {
            n_rows,
            n_cols,
            values,
        }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Copies the listed rows, in the given order, into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> DenseMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        Self::from_raw(rows.len(), self.n_cols, values)
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        Self::from_raw(
            self.n_rows,
            self.n_cols,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.n_cols];
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.n_rows.max(1) as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }
}

/// Binary observations stored as sorted lists of non-zero column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl SparseBinaryMatrix {
    /// Every row must be strictly increasing with indices below `n_cols`.
    pub fn new(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if let Some(&last) = row.last() {
                if last >= n_cols {
                    return Err(Error::invalid(format!(
                        "row {i}: index {last} out of range for d={n_cols}"
                    )));
                }
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "row {i}: indices are not strictly increasing"
                )));
            }
        }
        Ok(Self { n_cols, rows })
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn select_rows(&self, rows: &[usize]) -> SparseBinaryMatrix {
        Self {
            n_cols: self.n_cols,
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            let dst = out.row_mut(i);
            for &j in row {
                dst[j] = 1.0;
            }
        }
        out
    }

    /// Removes columns that are zero in every row and re-indexes the rest.
    /// Returns the new matrix and the original index of each kept column.
    pub fn drop_empty_columns(&self) -> (SparseBinaryMatrix, Vec<usize>) {
        let mut used = vec![false; self.n_cols];
        for row in &self.rows {
            for &j in row {
                used[j] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.n_cols];
        let mut kept = Vec::new();
        for (j, &u) in used.iter().enumerate() {
            if u {
                remap[j] = kept.len();
                kept.push(j);
            }
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&j| remap[j]).collect())
            .collect();
        (
            Self {
                n_cols: kept.len(),
                rows,
            },
            kept,
        )
    }
}

/// Squared Euclidean distance between two binary rows: the size of the
/// symmetric difference of their supports.
pub fn sparse_sq_distance(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// Grayscale raster with integer intensities in `[0, max_val]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub max_val: u16,
    pub pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, max_val: u16, pixels: Vec<u16>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "{} pixels cannot fill a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|&&p| p > max_val) {
            return Err(Error::invalid(format!(
                "pixel value {p} exceeds max_val {max_val}"
            )));
        }
        Ok(Self {
            width,
            height,
            max_val,
            pixels,
        })
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    /// All pixels as one real vector, row-major.
    pub fn to_vector(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| f64::from(p)).collect()
    }
}

/// Borrowed view over either storage kind, for operations that accept both.
#[derive(Debug, Clone, Copy)]
pub enum DataRef<'a> {
    Dense(&'a DenseMatrix),
    Sparse(&'a SparseBinaryMatrix),
}

impl DataRef<'_> {
    pub fn n_rows(&self) -> usize {
        match self {
            DataRef::Dense(m) => m.n_rows(),
            DataRef::Sparse(m) => m.n_rows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            DataRef::Dense(m) => m.n_cols(),
            DataRef::Sparse(m) => m.n_cols(),
        }
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn sq_distance(&self, i: usize, j: usize) -> f64 {
        match self {
            DataRef::Dense(m) => sq_distance(m.row(i), m.row(j)),
            DataRef::Sparse(m) => sparse_sq_distance(m.row(i), m.row(j)) as f64,
        }
    }

    /// Dot product of rows `i` and `j`.
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        match self {
            DataRef::Dense(m) => dot(m.row(i), m.row(j)),
            DataRef::Sparse(m) => {
                let b = m.row(j);
                m.row(i).iter().filter(|x| b.binary_search(x).is_ok()).count() as f64
            }
        }
    }

    pub fn sq_norm(&self, i: usize) -> f64 {
        match self {
            DataRef::Dense(m) => dot(m.row(i), m.row(i)),
            DataRef::Sparse(m) => m.row(i).len() as f64,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Data {
        match self {
            DataRef::Dense(m) => Data::Dense(m.select_rows(rows)),
            DataRef::Sparse(m) => Data::Sparse(m.select_rows(rows)),
        }
    }
}

impl<'a> From<&'a DenseMatrix> for DataRef<'a> {
    fn from(m: &'a DenseMatrix) -> Self {
        DataRef::Dense(m)
    }
}

impl<'a> From<&'a SparseBinaryMatrix> for DataRef<'a> {
    fn from(m: &'a SparseBinaryMatrix) -> Self {
        DataRef::Sparse(m)
    }
}

/// Owned counterpart of [`DataRef`].
#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    Dense(DenseMatrix),
    Sparse(SparseBinaryMatrix),
}

impl Data {
    pub fn as_ref(&self) -> DataRef<'_> {
        match self {
            Data::Dense(m) => DataRef::Dense(m),
            Data::Sparse(m) => DataRef::Sparse(m),
        }
    }
}

impl<'a> From<&'a Data> for DataRef<'a> {
    fn from(d: &'a Data) -> Self {
        d.as_ref()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sq_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
