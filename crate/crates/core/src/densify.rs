//! Householder densification of sparse binary data.
//!
//! `H = I − 2vvᵀ` with `v = 1/√d · (1, …, 1)` is a reflection, so it keeps
//! every Euclidean distance. Applied to a binary vector with `s` non-zeros it
//! yields just two distinct values: `(d − 2s)/d` on the support and `−2s/d`
//! elsewhere. That spreads the mass over all coordinates and lowers the
//! regularity constant from `c = d/s` to `c′` whenever `s < d/2`.

use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseBinaryMatrix};
use crate::projections::IndexSubset;
use crate::regularity::{self, RegularityReport};

/// `x − (2/d)·(Σ x_j)·1`, without forming `H`.
pub fn householder_apply_dense(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    householder_apply_in_place(&mut out);
    out
}

pub fn householder_apply_in_place(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let shift = 2.0 * x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= shift);
}

/// `Hx` for a binary row, stored as two values plus the original support.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderRow {
    /// `(d − 2s)/d`; `None` for the zero row, which has no support.
    pub on_value: Option<f64>,
    /// `−2s/d`.
    pub off_value: f64,
    pub support: Vec<usize>,
}

impl HouseholderRow {
    pub fn s(&self) -> usize {
        self.support.len()
    }

    pub fn expand(&self, d: usize) -> Vec<f64> {
        let mut out = vec![self.off_value; d];
        if let Some(on) = self.on_value {
            for &j in &self.support {
                out[j] = on;
            }
        }
        out
    }

    /// Coordinates of the reflected row restricted to `subset`, in O(k + s).
    pub fn project(&self, subset: &IndexSubset, out: &mut [f64]) {
        let on = self.on_value.unwrap_or(self.off_value);
        let mut support = self.support.iter().peekable();
        for (o, &j) in out.iter_mut().zip(subset.indices()) {
            while support.next_if(|&&s| s < j).is_some() {}
            *o = if support.peek() == Some(&&j) { on } else { self.off_value };
        }
    }

    /// `‖P H x‖²` for an RS subset, from the count of retained support
    /// coordinates alone.
    pub fn projected_sq_norm(&self, subset: &IndexSubset) -> f64 {
        let k = subset.k();
        let n_on = self.support.iter().filter(|&&j| subset.contains(j)).count();
        let on = self.on_value.unwrap_or(0.0);
        n_on as f64 * on * on + (k - n_on) as f64 * self.off_value * self.off_value
    }
}

/// Closed-form reflection of a binary row with sorted support `row`.
pub fn householder_apply_binary(row: &[usize], d: usize) -> HouseholderRow {
    let s = row.len();
    let df = d as f64;
    HouseholderRow {
        on_value: (s > 0).then(|| (df - 2.0 * s as f64) / df),
        off_value: if s == 0 { 0.0 } else { -2.0 * s as f64 / df },
        support: row.to_vec(),
    }
}

/// Regularity `c′` of `Hx` for a binary `x` with `s` non-zeros:
/// `d/s − 4 + 4s/d` when `s < d/4`, otherwise `4s/d` (both equal 1 at
/// `s = d/4`). At `s = d` there are no off-support entries and `Hx = −x`, so
/// `c′ = 1`.
pub fn densified_regularity(s: usize, d: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::UndefinedRegularity);
    }
    if s > d {
        return Err(Error::invalid(format!("s={s} exceeds d={d}")));
    }
    let (sf, df) = (s as f64, d as f64);
    Ok(if 4 * s < d || s == d {
        df / sf - 4.0 + 4.0 * sf / df
    } else {
        4.0 * sf / df
    })
}

/// Reflected rows in compact form.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactDense {
    pub d: usize,
    pub rows: Vec<HouseholderRow>,
}

impl CompactDense {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn expand(&self) -> DenseMatrix {
        let mut values = Vec::with_capacity(self.rows.len() * self.d);
        for r in &self.rows {
            values.extend(r.expand(self.d));
        }
        DenseMatrix::from_raw(self.rows.len(), self.d, values)
    }

    /// RS projection of every row, optionally scaled by `sqrt(d/k)`.
    pub fn rs_project(&self, subset: &IndexSubset, apply_scale: bool) -> Result<DenseMatrix> {
        if subset.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: subset.d(),
                actual: self.d,
            });
        }
        let k = subset.k();
        let mut out = vec![0.0; self.rows.len() * k];
        for (r, dst) in self.rows.iter().zip(out.chunks_exact_mut(k)) {
            r.project(subset, dst);
        }
        let mut m = DenseMatrix::from_raw(self.rows.len(), k, out);
        if apply_scale {
            m = m.scaled(subset.scale());
        }
        Ok(m)
    }
}

#[derive(Debug, Clone)]
pub struct Densified {
    pub data: CompactDense,
    /// Regularity of the original rows.
    pub before: RegularityReport,
    /// Regularity of the reflected rows.
    pub after: RegularityReport,
}

/// Reflects every row and reports `c` and `c′` over the rows (zero rows pass
/// through unchanged and are excluded from both).
pub fn densify_dataset(x: &SparseBinaryMatrix) -> Result<Densified> {
    let d = x.n_cols();
    let rows: Vec<HouseholderRow> = x.rows().map(|r| householder_apply_binary(r, d)).collect();
    let before = regularity::regularity_of_points(x)?;
    let per_row: Vec<Option<f64>> = rows
        .iter()
        .map(|r| densified_regularity(r.s(), d).ok())
        .collect();
    let after = RegularityReport {
        dataset_c: per_row.iter().flatten().copied().fold(f64::MIN, f64::max),
        n_zero_rows: per_row.iter().filter(|c| c.is_none()).count(),
        per_row_c: per_row,
        ..before.clone()
    };
    Ok(Densified {
        data: CompactDense { d, rows },
        before,
        after,
    })
}

/// Writes the compact text format: header `d=<int> compact=hh`, then one
/// line per row `s on off i1 i2 …` with 1-based indices. A zero row is
/// written as `0 0 0`.
pub fn write_compact<W: Write>(mut w: W, data: &CompactDense) -> io::Result<()> {
    writeln!(w, "d={} compact=hh", data.d)?;
    for r in &data.rows {
        write!(w, "{} {} {}", r.s(), r.on_value.unwrap_or(0.0), r.off_value)?;
        for j in &r.support {
            write!(w, " {}", j + 1)?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn read_compact<R: BufRead>(reader: R, origin: impl AsRef<Path>) -> Result<CompactDense> {
    let origin = origin.as_ref();
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let d = header
        .trim()
        .strip_prefix("d=")
        .and_then(|r| r.strip_suffix("compact=hh"))
        .and_then(|n| n.trim().parse::<usize>().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| err(1, format!("expected `d=<int> compact=hh`, found {header:?}")))?;
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let mut toks = line.split_whitespace();
        let mut next_num = |name: &str| -> Result<f64> {
            toks.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(line_no, format!("missing or invalid {name}")))
        };
        let s = next_num("s")? as usize;
        let on = next_num("on")?;
        let off = next_num("off")?;
        let support = toks
            .map(|t| match t.parse::<usize>() {
                Ok(j) if (1..=d).contains(&j) => Ok(j - 1),
                _ => Err(err(line_no, format!("invalid index {t:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if support.len() != s || support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(err(line_no, "support does not match s or is unsorted".into()));
        }
        rows.push(HouseholderRow {
            on_value: (s > 0).then_some(on),
            off_value: off,
            support,
        });
    }
    Ok(CompactDense { d, rows })
}
