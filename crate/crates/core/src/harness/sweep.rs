//! Norm-distortion sweep over methods, projection dimensions and repeats.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{parse_bool, parse_k_grid, parse_key_values};
use crate::densify::{householder_apply_binary, householder_apply_in_place, CompactDense};
use crate::error::{Error, Result};
use crate::harness::stats::{ratio_stats_from_projection, PairRatio, RatioStats};
use crate::matrix::{DataRef, DenseMatrix};
use crate::projections::{
    apply_operator, gaussian_rp_matrix, pca_operator, pca_truncate, rs_project,
    rs_sample_indices, sparse_rp_matrix, IndexSubset, ProjectionOperator, SrpScaling,
};
use crate::seed::{self, SeededRng};

/// Methods compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Rs,
    Rp,
    Srp,
    Pca,
    /// Householder densification followed by RS.
    RsHh,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Rs, Method::Rp, Method::Srp, Method::Pca, Method::RsHh];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Rs => "rs",
            Method::Rp => "rp",
            Method::Srp => "srp",
            Method::Pca => "pca",
            Method::RsHh => "rs_hh",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let methods = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Method::from_str)
        .collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(Error::invalid("no methods given"));
    }
    Ok(methods)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub k_grid: Vec<usize>,
    /// Observations drawn per repeat; all their pairs are evaluated.
    pub n_eval_points: usize,
    pub repeats: usize,
    pub master_seed: u64,
    /// Band for the squared-ratio failure count.
    pub epsilon: f64,
    pub srp_scaling: SrpScaling,
    pub orthonormalize_rp: bool,
    /// Keep every pair's ratio in the report, for histograms.
    pub keep_raw_ratios: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Rs, Method::Rp, Method::Srp, Method::Pca],
            k_grid: (5..=600).step_by(5).collect(),
            n_eval_points: 100,
            repeats: 1,
            master_seed: 0,
            epsilon: 0.5,
            srp_scaling: SrpScaling::Paper,
            orthonormalize_rp: true,
            keep_raw_ratios: false,
        }
    }
}

impl ExperimentConfig {
    /// Applies `key = value` settings on top of the defaults.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (key, value) in parse_key_values(text)? {
            cfg.set(&key, &value)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| {
            v.parse::<u64>()
                .map_err(|_| Error::invalid(format!("{key}: not an integer: {v:?}")))
        };
        match key {
            "methods" => self.methods = parse_methods(value)?,
            "k_grid" => self.k_grid = parse_k_grid(value)?,
            "n_eval_points" => self.n_eval_points = num(value)? as usize,
            "repeats" => self.repeats = num(value)? as usize,
            "master_seed" | "seed" => self.master_seed = num(value)?,
            "epsilon" => {
                self.epsilon = value
                    .parse()
                    .map_err(|_| Error::invalid(format!("epsilon: not a number: {value:?}")))?
            }
            "srp_scale" => self.srp_scaling = value.parse()?,
            "orthonormalize" => self.orthonormalize_rp = parse_bool(value)?,
            "raw_ratios" => self.keep_raw_ratios = parse_bool(value)?,
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.methods.is_empty() || self.k_grid.is_empty() {
            return Err(Error::invalid("methods and k_grid must be non-empty"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if self.n_eval_points < 2 || self.n_eval_points > n_rows {
            return Err(Error::invalid(format!(
                "n_eval_points={} outside [2, N={n_rows}]",
                self.n_eval_points
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::invalid("epsilon must be in (0, 1]"));
        }
        Ok(())
    }
}

/// One `(method, k, repeat)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub k: usize,
    pub repeat: usize,
    pub mean_ratio: f64,
    pub p5: f64,
    pub p95: f64,
    pub fail_rate_sq: f64,
    pub mean_sq_ratio: f64,
    pub n_pairs: usize,
    pub n_skipped: usize,
    pub build_ns: u128,
    pub apply_ns: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub method: Method,
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistortionReport {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedCell>,
    /// `(method, k, repeat, pair)`; filled only with `keep_raw_ratios`.
    pub raw: Vec<(Method, usize, usize, PairRatio)>,
}

pub const AGGREGATE_HEADER: &str =
    "method,k,repeat,mean_ratio,p5,p95,fail_rate_sq,n_pairs,n_skipped,build_ns,apply_ns";
pub const RAW_HEADER: &str = "method,k,repeat,pair_u,pair_v,ratio";

impl DistortionReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{AGGREGATE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.method,
                r.k,
                r.repeat,
                r.mean_ratio,
                r.p5,
                r.p95,
                r.fail_rate_sq,
                r.n_pairs,
                r.n_skipped,
                r.build_ns,
                r.apply_ns
            )?;
        }
        w.flush()
    }

    pub fn write_raw_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{RAW_HEADER}")?;
        for (m, k, rep, p) in &self.raw {
            writeln!(w, "{m},{k},{rep},{},{},{}", p.u, p.v, p.ratio)?;
        }
        w.flush()
    }
}

/// A built projection ready to be applied to evaluation rows.
pub(crate) enum Built {
    Operator(ProjectionOperator),
    /// RS subset applied after the Householder reflection.
    Householder(IndexSubset),
}

pub(crate) fn build(
    method: Method,
    k: usize,
    data: DataRef<'_>,
    cfg: &ExperimentConfig,
    pca: Option<&ProjectionOperator>,
    rng: &mut SeededRng,
) -> Result<Built> {
    let d = data.n_cols();
    Ok(match method {
        Method::Rs => Built::Operator(ProjectionOperator::rs(rs_sample_indices(d, k, rng)?)),
        Method::RsHh => Built::Householder(rs_sample_indices(d, k, rng)?),
        Method::Rp => Built::Operator(gaussian_rp_matrix(d, k, cfg.orthonormalize_rp, rng)?),
        Method::Srp => Built::Operator(sparse_rp_matrix(d, k, cfg.srp_scaling, rng)?),
        Method::Pca => {
            let fitted = pca.ok_or_else(|| Error::invalid("PCA needs dense data"))?;
            Built::Operator(pca_truncate(fitted, k)?)
        }
    })
}

/// Scaled projections of every row of `data`.
pub(crate) fn apply_built(built: &Built, data: DataRef<'_>) -> Result<DenseMatrix> {
    match built {
        Built::Operator(op) => apply_operator(op, data, true),
        Built::Householder(subset) => match data {
            DataRef::Dense(m) => {
                let mut reflected = m.clone();
                for i in 0..reflected.n_rows() {
                    householder_apply_in_place(reflected.row_mut(i));
                }
                rs_project(&reflected, subset, true)
            }
            DataRef::Sparse(m) => {
                let compact = CompactDense {
                    d: m.n_cols(),
                    rows: m
                        .rows()
                        .map(|row| householder_apply_binary(row, m.n_cols()))
                        .collect(),
                };
                compact.rs_project(subset, true)
            }
        },
    }
}

pub(crate) fn feasibility(method: Method, k: usize, data: DataRef<'_>, cfg: &ExperimentConfig) -> Option<String> {
    let (n, d) = (data.n_rows(), data.n_cols());
    match method {
        Method::Rs | Method::RsHh if k > d => Some(format!("k={k} exceeds d={d}")),
        Method::Rp if cfg.orthonormalize_rp && k > d => {
            Some(format!("cannot orthonormalize k={k} > d={d}"))
        }
        Method::Pca if matches!(data, DataRef::Sparse(_)) => {
            Some("PCA is only run on dense data".into())
        }
        Method::Pca if k > d.min(n) => Some(format!("k={k} exceeds min(d={d}, N={n})")),
        _ => None,
    }
}

struct CellOutput {
    row: SweepRow,
    raw: Vec<PairRatio>,
}

fn run_cell(
    method: Method,
    k: usize,
    repeat: usize,
    data: DataRef<'_>,
    cfg: &ExperimentConfig,
    pca: Option<&(ProjectionOperator, u128)>,
) -> Result<CellOutput> {
    let mut rng = seed::rng(seed::child_seed(cfg.master_seed, method.tag(), k, repeat));
    let eval_rows = rs_sample_indices(data.n_rows(), cfg.n_eval_points, &mut rng)?
        .indices()
        .to_vec();

    let t0 = Instant::now();
    let built = build(method, k, data, cfg, pca.map(|p| &p.0), &mut rng)?;
    // the PCA eigendecomposition is shared across k; charge its full cost
    let build_ns = t0.elapsed().as_nanos() + pca.map_or(0, |p| p.1);

    let t1 = Instant::now();
    let eval_data = data.select_rows(&eval_rows);
    let projected = apply_built(&built, eval_data.as_ref())?;
    let apply_ns = t1.elapsed().as_nanos();

    let stats: RatioStats = ratio_stats_from_projection(data, &eval_rows, &projected, cfg.epsilon)?;
    Ok(CellOutput {
        row: SweepRow {
            method,
            k,
            repeat,
            mean_ratio: stats.mean_ratio,
            p5: stats.p5,
            p95: stats.p95,
            fail_rate_sq: stats.fail_rate_sq,
            mean_sq_ratio: stats.mean_sq_ratio,
            n_pairs: stats.n_pairs,
            n_skipped: stats.n_skipped,
            build_ns,
            apply_ns,
        },
        raw: if cfg.keep_raw_ratios { stats.ratios } else { Vec::new() },
    })
}

/// Runs every `(method, k, repeat)` cell. Cells are independent and run in
/// parallel; each draws its evaluation rows and its projection from a stream
/// derived from `(master_seed, method, k, repeat)`, so the report apart from
/// timings is identical across runs and thread counts. Infeasible cells are
/// listed in `skipped`.
pub fn distortion_sweep<'a>(
    data: impl Into<DataRef<'a>>,
    cfg: &ExperimentConfig,
) -> Result<DistortionReport> {
    let data = data.into();
    cfg.validate(data.n_rows())?;

    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for &method in &cfg.methods {
        for &k in &cfg.k_grid {
            match feasibility(method, k, data, cfg) {
                Some(reason) => skipped.push(SkippedCell { method, k, reason }),
                None => cells.extend((0..cfg.repeats).map(|r| (method, k, r))),
            }
        }
    }

    let pca = match data {
        DataRef::Dense(m) if cells.iter().any(|c| c.0 == Method::Pca) => {
            let k_max = cells
                .iter()
                .filter(|c| c.0 == Method::Pca)
                .map(|c| c.1)
                .max()
                .unwrap_or(1);
            let t = Instant::now();
            let op = pca_operator(m, k_max)?;
            Some((op, t.elapsed().as_nanos()))
        }
        _ => None,
    };

    let outputs: Vec<CellOutput> = cells
        .par_iter()
        .map(|&(method, k, repeat)| run_cell(method, k, repeat, data, cfg, pca.as_ref()))
        .collect::<Result<_>>()?;

    let mut report = DistortionReport {
        skipped,
        ..Default::default()
    };
    for out in outputs {
        let r = &out.row;
        report
            .raw
            .extend(out.raw.iter().map(|p| (r.method, r.k, r.repeat, *p)));
        report.rows.push(out.row);
    }
    for s in &report.skipped {
        log::info!("skipped {} at k={}: {}", s.method, s.k, s.reason);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synthetic;
    use crate::matrix::SparseBinaryMatrix;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            methods: Method::ALL.to_vec(),
            k_grid: vec![2, 5, 8],
            n_eval_points: 10,
            repeats: 2,
            master_seed: 17,
            ..Default::default()
        }
    }

    #[test]
    fn config_text_overrides_defaults() {
        let cfg = ExperimentConfig::from_config_text(
            "methods = rs,rs_hh\nk_grid = 5:20:5\nrepeats=5\nmaster_seed=3\nsrp_scale=unbiased\n",
        )
        .unwrap();
        assert_eq!(cfg.methods, vec![Method::Rs, Method::RsHh]);
        assert_eq!(cfg.k_grid, vec![5, 10, 15, 20]);
        assert_eq!(cfg.repeats, 5);
        assert_eq!(cfg.srp_scaling, SrpScaling::Unbiased);
        assert_eq!(cfg.n_eval_points, 100);
        assert!(ExperimentConfig::from_config_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_config_text("methods = lda").is_err());
    }

    #[test]
    fn dense_sweep_covers_grid_and_skips_infeasible() {
        let x = synthetic::gaussian_matrix(30, 6, &mut seed::rng(1));
        let report = distortion_sweep(&x, &small_config()).unwrap();
        // k=8 > d=6 is infeasible for rs, rs_hh, rp (orthonormalized) and pca
        assert_eq!(report.skipped.len(), 4);
        assert_eq!(report.rows.len(), (5 * 2 + 1) * 2);
        for r in &report.rows {
            assert_eq!(r.n_pairs + r.n_skipped, 45);
            assert!(r.p5 <= r.p95);
            assert!((0.0..=1.0).contains(&r.fail_rate_sq));
        }
    }

    #[test]
    fn sparse_sweep_excludes_pca() {
        let x = synthetic::sparse_binary_matrix(20, 40, 0.2, &mut seed::rng(2)).unwrap();
        let report = distortion_sweep(&x, &small_config()).unwrap();
        assert!(report.rows.iter().all(|r| r.method != Method::Pca));
        assert_eq!(
            report.skipped.iter().filter(|s| s.method == Method::Pca).count(),
            3
        );
    }

    #[test]
    fn full_dimension_rs_is_exact() {
        let x = synthetic::gaussian_matrix(12, 5, &mut seed::rng(3));
        let cfg = ExperimentConfig {
            methods: vec![Method::Rs, Method::RsHh],
            k_grid: vec![5],
            n_eval_points: 12,
            ..Default::default()
        };
        let report = distortion_sweep(&x, &cfg).unwrap();
        for r in &report.rows {
            assert!((r.mean_ratio - 1.0).abs() < 1e-12, "{r:?}");
            assert_eq!(r.fail_rate_sq, 0.0);
        }
    }

    #[test]
    fn householder_rs_agrees_between_storages() {
        let s = synthetic::sparse_binary_matrix(15, 30, 0.3, &mut seed::rng(4)).unwrap();
        let dense = s.to_dense();
        let cfg = ExperimentConfig {
            methods: vec![Method::RsHh],
            k_grid: vec![7, 20],
            n_eval_points: 15,
            master_seed: 9,
            ..Default::default()
        };
        let a = distortion_sweep(&s, &cfg).unwrap();
        let b = distortion_sweep(&dense, &cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((x.mean_ratio - y.mean_ratio).abs() < 1e-12);
            assert!((x.p95 - y.p95).abs() < 1e-12);
        }
    }

    #[test]
    fn raw_ratios_are_kept_on_request() {
        let x = synthetic::gaussian_matrix(8, 4, &mut seed::rng(5));
        let cfg = ExperimentConfig {
            methods: vec![Method::Rs],
            k_grid: vec![2],
            n_eval_points: 8,
            keep_raw_ratios: true,
            ..Default::default()
        };
        let report = distortion_sweep(&x, &cfg).unwrap();
        assert_eq!(report.raw.len(), 28);
        let mut buf = Vec::new();
        report.write_raw_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(RAW_HEADER));
        assert_eq!(text.lines().count(), 29);
    }

    #[test]
    fn validation_errors() {
        let x = synthetic::gaussian_matrix(5, 4, &mut seed::rng(6));
        let mut cfg = small_config();
        cfg.n_eval_points = 6;
        assert!(distortion_sweep(&x, &cfg).is_err());
        cfg.n_eval_points = 5;
        cfg.repeats = 0;
        assert!(distortion_sweep(&x, &cfg).is_err());
    }

    #[test]
    fn zero_rows_only_produce_skipped_pairs() {
        let s = SparseBinaryMatrix::new(10, vec![vec![]; 4]).unwrap();
        let cfg = ExperimentConfig {
            methods: vec![Method::Rs],
            k_grid: vec![3],
            n_eval_points: 4,
            ..Default::default()
        };
        assert!(distortion_sweep(&s, &cfg).is_err());
    }
}
