//! Wall-clock timings of operator construction and application.

use std::io::{self, Write};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::harness::sweep::{apply_built, build, feasibility, ExperimentConfig, Method};
use crate::harness::synthetic;
use crate::matrix::{Data, DataRef};
use crate::projections::{pca_operator, SrpScaling};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub d: usize,
    pub n_rows: usize,
    pub k_grid: Vec<usize>,
    pub methods: Vec<Method>,
    /// Timed runs per cell, after one untimed warm-up run.
    pub repeats: usize,
    /// `None` for Gaussian dense data, `Some(p)` for sparse binary data with
    /// density `p`.
    pub density: Option<f64>,
    pub seed: u64,
    pub orthonormalize_rp: bool,
    pub srp_scaling: SrpScaling,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            d: 2500,
            n_rows: 1000,
            k_grid: vec![5, 50, 100, 300, 600],
            methods: vec![Method::Rs, Method::Rp, Method::Srp],
            repeats: 5,
            density: None,
            seed: 0,
            orthonormalize_rp: true,
            srp_scaling: SrpScaling::Paper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchRow {
    pub method: Method,
    pub k: usize,
    pub build_ns: u128,
    pub apply_ns: u128,
}

impl BenchRow {
    pub fn total_ns(&self) -> u128 {
        self.build_ns + self.apply_ns
    }
}

pub const BENCH_HEADER: &str = "method,k,build_ns,apply_ns,total_ns";

pub fn write_bench_csv<W: Write>(mut w: W, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(w, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.method, r.k, r.build_ns, r.apply_ns, r.total_ns())?;
    }
    w.flush()
}

fn median(mut v: Vec<u128>) -> u128 {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Times every feasible `(method, k)` on seeded synthetic data. Runs on a
/// single-threaded pool so methods are compared without scheduling noise.
/// PCA build time includes its eigendecomposition at each `k`.
pub fn runtime_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.repeats == 0 || cfg.d == 0 || cfg.n_rows == 0 {
        return Err(Error::invalid("d, n_rows and repeats must be positive"));
    }
    let mut rng = seed::rng(cfg.seed);
    let data = match cfg.density {
        None => Data::Dense(synthetic::gaussian_matrix(cfg.n_rows, cfg.d, &mut rng)),
        Some(p) => Data::Sparse(synthetic::sparse_binary_matrix(cfg.n_rows, cfg.d, p, &mut rng)?),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg, data.as_ref()))
}

fn run(cfg: &BenchConfig, data: DataRef<'_>) -> Result<Vec<BenchRow>> {
    let exp = ExperimentConfig {
        srp_scaling: cfg.srp_scaling,
        orthonormalize_rp: cfg.orthonormalize_rp,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for &k in &cfg.k_grid {
            if let Some(reason) = feasibility(method, k, data, &exp) {
                log::info!("bench skips {method} at k={k}: {reason}");
                continue;
            }
            let mut builds = Vec::with_capacity(cfg.repeats);
            let mut applies = Vec::with_capacity(cfg.repeats);
            for rep in 0..=cfg.repeats {
                let mut rng = seed::rng(seed::child_seed(cfg.seed, method.tag(), k, rep));
                let t0 = Instant::now();
                let pca = match (method, data) {
                    (Method::Pca, DataRef::Dense(m)) => Some(pca_operator(m, k)?),
                    _ => None,
                };
                let built = build(method, k, data, &exp, pca.as_ref(), &mut rng)?;
                let build_ns = t0.elapsed().as_nanos();
                let t1 = Instant::now();
                let out = apply_built(&built, data)?;
                let apply_ns = t1.elapsed().as_nanos();
                std::hint::black_box(out);
                if rep > 0 {
                    builds.push(build_ns);
                    applies.push(apply_ns);
                }
            }
            rows.push(BenchRow {
                method,
                k,
                build_ns: median(builds),
                apply_ns: median(applies),
            });
        }
    }
    Ok(rows)
}
