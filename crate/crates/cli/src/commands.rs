use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use subspace_core::bounds::{achievable_epsilon, required_k, BoundQuery, BoundVariant};
use subspace_core::config::{parse_bool, parse_k_grid, parse_key_values};
use subspace_core::densify::{densify_dataset, write_compact};
use subspace_core::harness::{
    distortion_sweep, dot_product_failure_rate, jll_failure_rate, parse_methods, runtime_benchmark,
    write_bench_csv, BenchConfig, CheckConfig, CheckResult, ExperimentConfig, Method,
};
use subspace_core::matrixio::{load_pgm, sample_image_windows, write_dense_csv};
use subspace_core::projections::{
    apply_operator, gaussian_rp_matrix, pca_operator, rs_sample_indices, sparse_rp_matrix,
};
use subspace_core::regularity::regularity_of_dataset;
use subspace_core::{seed, Data, Error, ProjectionOperator, RegularityBasis, SrpScaling};

use crate::input::{create_output, finish, load_observations, InputArgs, WindowArgs};

#[derive(Debug, Parser)]
#[command(name = "subspace", version, about = "Random-subspace projection with data-dependent distortion bounds")]
pub struct Cli {
    /// Worker threads for parallel kernels [default: all cores]. Results do
    /// not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regularity constant c of a dataset.
    Regularity(RegularityArgs),
    /// Projection dimension k required for a distortion guarantee.
    Bound(BoundArgs),
    /// Project a dataset and write the result as dense CSV.
    Project(ProjectArgs),
    /// Householder-densify sparse binary data.
    Densify(DensifyArgs),
    /// Norm-distortion sweep over methods and projection dimensions.
    Distort(DistortArgs),
    /// Empirical failure rate of the squared-distance guarantee.
    Jllcheck(CheckArgs),
    /// Empirical failure rate of the dot-product band.
    Dotcheck(CheckArgs),
    /// Time operator construction and application on synthetic data.
    Bench(BenchArgs),
    /// Sample square windows from a PGM image into CSV rows.
    Windows(WindowsArgs),
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Regularity(a) => regularity(a),
        Command::Bound(a) => bound(a),
        Command::Project(a) => project(a),
        Command::Densify(a) => densify(a),
        Command::Distort(a) => distort(a),
        Command::Jllcheck(a) => check(a, CheckKind::Norm),
        Command::Dotcheck(a) => check(a, CheckKind::Dot),
        Command::Bench(a) => bench(a),
        Command::Windows(a) => windows(a),
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::Validation(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Points,
    SampledDifferences,
    AllDifferences,
}

impl From<BasisArg> for RegularityBasis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Points => RegularityBasis::Points,
            BasisArg::SampledDifferences => RegularityBasis::SampledDifferences,
            BasisArg::AllDifferences => RegularityBasis::AllDifferences,
        }
    }
}

#[derive(Debug, Args)]
pub struct RegularityArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Vectors c is measured on. A PGM image counts as one vector.
    #[arg(long, value_enum, default_value = "points")]
    basis: BasisArg,

    /// Row pairs sampled for the sampled-differences basis.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Per-row CSV (`row,c`; `row_i,row_j,c` for difference bases).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn regularity(a: RegularityArgs) -> Result<()> {
    let data = a.input.load_rows()?;
    let mut rng = seed::rng(a.seed);
    let report = regularity_of_dataset(&data, a.basis.into(), a.pairs, &mut rng)?;
    println!(
        "c={} basis={} rows={} zero={} pairs={}",
        report.dataset_c,
        report.basis.as_str(),
        report.per_row_c.len(),
        report.n_zero_rows,
        report.n_pairs_sampled
    );
    if let Some(path) = &a.output {
        let mut w = create_output(path)?;
        let fmt = |c: &Option<f64>| c.map_or_else(|| "NA".to_string(), |v| v.to_string());
        if report.pairs.is_empty() {
            writeln!(w, "row,c")?;
            for (i, c) in report.per_row_c.iter().enumerate() {
                writeln!(w, "{i},{}", fmt(c))?;
            }
        } else {
            writeln!(w, "row_i,row_j,c")?;
            for ((i, j), c) in report.pairs.iter().zip(&report.per_row_c) {
                writeln!(w, "{i},{j},{}", fmt(c))?;
            }
        }
        finish(w, path)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Regularity constant, at least 1.
    #[arg(long)]
    c: f64,

    /// Allowed relative distortion of squared distances, in (0, 1].
    #[arg(long)]
    epsilon: f64,

    /// Failure probability, in (0, 1].
    #[arg(long)]
    delta: f64,

    /// Number of points.
    #[arg(long)]
    n: u64,

    /// Ambient dimension; required for the serfling variant.
    #[arg(long)]
    d: Option<u64>,

    #[arg(long, default_value = "basic", value_parser = parse_variant)]
    variant: BoundVariant,

    /// Also report the ε certified at this k.
    #[arg(long)]
    at_k: Option<u64>,
}

fn parse_variant(s: &str) -> std::result::Result<BoundVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_srp(s: &str) -> std::result::Result<SrpScaling, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn bound(a: BoundArgs) -> Result<()> {
    let r = required_k(&BoundQuery {
        c: a.c,
        epsilon: a.epsilon,
        delta: a.delta,
        n_points: a.n,
        d: a.d,
        variant: a.variant,
    })?;
    println!(
        "k={} feasible={} raw_bound={} variant={}",
        r.k,
        r.feasible,
        r.raw_bound,
        a.variant.as_str()
    );
    if let Some(k) = a.at_k {
        let e = achievable_epsilon(a.c, k, a.delta, a.n, a.d, a.variant)?;
        println!("at k={k}: epsilon={} guaranteed={}", e.epsilon, e.guaranteed);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjectMethod {
    Rs,
    Rp,
    Srp,
    Pca,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_enum)]
    method: ProjectMethod,

    /// Projection dimension.
    #[arg(long)]
    k: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Apply the method's scale factor (default).
    #[arg(long, overrides_with = "no_scale")]
    scale: bool,

    /// Write unscaled projections.
    #[arg(long, overrides_with = "scale")]
    no_scale: bool,

    /// SRP scale: paper = sqrt(1/k), unbiased = sqrt(3/k).
    #[arg(long, default_value = "paper", value_parser = parse_srp)]
    srp_scale: SrpScaling,

    /// Use i.i.d. Gaussian rows for rp instead of orthonormalized ones.
    #[arg(long)]
    no_orthonormalize: bool,

    /// Output CSV of projected rows.
    #[arg(long, short)]
    output: PathBuf,
}

fn project(a: ProjectArgs) -> Result<()> {
    let data = a.input.load_rows()?;
    let d = data.as_ref().n_cols();
    let mut rng = seed::rng(a.seed);
    let op: ProjectionOperator = match a.method {
        ProjectMethod::Rs => ProjectionOperator::rs(rs_sample_indices(d, a.k, &mut rng)?),
        ProjectMethod::Rp => gaussian_rp_matrix(d, a.k, !a.no_orthonormalize, &mut rng)?,
        ProjectMethod::Srp => sparse_rp_matrix(d, a.k, a.srp_scale, &mut rng)?,
        ProjectMethod::Pca => match &data {
            Data::Dense(m) => pca_operator(m, a.k)?,
            Data::Sparse(_) => return Err(invalid("pca needs dense (csv or pgm) input")),
        },
    };
    let y = apply_operator(&op, &data, !a.no_scale)?;
    let mut w = create_output(&a.output)?;
    write_dense_csv(&mut w, &y, None)?;
    finish(w, &a.output)?;
    println!(
        "method={} rows={} d={d} k={} scale={}",
        op.kind.as_str(),
        y.n_rows(),
        a.k,
        if a.no_scale { 1.0 } else { op.scale }
    );
    if let Some(subset) = op.subset() {
        log::info!("selected coordinates {:?}", subset.indices());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct DensifyArgs {
    /// Sparse binary input (`d=<int>` header, 1-based indices).
    #[command(flatten)]
    input: InputArgs,

    /// Write the reflected rows as dense CSV instead of the compact format.
    #[arg(long)]
    expand: bool,

    /// Output file; without it only c and c' are printed.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn densify(a: DensifyArgs) -> Result<()> {
    let Data::Sparse(m) = a.input.load_rows()? else {
        return Err(invalid("densify needs sparse binary input"));
    };
    let out = densify_dataset(&m)?;
    println!(
        "c={} c'={} rows={} d={} zero_rows={}",
        out.before.dataset_c,
        out.after.dataset_c,
        m.n_rows(),
        m.n_cols(),
        out.before.n_zero_rows
    );
    if let Some(path) = &a.output {
        let mut w = create_output(path)?;
        if a.expand {
            write_dense_csv(&mut w, &out.data.expand(), None)?;
        } else {
            write_compact(&mut w, &out.data)?;
        }
        finish(w, path)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct DistortArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    windows: WindowArgs,

    /// `key = value` file with ExperimentConfig fields (methods, k_grid,
    /// n_eval_points, repeats, master_seed, epsilon, srp_scale,
    /// orthonormalize, raw_ratios). Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Comma-separated subset of rs,rp,srp,pca,rs_hh [default: rs,rp,srp,pca].
    #[arg(long)]
    methods: Option<String>,

    /// Projection dimensions: `5,10,20` or `start:stop:step` [default: 5:600:5].
    #[arg(long)]
    k_grid: Option<String>,

    /// Observations drawn per repeat [default: 100].
    #[arg(long)]
    n_eval: Option<usize>,

    /// Repeats per (method, k) [default: 5 for sparse input, else 1].
    #[arg(long)]
    repeats: Option<usize>,

    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,

    /// Band for the squared-ratio failure rate [default: 0.5].
    #[arg(long)]
    epsilon: Option<f64>,

    /// SRP scale: paper or unbiased [default: paper].
    #[arg(long)]
    srp_scale: Option<String>,

    /// Use i.i.d. Gaussian rows for rp instead of orthonormalized ones.
    #[arg(long)]
    no_orthonormalize: bool,

    /// Aggregate CSV output.
    #[arg(long, short)]
    output: PathBuf,

    /// Per-pair ratio CSV output, for histograms.
    #[arg(long)]
    raw_output: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_key_values(&text)?.into_iter().collect())
}

fn distort(a: DistortArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    let file = match &a.config {
        Some(p) => read_config(p)?,
        None => Vec::new(),
    };
    for (k, v) in &file {
        cfg.set(k, v)?;
    }
    let seed_value = a.seed.unwrap_or(cfg.master_seed);
    let data = load_observations(&a.input, &a.windows, seed_value)?;
    if matches!(data, Data::Sparse(_)) && a.repeats.is_none() && !file.iter().any(|(k, _)| k == "repeats") {
        cfg.repeats = 5;
    }
    if let Some(m) = &a.methods {
        cfg.methods = parse_methods(m)?;
    }
    if let Some(g) = &a.k_grid {
        cfg.k_grid = parse_k_grid(g)?;
    }
    if let Some(n) = a.n_eval {
        cfg.n_eval_points = n;
    }
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    cfg.master_seed = seed_value;
    if let Some(e) = a.epsilon {
        cfg.epsilon = e;
    }
    if let Some(s) = &a.srp_scale {
        cfg.srp_scaling = s.parse()?;
    }
    if a.no_orthonormalize {
        cfg.orthonormalize_rp = false;
    }
    if a.raw_output.is_some() {
        cfg.keep_raw_ratios = true;
    }

    let report = distortion_sweep(&data, &cfg)?;
    let mut w = create_output(&a.output)?;
    report.write_csv(&mut w)?;
    finish(w, &a.output)?;
    if let Some(path) = &a.raw_output {
        let mut w = create_output(path)?;
        report.write_raw_csv(&mut w)?;
        finish(w, path)?;
    }
    for s in &report.skipped {
        eprintln!("skipped {} k={}: {}", s.method, s.k, s.reason);
    }
    println!(
        "cells={} skipped={} methods={} rows={} d={}",
        report.rows.len(),
        report.skipped.len(),
        method_list(&cfg.methods),
        data.as_ref().n_rows(),
        data.as_ref().n_cols()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    windows: WindowArgs,

    /// `key = value` file with fields variant, epsilon, delta, draws, seed.
    /// Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Bound used to pick k: basic or serfling [default: serfling].
    #[arg(long, value_parser = parse_variant)]
    variant: Option<BoundVariant>,

    /// [default: 0.5]
    #[arg(long)]
    epsilon: Option<f64>,

    /// [default: 0.1]
    #[arg(long)]
    delta: Option<f64>,

    /// Independent RS draws [default: 50].
    #[arg(long)]
    draws: Option<usize>,

    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,

    /// One-line CSV summary.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy)]
enum CheckKind {
    Norm,
    Dot,
}

fn check(a: CheckArgs, kind: CheckKind) -> Result<()> {
    let mut cfg = CheckConfig::default();
    if let Some(path) = &a.config {
        for (k, v) in read_config(path)? {
            let num = |v: &str| v.parse::<f64>().map_err(|_| invalid(format!("{k}: not a number: {v:?}")));
            match k.as_str() {
                "variant" => cfg.variant = v.parse()?,
                "epsilon" => cfg.epsilon = num(&v)?,
                "delta" => cfg.delta = num(&v)?,
                "draws" => cfg.draws = v.parse().map_err(|_| invalid(format!("draws: not a count: {v:?}")))?,
                "seed" | "master_seed" => {
                    cfg.master_seed = v.parse().map_err(|_| invalid(format!("seed: not an integer: {v:?}")))?
                }
                other => bail!(invalid(format!("unknown config key {other:?}"))),
            }
        }
    }
    cfg.variant = a.variant.unwrap_or(cfg.variant);
    cfg.epsilon = a.epsilon.unwrap_or(cfg.epsilon);
    cfg.delta = a.delta.unwrap_or(cfg.delta);
    cfg.draws = a.draws.unwrap_or(cfg.draws);
    cfg.master_seed = a.seed.unwrap_or(cfg.master_seed);

    let data = load_observations(&a.input, &a.windows, cfg.master_seed)?;
    let r: CheckResult = match kind {
        CheckKind::Norm => jll_failure_rate(&data, &cfg)?,
        CheckKind::Dot => dot_product_failure_rate(&data, &cfg)?,
    };
    let rate = r.rate.map_or_else(|| "NA".to_string(), |v| v.to_string());
    println!(
        "c={} k={} feasible={} failed_draws={}/{} rate={rate} allowed={} within={}",
        r.c,
        r.k,
        r.feasible,
        r.failed_draws,
        r.draws,
        r.allowed,
        r.within_guarantee()
    );
    if let Some(path) = &a.output {
        let mut w = create_output(path)?;
        writeln!(w, "c,k,feasible,raw_bound,draws,failed_draws,rate,allowed")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{rate},{}",
            r.c, r.k, r.feasible, r.raw_bound, r.draws, r.failed_draws, r.allowed
        )?;
        finish(w, path)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `key = value` file with fields d, n_rows, k_grid, methods, repeats,
    /// density, seed, orthonormalize, srp_scale. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Dimension of the synthetic data [default: 2500].
    #[arg(long)]
    d: Option<usize>,

    /// Rows of synthetic data [default: 1000].
    #[arg(long)]
    n: Option<usize>,

    /// [default: 5,50,100,300,600]
    #[arg(long)]
    k_grid: Option<String>,

    /// [default: rs,rp,srp]
    #[arg(long)]
    methods: Option<String>,

    /// Timed runs per cell, after one warm-up [default: 5].
    #[arg(long)]
    repeats: Option<usize>,

    /// Use sparse binary data with this density instead of Gaussian data.
    #[arg(long)]
    density: Option<f64>,

    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,

    /// Timing CSV (`method,k,build_ns,apply_ns,total_ns`).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::default();
    if let Some(path) = &a.config {
        for (k, v) in read_config(path)? {
            let count = |v: &str| v.parse::<usize>().map_err(|_| invalid(format!("{k}: not a count: {v:?}")));
            match k.as_str() {
                "d" => cfg.d = count(&v)?,
                "n_rows" | "n" => cfg.n_rows = count(&v)?,
                "k_grid" => cfg.k_grid = parse_k_grid(&v)?,
                "methods" => cfg.methods = parse_methods(&v)?,
                "repeats" => cfg.repeats = count(&v)?,
                "density" => {
                    cfg.density = Some(v.parse().map_err(|_| invalid(format!("density: not a number: {v:?}")))?)
                }
                "seed" => cfg.seed = v.parse().map_err(|_| invalid(format!("seed: not an integer: {v:?}")))?,
                "orthonormalize" => cfg.orthonormalize_rp = parse_bool(&v)?,
                "srp_scale" => cfg.srp_scaling = v.parse()?,
                other => bail!(invalid(format!("unknown config key {other:?}"))),
            }
        }
    }
    cfg.d = a.d.unwrap_or(cfg.d);
    cfg.n_rows = a.n.unwrap_or(cfg.n_rows);
    if let Some(g) = &a.k_grid {
        cfg.k_grid = parse_k_grid(g)?;
    }
    if let Some(m) = &a.methods {
        cfg.methods = parse_methods(m)?;
    }
    cfg.repeats = a.repeats.unwrap_or(cfg.repeats);
    cfg.density = a.density.or(cfg.density);
    cfg.seed = a.seed.unwrap_or(cfg.seed);

    let rows = runtime_benchmark(&cfg)?;
    for r in &rows {
        println!(
            "{:<6} k={:<6} build={:>12}ns apply={:>12}ns",
            r.method.tag(),
            r.k,
            r.build_ns,
            r.apply_ns
        );
    }
    if let Some(path) = &a.output {
        let mut w = create_output(path)?;
        write_bench_csv(&mut w, &rows)?;
        finish(w, path)?;
    }
    if rows.is_empty() {
        return Err(invalid("no feasible (method, k) cells to time"));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct WindowsArgs {
    /// PGM image (P2 or P5).
    #[arg(long, short)]
    input: PathBuf,

    /// Window side length.
    #[arg(long, default_value_t = 50)]
    window: usize,

    /// Windows to sample.
    #[arg(long, default_value_t = 1000)]
    count: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV, one flattened window per row.
    #[arg(long, short)]
    output: PathBuf,
}

fn windows(a: WindowsArgs) -> Result<()> {
    let img = load_pgm(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut rng = seed::rng(seed::child_seed(a.seed, "windows", a.window, 0));
    let m = sample_image_windows(&img, a.window, a.count, &mut rng)?;
    let mut w = create_output(&a.output)?;
    write_dense_csv(&mut w, &m, None)?;
    finish(w, &a.output)?;
    println!("rows={} d={} image={}x{}", m.n_rows(), m.n_cols(), img.width, img.height);
    Ok(())
}

fn method_list(methods: &[Method]) -> String {
    methods.iter().map(|m| m.tag()).collect::<Vec<_>>().join(",")
}
