//! Experiment harness: distortion sweeps, guarantee checks and timings.

pub mod bench;
pub mod checks;
pub mod stats;
pub mod sweep;
pub mod synthetic;

pub use bench::{runtime_benchmark, write_bench_csv, BenchConfig, BenchRow};
pub use checks::{
    dot_product_failure_rate, jll_failure_rate, one_hot_zero_probability,
    one_hot_zero_probability_enumerated, CheckConfig, CheckResult, OneHotZero,
};
pub use stats::{nearest_rank, pairwise_ratio_stats, PairRatio, RatioStats};
pub use sweep::{
    distortion_sweep, parse_methods, DistortionReport, ExperimentConfig, Method, SkippedCell,
    SweepRow,
};
