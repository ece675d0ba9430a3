//! Random-subspace dimensionality reduction with data-dependent
//! distortion bounds.
//!
//! Random subspace (RS) projection keeps a uniformly random set of `k` of the
//! `d` coordinates, rescaled by `sqrt(d/k)`. How large `k` must be depends on
//! the regularity constant `c = d·max xᵢ²/‖x‖²` of the data; see
//! [`regularity`] and [`bounds`]. [`densify`] lowers `c` for sparse binary
//! data with a fixed Householder reflection, and [`projections`] provides
//! Gaussian, sparse and PCA projections for comparison.

pub mod bounds;
pub mod config;
pub mod densify;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod matrixio;
pub mod projections;
pub mod regularity;
pub mod seed;

pub use bounds::{BoundQuery, BoundResult, BoundVariant};
pub use error::{Error, Result};
pub use matrix::{Data, DataRef, DenseMatrix, GrayImage, SparseBinaryMatrix};
pub use projections::{IndexSubset, ProjectionKind, ProjectionOperator, SrpScaling};
pub use regularity::{RegularityBasis, RegularityReport};
