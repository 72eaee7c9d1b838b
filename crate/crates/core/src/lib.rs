//! Cartan torsion of (α, β) Finsler metrics: jets, fundamental tensors,
//! Berwald-frame norm scans, semi-C splits and b-independence checks.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// tensor kernels index several arrays with the same loop variables
#![allow(clippy::needless_range_loop)]

pub mod b_independence;
pub mod bruteforce;
pub mod cli;
pub mod error;
pub mod frame;
pub mod jets;
pub mod metric;
pub mod optimize;
pub mod quadrature;
pub mod semi_c;
pub mod tensors;

pub use error::{Error, Result};
pub use jets::TaylorJet3;
pub use metric::{MetricFamily, MetricModel};
