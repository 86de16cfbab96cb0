//! Sampling and perfect recovery of bandlimited graph signals on product
//! graphs.
//!
//! A product graph built from small factor graphs ("atoms") under the
//! Kronecker, Cartesian or strong product shares the Kronecker eigenbasis of
//! its factors. That lets sample selection, the sampling and interpolation
//! operators, and the spectrum itself be computed on the atoms only:
//!
//! * [`graph`]: graphs, product kinds, flat/tuple node indexing.
//! * [`spectral`]: eigendecomposition, GFT, the lazy product spectrum.
//! * [`sampling`]: sample-set selection and recovery on one graph.
//! * [`product`]: factor-wise sampling plans and implicit Kronecker operators.
//! * [`signals`]: synthesis of bandlimited signals, error metric, generators.
//! * [`bench`]: factorized vs dense benchmarks and the Cartesian study.
//! * [`io`]: Matrix Market and signal files.

pub mod bench;
pub mod error;
pub mod exec;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod product;
pub mod sampling;
pub mod signals;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{Graph, NodeTuple, ProductGraph, ProductKind};
pub use product::{
    build_product_plan, build_product_plan_with, kron_apply, product_reconstruct, product_sample,
    product_sample_set, project_support, sampled_product_shift, FactorSampling, ProductSamplingPlan,
};
pub use sampling::{
    build_plan, reconstruct, sample, sampled_graph, select_sample_set, SampledGraph, SamplingPlan,
    SelectionStrategy, SupportSet,
};
pub use spectral::{eigendecompose, FreqIndex, ProductSpectrum, Spectrum};

/// Crate version, embedded in every file the tools write.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
