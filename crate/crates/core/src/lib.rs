//! Regression on (possibly rank-deficient) covariance matrices through
//! tangent-space embeddings.
//!
//! A pipeline projects each `P×P` covariance with a spatial filter
//! ([`filters`]), maps the result to a vector space with one of four
//! embeddings ([`manifold`]) and fits a ridge model whose penalty is chosen
//! by generalized cross-validation ([`regress`]). [`simgen`] generates
//! synthetic covariances from a linear mixing model where the link between
//! source power and target decides which embedding is exactly linear.
//!
//! ```
//! use covreg::manifold::EmbeddingKind;
//! use covreg::regress::{run_pipeline_cv, FilterSpec, PipelineSpec};
//! use covreg::simgen::{sample_bundle, GenerativeConfig};
//!
//! let sample = sample_bundle(&GenerativeConfig { n: 40, ..Default::default() }).unwrap();
//! let spec = PipelineSpec::new(FilterSpec::Identity, EmbeddingKind::GeometricTangent);
//! let report = run_pipeline_cv(&sample.bundle, &spec, 5, 0).unwrap();
//! assert!(report.mean_mae < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod cli;
pub mod error;
pub mod filters;
pub mod io;
pub mod manifold;
pub mod regress;
pub mod simgen;
pub mod symmat;

pub use bundle::{CovarianceBundle, Provenance};
pub use error::{Error, Result};
pub use symmat::{svd_rect, EigenPairs, Svd, SymFn, SymMat};
