//! Shapley attribution of statistical dependence to individual features.
//!
//! A dependence measure between a target and a coalition of features is used
//! as the characteristic function of a cooperative game, and its Shapley
//! values attribute the dependence to individual features. With the labels as
//! target this describes the data; with a model's predictions or residuals it
//! describes, and diagnoses, the model.
//!
//! ```
//! use depshap::attribution::{adl, AttributionRequest};
//! use depshap::dependence::Measure;
//! use depshap::dgp::gen_quadratic;
//!
//! let s = gen_quadratic(300, &[0.0, 2.0, 4.0, 6.0, 8.0], 1)?;
//! let dec = adl(&AttributionRequest::new(s.x, Measure::Dc).with_labels(s.y))?;
//! assert!(dec.values[4] > dec.values[0]);
//! # Ok::<(), depshap::Error>(())
//! ```
//!
//! Modules:
//!
//! * [`dependence`]: R², distance correlation, affine-invariant distance
//!   correlation and HSIC, plus the joint coalition table.
//! * [`shapley`]: exact, Monte Carlo and block-partitioned engines.
//! * [`attribution`]: ADL/ADP/ADR requests, resampling bands, comparisons.
//! * [`dgp`]: the synthetic processes and least-squares fitting.
//! * [`scenarios`]: the reference experiments with their checks.
//! * [`rng`]: seeded, stream-split random number generation.

pub mod attribution;
pub mod data;
pub mod dependence;
pub mod dgp;
pub mod error;
pub mod rng;
pub mod scenarios;
pub mod shapley;

pub use data::{DataMatrix, FeatureSubset};
pub use error::{Error, Result};

// Guide chapters are compiled and run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/shapley.md")]
    mod shapley {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/attribution.md")]
    mod attribution {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
