//! Worst-case normalized SNR (NSNR) distance between covariance matrices.
//!
//! The crate provides the SPD matrix kernel ([`spd`]), the covariance
//! distances ([`metrics`]), the estimators used in the experiments
//! ([`estimators`]), seeded random generation ([`randgen`]), an independent
//! brute-force check of the closed-form worst case ([`oracle`]) and the
//! Monte Carlo harness ([`harness`]).
//!
//! Trials run on rayon when the `parallel` feature is enabled (the
//! default); without it every [`exec::Execution`] runs sequentially.

pub mod error;
pub mod estimators;
pub mod exec;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod randgen;
pub mod spd;

pub use error::{Error, Result};
pub use estimators::{EstimatorSpec, SampleSet};
pub use exec::Execution;
pub use metrics::{evaluate_all, MetricKind, MetricValues, TargetVector};
pub use spd::{EigenPair, SpdMatrix};
