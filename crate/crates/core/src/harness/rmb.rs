//! Mean per-target NSNR of the plain sample covariance, the classic
//! sample-support experiment: roughly `2D` snapshots keep the average loss
//! within a factor of two.

use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::exec::{try_map_indexed, Execution};
use crate::metrics::{nsnr, TargetVector};
use crate::randgen::{derive_trial_rng, SeedSpec};
use crate::spd::SpdMatrix;

use super::experiment::draw_until;
use super::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RmbSpec {
    pub dim: usize,
    pub n_samples: usize,
    pub n_trials: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmbResult {
    pub mean_nsnr: f64,
    pub values: Vec<f64>,
}

/// Identity truth, all-ones target, sample covariance estimate.
pub fn rmb_experiment(spec: &RmbSpec, exec: Execution) -> Result<RmbResult> {
    if spec.dim < 2 || spec.n_trials < 1 {
        return Err(Error::ConfigInvalid(
            "need dim ≥ 2 and at least one trial".into(),
        ));
    }
    if spec.n_samples < spec.dim {
        return Err(Error::ConfigInvalid(format!(
            "N = {} < D = {}: the sample covariance is singular",
            spec.n_samples, spec.dim
        )));
    }
    let truth = SpdMatrix::identity(spec.dim);
    let target = TargetVector::ones(spec.dim);
    let values = try_map_indexed(spec.n_trials, exec, |t| {
        let trial = t as u64;
        let mut rng = derive_trial_rng(SeedSpec::new(spec.master_seed, trial));
        let (estimate, _) = draw_until(trial, &truth, spec.n_samples, &mut rng, |s| {
            EstimatorSpec::Sample.estimate(s, None)
        })?;
        nsnr(&target, &truth, &estimate)
    })?;
    Ok(RmbResult {
        mean_nsnr: mean(&values),
        values,
    })
}
