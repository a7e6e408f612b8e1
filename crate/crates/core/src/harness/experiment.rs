use rand::Rng;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, SampleSet};
use crate::exec::{try_map_indexed, Execution};
use crate::metrics::{evaluate_all, MetricValues};
use crate::randgen::{
    derive_trial_rng, make_truth, mvn_sample, SeedSpec, Truth, TruthKind, TruthScenario,
};
use crate::spd::SpdMatrix;

/// Redraws allowed per trial when an estimate fails the PD check.
pub const MAX_REDRAWS: u32 = 100;

/// Stream index reserved for generating a fixed truth once per run.
const FIXED_TRUTH_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub truth: TruthKind,
    pub dim: usize,
    pub n_samples: usize,
    pub estimator: EstimatorSpec,
    pub n_trials: usize,
    pub master_seed: u64,
}

impl ScenarioSpec {
    pub fn new(truth: TruthKind, n_samples: usize, estimator: EstimatorSpec) -> Self {
        Self {
            truth,
            dim: 10,
            n_samples,
            estimator,
            n_trials: 1000,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 2 {
            return Err(Error::ConfigInvalid(format!(
                "n_trials = {} must be ≥ 2",
                self.n_trials
            )));
        }
        if self.dim < 2 {
            return Err(Error::ConfigInvalid(format!(
                "dim = {} must be ≥ 2",
                self.dim
            )));
        }
        if self.n_samples < 1 {
            return Err(Error::ConfigInvalid("n_samples must be ≥ 1".into()));
        }
        self.estimator.validate()
    }

    pub fn truth_scenario(&self) -> TruthScenario {
        TruthScenario {
            kind: self.truth,
            dim: self.dim,
        }
    }

    /// Truth shared by every trial, or `None` when it is redrawn per trial.
    pub(crate) fn fixed_truth(&self) -> Result<Option<Truth>> {
        if self.truth.is_random() {
            return Ok(None);
        }
        let mut rng = derive_trial_rng(SeedSpec::new(self.master_seed, FIXED_TRUTH_STREAM));
        make_truth(self.truth_scenario(), &mut rng).map(Some)
    }
}

/// The metrics of one Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub metrics: MetricValues,
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    /// Sorted by trial index.
    pub records: Vec<TrialRecord>,
    /// Estimates rejected as singular and redrawn, over all trials.
    pub redraws: u64,
}

impl TrialRun {
    pub fn column(&self, f: impl Fn(&MetricValues) -> f64) -> Vec<f64> {
        self.records.iter().map(|r| f(&r.metrics)).collect()
    }
}

/// `d_nsnr ≤ d_kl` must hold for every pair; a violation means a numerical
/// fault upstream.
pub fn check_bound(trial: u64, m: &MetricValues) -> Result<()> {
    if m.d_nsnr > m.d_kl + 1e-12 * m.d_kl.max(1.0) {
        return Err(Error::BoundViolation {
            trial,
            d_nsnr: m.d_nsnr,
            d_kl: m.d_kl,
        });
    }
    Ok(())
}

/// Draws snapshots until `accept` succeeds, rejecting singular outcomes.
pub(crate) fn draw_until<R, T>(
    trial: u64,
    truth: &SpdMatrix,
    n_samples: usize,
    rng: &mut R,
    mut accept: impl FnMut(&SampleSet) -> Result<T>,
) -> Result<(T, u32)>
where
    R: Rng + ?Sized,
{
    for redraws in 0..=MAX_REDRAWS {
        let samples = mvn_sample(truth, n_samples, rng)?;
        match accept(&samples) {
            Ok(v) => return Ok((v, redraws)),
            Err(Error::NotPositiveDefinite { .. }) => {
                log::debug!(
                    "trial {trial}: singular estimate, redrawing ({})",
                    redraws + 1
                );
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::EstimatorSingular {
        trial,
        redraws: MAX_REDRAWS,
    })
}

pub fn run_trials(spec: &ScenarioSpec, exec: Execution) -> Result<TrialRun> {
    spec.validate()?;
    let fixed = spec.fixed_truth()?;
    let outcomes = try_map_indexed(spec.n_trials, exec, |t| {
        let trial = t as u64;
        let mut rng = derive_trial_rng(SeedSpec::new(spec.master_seed, trial));
        let drawn;
        let truth = match &fixed {
            Some(truth) => truth,
            None => {
                drawn = make_truth(spec.truth_scenario(), &mut rng)?;
                &drawn
            }
        };
        let prior = truth.prior.as_ref().unwrap_or(&truth.covariance);
        let (estimate, redraws) =
            draw_until(trial, &truth.covariance, spec.n_samples, &mut rng, |s| {
                spec.estimator.estimate(s, Some(prior))
            })?;
        let metrics = evaluate_all(&truth.covariance, &estimate)?;
        check_bound(trial, &metrics)?;
        Ok((
            TrialRecord {
                trial_index: trial,
                metrics,
            },
            redraws,
        ))
    })?;
    let redraws = outcomes.iter().map(|(_, r)| u64::from(*r)).sum();
    if redraws > 0 {
        log::info!(
            "{redraws} singular estimates redrawn over {} trials",
            spec.n_trials
        );
    }
    Ok(TrialRun {
        records: outcomes.into_iter().map(|(r, _)| r).collect(),
        redraws,
    })
}
