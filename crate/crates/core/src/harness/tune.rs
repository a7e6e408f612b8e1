use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimators::{knowledge_aided, sample_covariance, EstimatorSpec};
use crate::exec::{try_map_indexed, Execution};
use crate::metrics::{evaluate_all, MetricKind, MetricValues};
use crate::randgen::{derive_trial_rng, make_truth, SeedSpec};
use crate::spd::SpdMatrix;

use super::experiment::{check_bound, draw_until, ScenarioSpec};
use super::output::RunHeader;

/// Row order of the tuning table; the NSNR distance row is the reference.
const TUNE_ROWS: [MetricKind; 5] = [
    MetricKind::Frobenius,
    MetricKind::Spectral,
    MetricKind::Kl,
    MetricKind::SymKl,
    MetricKind::NsnrDistance,
];

/// `0, step, 2·step, …, 1`, with values snapped to 1e−9 so that printed
/// grid points stay clean.
pub fn lambda_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::ConfigInvalid(format!(
            "grid step {step} must lie in (0, 1]"
        )));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

#[derive(Debug, Clone)]
pub struct TuneSpec {
    /// Ascending shrinkage values in `[0, 1]`.
    pub lambda_grid: Vec<f64>,
    /// Scenario whose estimator must be knowledge-aided; its λ is ignored.
    pub base: ScenarioSpec,
}

impl TuneSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !matches!(self.base.estimator, EstimatorSpec::KnowledgeAided { .. }) {
            return Err(Error::ConfigInvalid(
                "tuning needs a knowledge-aided estimator".into(),
            ));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::ConfigInvalid("λ grid is empty".into()));
        }
        if self.lambda_grid.iter().any(|l| !(0.0..=1.0).contains(l))
            || self.lambda_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::ConfigInvalid(
                "λ grid must be strictly ascending within [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneRow {
    pub metric: MetricKind,
    pub lambda_star: f64,
    pub mean_nsnr_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub lambda_grid: Vec<f64>,
    /// Trial-averaged metrics at each grid point.
    pub curve: Vec<MetricValues>,
    pub rows: Vec<TuneRow>,
}

impl TuneResult {
    pub fn row(&self, metric: MetricKind) -> Option<&TuneRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn to_csv(&self, header: &RunHeader) -> String {
        let mut out = header.render();
        out.push_str("metric,lambda_star,mean_nsnr_min\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:?},{:?}",
                r.metric.label(),
                r.lambda_star,
                r.mean_nsnr_min
            );
        }
        out
    }

    /// Mean of every metric at every grid point.
    pub fn curve_csv(&self, header: &RunHeader) -> String {
        let mut out = header.render();
        out.push_str("lambda,nsnr_min,d_nsnr,d_kl,d_symkl,d_frobenius,d_spectral\n");
        for (l, m) in self.lambda_grid.iter().zip(&self.curve) {
            let _ = writeln!(
                out,
                "{l:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                m.nsnr_min, m.d_nsnr, m.d_kl, m.d_symkl, m.d_frobenius, m.d_spectral
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:10}  {:>8}  {:>8}\n", "", "lambda*", "NSNRmin");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:10}  {:>8.2}  {:>8.2}",
                r.metric.label(),
                r.lambda_star,
                r.mean_nsnr_min
            );
        }
        out
    }
}

/// Grid search for the shrinkage coefficient minimizing each metric's mean
/// over trials. Trial `t` reuses the same truth and snapshots at every grid
/// point, so only the estimator varies along a λ-curve.
pub fn tune_lambda(spec: &TuneSpec, exec: Execution) -> Result<TuneResult> {
    spec.validate()?;
    let base = &spec.base;
    let fixed = base.fixed_truth()?;
    let explicit_prior = match &base.estimator {
        EstimatorSpec::KnowledgeAided { prior, .. } => prior.clone(),
        _ => None,
    };
    let needs_spd_sample = spec.lambda_grid[0] == 0.0;

    let per_trial = try_map_indexed(base.n_trials, exec, |t| {
        let trial = t as u64;
        let mut rng = derive_trial_rng(SeedSpec::new(base.master_seed, trial));
        let drawn;
        let truth = match &fixed {
            Some(truth) => truth,
            None => {
                drawn = make_truth(base.truth_scenario(), &mut rng)?;
                &drawn
            }
        };
        let prior = explicit_prior
            .as_ref()
            .or(truth.prior.as_ref())
            .unwrap_or(&truth.covariance);
        let (samples, _) = draw_until(trial, &truth.covariance, base.n_samples, &mut rng, |s| {
            if needs_spd_sample {
                SpdMatrix::new(sample_covariance(s))?;
            }
            Ok(s.clone())
        })?;
        spec.lambda_grid
            .iter()
            .map(|&lambda| {
                let estimate = knowledge_aided(&samples, lambda, prior)?;
                let m = evaluate_all(&truth.covariance, &estimate)?;
                check_bound(trial, &m)?;
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let n = per_trial.len() as f64;
    let curve: Vec<MetricValues> = (0..spec.lambda_grid.len())
        .map(|k| {
            let mut acc = [0.0; 6];
            for trial in &per_trial {
                let m = &trial[k];
                for (a, v) in acc.iter_mut().zip([
                    m.d_nsnr,
                    m.d_kl,
                    m.d_symkl,
                    m.d_frobenius,
                    m.d_spectral,
                    m.nsnr_min,
                ]) {
                    *a += v;
                }
            }
            MetricValues {
                d_nsnr: acc[0] / n,
                d_kl: acc[1] / n,
                d_symkl: acc[2] / n,
                d_frobenius: acc[3] / n,
                d_spectral: acc[4] / n,
                nsnr_min: acc[5] / n,
            }
        })
        .collect();

    let rows = TUNE_ROWS
        .iter()
        .map(|&metric| {
            // strict < keeps the smallest λ on ties
            let mut best = 0;
            for k in 1..curve.len() {
                if curve[k].get(metric) < curve[best].get(metric) {
                    best = k;
                }
            }
            TuneRow {
                metric,
                lambda_star: spec.lambda_grid[best],
                mean_nsnr_min: curve[best].nsnr_min,
            }
        })
        .collect();

    Ok(TuneResult {
        lambda_grid: spec.lambda_grid.clone(),
        curve,
        rows,
    })
}
