//! Seeded random generation: trial streams, Gaussian snapshots, Wishart
//! matrices and the ground-truth covariance scenarios.
//!
//! Each trial draws from its own ChaCha20 stream keyed by the master seed and
//! selected by the trial index, so the numbers a trial sees do not depend on
//! which worker runs it or in what order.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::SampleSet;
use crate::spd::SpdMatrix;

pub type TrialRng = ChaCha20Rng;

/// Recorded in every output file header.
pub const GENERATOR_NAME: &str =
    "ChaCha20Rng (rand_chacha 0.9, seed_from_u64(master), stream=trial)";

/// Spike on the first coordinate of the low-rank scenarios.
pub const LOW_RANK_SPIKE: f64 = 100.0;

/// Degrees of freedom of the Wishart perturbation in the random scenario.
pub const WISHART_DOF: usize = 20;

const MAX_TRUTH_REDRAWS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }
}

pub fn derive_trial_rng(seed: SeedSpec) -> TrialRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.master_seed);
    rng.set_stream(seed.trial_index);
    rng
}

pub fn standard_normal_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// `n` draws `L·z` with `L = chol(C)` and `z` standard normal.
pub fn mvn_sample<R: Rng + ?Sized>(c: &SpdMatrix, n: usize, rng: &mut R) -> Result<SampleSet> {
    let l = c.cholesky()?;
    let z = DMatrix::from_fn(c.dim(), n, |_, _| rng.sample(StandardNormal));
    SampleSet::new(l * z)
}

/// `(1/dof) Σ z_k z_kᵀ` with `z_k ~ N(0, scale)`, so the mean is `scale`.
pub fn wishart_sample<R: Rng + ?Sized>(
    scale: &SpdMatrix,
    dof: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if dof == 0 {
        return Err(Error::ConfigInvalid("Wishart needs dof ≥ 1".into()));
    }
    let draws = mvn_sample(scale, dof, rng)?;
    Ok(crate::estimators::sample_covariance(&draws))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// SPD matrix with eigenvalues log-uniform in `[lo, hi]` and a Haar-random
/// eigenbasis.
pub fn random_spd<R: Rng + ?Sized>(dim: usize, lo: f64, hi: f64, rng: &mut R) -> Result<SpdMatrix> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::ConfigInvalid(format!(
            "eigenvalue range [{lo}, {hi}] is invalid"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let eig = DVector::from_fn(dim, |_, _| (a + (b - a) * rng.random::<f64>()).exp());
    let v = random_orthogonal(dim, rng);
    SpdMatrix::new(&v * DMatrix::from_diagonal(&eig) * v.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TruthKind {
    Identity,
    ApproxLowRank,
    RandomLowRankPlusWishart,
}

impl TruthKind {
    /// Whether the truth is redrawn in every trial.
    pub fn is_random(self) -> bool {
        matches!(self, TruthKind::RandomLowRankPlusWishart)
    }

    pub fn name(self) -> &'static str {
        match self {
            TruthKind::Identity => "identity",
            TruthKind::ApproxLowRank => "lowrank",
            TruthKind::RandomLowRankPlusWishart => "random",
        }
    }
}

impl fmt::Display for TruthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TruthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(TruthKind::Identity),
            "lowrank" | "low-rank" => Ok(TruthKind::ApproxLowRank),
            "random" => Ok(TruthKind::RandomLowRankPlusWishart),
            other => Err(Error::ConfigInvalid(format!("unknown scenario '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruthScenario {
    pub kind: TruthKind,
    pub dim: usize,
}

/// A ground-truth covariance, plus its expectation when the truth is random.
#[derive(Debug, Clone)]
pub struct Truth {
    pub covariance: SpdMatrix,
    pub prior: Option<SpdMatrix>,
}

fn spike(dim: usize) -> DMatrix<f64> {
    let mut c0 = DMatrix::zeros(dim, dim);
    c0[(0, 0)] = LOW_RANK_SPIKE;
    c0
}

pub fn make_truth<R: Rng + ?Sized>(scenario: TruthScenario, rng: &mut R) -> Result<Truth> {
    let dim = scenario.dim;
    if dim < 2 {
        return Err(Error::ConfigInvalid(format!("dimension {dim} must be ≥ 2")));
    }
    match scenario.kind {
        TruthKind::Identity => Ok(Truth {
            covariance: SpdMatrix::identity(dim),
            prior: None,
        }),
        TruthKind::ApproxLowRank => Ok(Truth {
            covariance: SpdMatrix::new(DMatrix::identity(dim, dim) + spike(dim))?,
            prior: None,
        }),
        TruthKind::RandomLowRankPlusWishart => {
            let identity = SpdMatrix::identity(dim);
            let c0 = spike(dim);
            let prior = SpdMatrix::new(&c0 + identity.matrix())?;
            for attempt in 0..=MAX_TRUTH_REDRAWS {
                let delta = wishart_sample(&identity, WISHART_DOF, rng)?;
                match SpdMatrix::new(&c0 + delta) {
                    Ok(covariance) => {
                        return Ok(Truth {
                            covariance,
                            prior: Some(prior),
                        })
                    }
                    Err(err) => log::warn!("random truth draw {attempt} rejected: {err}"),
                }
            }
            Err(Error::DegenerateInput(format!(
                "random truth failed the PD check {MAX_TRUTH_REDRAWS} times"
            )))
        }
    }
}
