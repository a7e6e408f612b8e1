//! Covariance estimators built from zero-mean noise snapshots.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spd::{check_dim, SpdMatrix};

/// `N` zero-mean snapshots of dimension `D`, stored as the columns of a
/// `D × N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: DMatrix<f64>,
}

impl SampleSet {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::ConfigInvalid(
                "sample set needs N ≥ 1 and D ≥ 1".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn from_vectors(samples: &[DVector<f64>]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::ConfigInvalid("sample set needs N ≥ 1".into()))?;
        for v in samples {
            check_dim(first.len(), v.len())?;
        }
        Self::new(DMatrix::from_columns(samples))
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// `(1/N) Σ v_i v_iᵀ`, without mean subtraction. Symmetric PSD, and SPD only
/// when the snapshots span the space.
pub fn sample_covariance(samples: &SampleSet) -> DMatrix<f64> {
    let x = samples.data();
    let mut s = x * x.transpose() / samples.len() as f64;
    crate::spd::symmetrize_in_place(&mut s);
    s
}

/// `S + λI`.
pub fn diagonal_loading(s: &DMatrix<f64>, lambda: f64) -> Result<SpdMatrix> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::ConfigInvalid(format!(
            "loading λ = {lambda} must be ≥ 0"
        )));
    }
    let mut loaded = s.clone();
    for i in 0..loaded.nrows().min(loaded.ncols()) {
        loaded[(i, i)] += lambda;
    }
    SpdMatrix::new(loaded)
}

/// Result of [`ledoit_wolf`].
#[derive(Debug, Clone)]
pub struct LedoitWolf {
    pub estimate: SpdMatrix,
    /// Weight on the scaled-identity target, in `[0, 1]`.
    pub intensity: f64,
    /// Set when the sample covariance was already a multiple of the identity.
    pub degenerate: bool,
}

/// Linear shrinkage of the sample covariance toward `m·I`, `m = Tr(S)/D`,
/// with the asymptotically optimal data-driven intensity.
pub fn ledoit_wolf(samples: &SampleSet) -> Result<LedoitWolf> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::ConfigInvalid(format!(
            "Ledoit-Wolf needs at least 2 samples, got {n}"
        )));
    }
    let dim = samples.dim();
    let p = dim as f64;
    let s = sample_covariance(samples);
    let m = s.trace() / p;

    let mut centered = s.clone();
    for i in 0..dim {
        centered[(i, i)] -= m;
    }
    let d2 = centered.norm_squared() / p;

    if d2 <= 1e-15 * m * m {
        let estimate = SpdMatrix::new(DMatrix::identity(dim, dim) * m)?;
        return Ok(LedoitWolf {
            estimate,
            intensity: 1.0,
            degenerate: true,
        });
    }

    // ‖v vᵀ − S‖²_F = ‖v‖⁴ − 2 vᵀSv + ‖S‖²_F
    let s_norm2 = s.norm_squared();
    let b2_sum: f64 = samples
        .data()
        .column_iter()
        .map(|v| {
            let vv = v.norm_squared();
            let vsv = v.dot(&(&s * v));
            (vv * vv - 2.0 * vsv + s_norm2).max(0.0)
        })
        .sum();
    let b2 = b2_sum / (n as f64 * n as f64) / p;
    let b2 = b2.min(d2);
    let intensity = b2 / d2;

    let mut shrunk = s * (1.0 - intensity);
    for i in 0..dim {
        shrunk[(i, i)] += intensity * m;
    }
    Ok(LedoitWolf {
        estimate: SpdMatrix::new(shrunk)?,
        intensity,
        degenerate: false,
    })
}

/// `(1−λ)·S + λ·prior`.
pub fn knowledge_aided(samples: &SampleSet, lambda: f64, prior: &SpdMatrix) -> Result<SpdMatrix> {
    check_lambda_unit(lambda)?;
    check_dim(prior.dim(), samples.dim())?;
    let s = sample_covariance(samples);
    SpdMatrix::new(s * (1.0 - lambda) + prior.matrix() * lambda)
}

fn check_lambda_unit(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(format!(
            "shrinkage λ = {lambda} must lie in [0, 1]"
        )))
    }
}

/// Which estimator to build from a [`SampleSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    Sample,
    DiagonalLoading {
        lambda: f64,
    },
    LedoitWolf,
    /// With `prior: None` the prior is supplied by the caller at estimation
    /// time (the harness uses the scenario's mean covariance).
    KnowledgeAided {
        lambda: f64,
        prior: Option<SpdMatrix>,
    },
}

impl EstimatorSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EstimatorSpec::Sample | EstimatorSpec::LedoitWolf => Ok(()),
            EstimatorSpec::DiagonalLoading { lambda } => {
                if *lambda >= 0.0 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::ConfigInvalid(format!(
                        "loading λ = {lambda} must be ≥ 0"
                    )))
                }
            }
            EstimatorSpec::KnowledgeAided { lambda, .. } => check_lambda_unit(*lambda),
        }
    }

    /// Short label used in table headers.
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::Sample => "sample".into(),
            EstimatorSpec::DiagonalLoading { lambda } => format!("lambda={lambda}"),
            EstimatorSpec::LedoitWolf => "LW".into(),
            EstimatorSpec::KnowledgeAided { lambda, .. } => format!("ka_lambda={lambda}"),
        }
    }

    pub fn estimate(
        &self,
        samples: &SampleSet,
        fallback_prior: Option<&SpdMatrix>,
    ) -> Result<SpdMatrix> {
        match self {
            EstimatorSpec::Sample => SpdMatrix::new(sample_covariance(samples)),
            EstimatorSpec::DiagonalLoading { lambda } => {
                diagonal_loading(&sample_covariance(samples), *lambda)
            }
            EstimatorSpec::LedoitWolf => Ok(ledoit_wolf(samples)?.estimate),
            EstimatorSpec::KnowledgeAided { lambda, prior } => {
                let prior = prior.as_ref().or(fallback_prior).ok_or_else(|| {
                    Error::ConfigInvalid("knowledge-aided estimator has no prior".into())
                })?;
                knowledge_aided(samples, *lambda, prior)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd::symmetric_eigen;

    fn set(rows: &[&[f64]]) -> SampleSet {
        let vs: Vec<_> = rows.iter().map(|r| DVector::from_column_slice(r)).collect();
        SampleSet::from_vectors(&vs).unwrap()
    }

    #[test]
    fn sample_covariance_examples() {
        let s = sample_covariance(&set(&[&[1.0, 0.0]]));
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let s = sample_covariance(&set(&[&[1.0, 0.0], &[-1.0, 0.0]]));
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn sample_set_rejects_ragged_and_empty() {
        assert!(SampleSet::from_vectors(&[]).is_err());
        let ragged = [DVector::zeros(2), DVector::zeros(3)];
        assert!(matches!(
            SampleSet::from_vectors(&ragged),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn diagonal_loading_examples() {
        let c = diagonal_loading(&DMatrix::zeros(3, 3), 0.1).unwrap();
        assert!((c.matrix() - DMatrix::identity(3, 3) * 0.1).norm() < 1e-16);

        let spd = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert_eq!(diagonal_loading(&spd, 0.0).unwrap().matrix(), &spd);

        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let c = diagonal_loading(&s, 0.01).unwrap();
        assert_eq!(
            c.matrix(),
            &DMatrix::from_row_slice(2, 2, &[1.01, 0.0, 0.0, 0.01])
        );

        assert!(matches!(
            diagonal_loading(&s, 0.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(diagonal_loading(&s, -1.0).is_err());
    }

    #[test]
    fn diagonal_loading_shifts_spectrum() {
        let s = sample_covariance(&set(&[&[1.0, 2.0, 0.5], &[0.3, -1.0, 2.0]]));
        let before = symmetric_eigen(&s).unwrap();
        let after = diagonal_loading(&s, 0.37).unwrap();
        for (a, b) in after.eigen().values().iter().zip(before.values().iter()) {
            assert!((a - b - 0.37).abs() < 1e-10);
        }
    }

    #[test]
    fn ledoit_wolf_identity_sample_is_degenerate() {
        let r = 2.0_f64.sqrt();
        let lw = ledoit_wolf(&set(&[&[r, 0.0], &[0.0, r]])).unwrap();
        assert!(lw.degenerate);
        assert_eq!(lw.intensity, 1.0);
        assert!((lw.estimate.matrix() - DMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn ledoit_wolf_needs_two_samples() {
        assert!(ledoit_wolf(&set(&[&[1.0, 2.0]])).is_err());
    }

    #[test]
    fn ledoit_wolf_matches_hand_computation() {
        // v1 = (2, 0), v2 = (0, 1): S = diag(2, 0.5), m = 1.25, d² = 0.5625.
        // ‖v1v1ᵀ − S‖² = 2² + 0.5² = 4.25, ‖v2v2ᵀ − S‖² = 2² + 0.5² = 4.25,
        // b² = 8.5 / 4 / 2 = 1.0625 → clipped to d², intensity 1.
        let lw = ledoit_wolf(&set(&[&[2.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!(!lw.degenerate);
        assert_eq!(lw.intensity, 1.0);
        assert!((lw.estimate.matrix() - DMatrix::identity(2, 2) * 1.25).norm() < 1e-15);

        // Four samples: S = diag(5, 0.5), m = 2.75, d² = 5.0625, and every
        // ‖vvᵀ − S‖² = 25.25, so b² = 4·25.25/16/2 = 3.15625.
        let r = 10.0_f64.sqrt();
        let lw = ledoit_wolf(&set(&[&[r, 0.0], &[-r, 0.0], &[0.0, 1.0], &[0.0, -1.0]])).unwrap();
        let expected = 3.15625 / 5.0625;
        let shrunk = DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 0.5]) * (1.0 - expected)
            + DMatrix::identity(2, 2) * (2.75 * expected);
        assert!((lw.estimate.matrix() - shrunk).norm() < 1e-14);
        assert!((lw.intensity - expected).abs() < 1e-14, "{}", lw.intensity);
    }

    #[test]
    fn knowledge_aided_examples() {
        let data = set(&[&[2.0, 0.0]]);
        let prior = SpdMatrix::identity(2);
        let c = knowledge_aided(&data, 1.0, &prior).unwrap();
        assert_eq!(c.matrix(), prior.matrix());
        assert!(matches!(
            knowledge_aided(&data, 0.0, &prior),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let c = knowledge_aided(&set(&[&[2.0_f64.sqrt(), 0.0]]), 0.5, &prior).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5]);
        assert!((c.matrix() - expected).norm() < 1e-15);
        assert!(knowledge_aided(&data, 1.5, &prior).is_err());
        assert!(knowledge_aided(&data, 0.5, &SpdMatrix::identity(3)).is_err());
    }

    #[test]
    fn knowledge_aided_sample_covariance_at_zero() {
        let data = set(&[&[1.0, 0.5], &[-0.2, 1.0], &[0.3, 0.3]]);
        let c = knowledge_aided(&data, 0.0, &SpdMatrix::identity(2)).unwrap();
        assert!((c.matrix() - sample_covariance(&data)).norm() < 1e-15);
    }

    #[test]
    fn spec_dispatch() {
        let data = set(&[&[1.0, 0.5], &[-0.2, 1.0], &[0.3, 0.3]]);
        let ka = EstimatorSpec::KnowledgeAided {
            lambda: 0.3,
            prior: None,
        };
        assert!(ka.estimate(&data, None).is_err());
        let prior = SpdMatrix::identity(2);
        let with_fallback = ka.estimate(&data, Some(&prior)).unwrap();
        let direct = knowledge_aided(&data, 0.3, &prior).unwrap();
        assert_eq!(with_fallback, direct);
        assert!(EstimatorSpec::KnowledgeAided {
            lambda: 2.0,
            prior: None
        }
        .validate()
        .is_err());
        assert!(EstimatorSpec::DiagonalLoading { lambda: -0.1 }
            .validate()
            .is_err());
        assert_eq!(EstimatorSpec::LedoitWolf.label(), "LW");
    }
}
