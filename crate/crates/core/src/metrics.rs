//! Distances between a true covariance `C` and an estimate `Ĉ`.
//!
//! The detection-oriented quantities (per-target SNR and NSNR, worst-case
//! NSNR, NSNR distance) and the Gaussian KL divergences all depend on the
//! pair only through the matrix ratio `Q = Ĉ^{-1/2} C Ĉ^{-1/2}`. The norm
//! based distances work on `C − Ĉ` directly.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spd::{check_dim, symmetric_eigen, symmetrize_in_place, SpdMatrix};

/// A nonzero target (steering) vector `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector(DVector<f64>);

impl TargetVector {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::ZeroTarget);
        }
        Ok(Self(v))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    /// Unit vector along coordinate `axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        Self(v)
    }

    pub fn ones(dim: usize) -> Self {
        Self(DVector::from_element(dim, 1.0))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    NsnrDistance,
    Kl,
    SymKl,
    Frobenius,
    Spectral,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::NsnrDistance,
        MetricKind::Kl,
        MetricKind::SymKl,
        MetricKind::Frobenius,
        MetricKind::Spectral,
    ];

    /// The metrics compared against the NSNR distance, in table row order.
    pub const COMPETITORS: [MetricKind; 4] = [
        MetricKind::Frobenius,
        MetricKind::Spectral,
        MetricKind::Kl,
        MetricKind::SymKl,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::NsnrDistance => "NSNR",
            MetricKind::Kl => "KL",
            MetricKind::SymKl => "symKL",
            MetricKind::Frobenius => "Frobenius",
            MetricKind::Spectral => "Spectral",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Spectrum of the matrix ratio `Q`, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSpectrum {
    pub q: Vec<f64>,
    pub u_min: DVector<f64>,
    pub u_max: DVector<f64>,
    pub kappa: f64,
}

impl RatioSpectrum {
    pub fn q_min(&self) -> f64 {
        self.q[0]
    }

    pub fn q_max(&self) -> f64 {
        self.q[self.q.len() - 1]
    }

    /// `4 q_min q_max / (q_min + q_max)²`, clamped to `≤ 1`.
    pub fn nsnr_min(&self) -> f64 {
        let (lo, hi) = (self.q_min(), self.q_max());
        let sum = lo + hi;
        (4.0 * (lo / sum) * (hi / sum)).min(1.0)
    }

    /// `½ Σ (q_i − 1 − ln q_i)`.
    pub fn kl(&self) -> f64 {
        0.5 * self
            .q
            .iter()
            .map(|&q| q - 1.0 - q.ln())
            .sum::<f64>()
            .max(0.0)
    }

    /// `½ Σ (1/q_i − 1 + ln q_i)`, i.e. the KL divergence with the
    /// arguments swapped.
    pub fn reverse_kl(&self) -> f64 {
        0.5 * self
            .q
            .iter()
            .map(|&q| q.recip() - 1.0 + q.ln())
            .sum::<f64>()
            .max(0.0)
    }
}

/// `Q` together with its spectrum.
#[derive(Debug, Clone)]
pub struct MatrixRatio {
    pub q: SpdMatrix,
    pub spectrum: RatioSpectrum,
}

/// `Q` and its spectrum.
///
/// Eigenvalues of `Q` are only accurate relative to `q_max`, so values
/// below one are taken as reciprocals of the eigenvalues of
/// `Q⁻¹ = Ĉ^{1/2}C⁻¹Ĉ^{1/2}`, where they sit at the top of the spectrum.
pub fn matrix_ratio(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<MatrixRatio> {
    check_dim(c.dim(), c_hat.dim())?;
    let w = c_hat.inv_sqrt();
    let w_inv = c_hat.sqrt();
    let q = SpdMatrix::new(w.matrix() * c.matrix() * w.matrix())?;
    let mut q_inv = w_inv.matrix() * c.inverse().matrix() * w_inv.matrix();
    symmetrize_in_place(&mut q_inv);
    let back = symmetric_eigen(&q_inv)?;
    let fwd = q.eigen();
    let n = fwd.values().len();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let a = fwd.values()[i];
            if a < 1.0 {
                back.values()[n - 1 - i].recip()
            } else {
                a
            }
        })
        .collect();
    let spectrum = RatioSpectrum {
        kappa: values[n - 1] / values[0],
        u_min: back.vectors().column(n - 1).into_owned(),
        u_max: fwd.vectors().column(n - 1).into_owned(),
        q: values,
    };
    Ok(MatrixRatio { q, spectrum })
}

/// Output SNR of the matched filter `w = C⁻¹s`: `sᵀC⁻¹s`.
pub fn snr(s: &TargetVector, c: &SpdMatrix) -> Result<f64> {
    check_dim(c.dim(), s.dim())?;
    c.inverse().quadratic_form(s.as_vector())
}

/// NSNR of target `s` when the filter is built from `Ĉ` but the noise has
/// covariance `C`.
///
/// Evaluated in whitened coordinates `y = Ĉ^{-1/2}s / ‖Ĉ^{-1/2}s‖` as
/// `1 / ((yᵀQy)(yᵀQ⁻¹y))`, which keeps both factors O(1).
pub fn nsnr(s: &TargetVector, c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    check_dim(c.dim(), c_hat.dim())?;
    check_dim(c.dim(), s.dim())?;
    let ratio = matrix_ratio(c, c_hat)?;
    let mut y = c_hat.inv_sqrt().matrix() * s.as_vector();
    y /= y.norm();
    let forward = ratio.q.quadratic_form(&y)?;
    let backward = ratio.q.inverse().quadratic_form(&y)?;
    Ok((forward * backward).recip().min(1.0))
}

/// NSNR evaluated literally from its defining ratio
/// `(sᵀĈ⁻¹s)² / ((sᵀĈ⁻¹CĈ⁻¹s)(sᵀC⁻¹s))`.
pub fn nsnr_direct(s: &TargetVector, c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    check_dim(c.dim(), c_hat.dim())?;
    check_dim(c.dim(), s.dim())?;
    let w = c_hat.inverse().matrix() * s.as_vector();
    let num = s.as_vector().dot(&w);
    let den = w.dot(&(c.matrix() * &w)) * c.inverse().quadratic_form(s.as_vector())?;
    Ok(num * num / den)
}

/// Worst-case NSNR over all targets, `4κ(Q)/(κ(Q)+1)²`.
pub fn nsnr_min(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    Ok(matrix_ratio(c, c_hat)?.spectrum.nsnr_min())
}

/// A target attaining [`nsnr_min`]: `Ĉ^{1/2}(u_min + u_max)/√2`, or
/// `Ĉ^{1/2} u_min` when `Q` is a multiple of the identity.
pub fn worst_case_target(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<TargetVector> {
    let spectrum = matrix_ratio(c, c_hat)?.spectrum;
    let y = if spectrum.q_max() <= spectrum.q_min() {
        spectrum.u_min.clone()
    } else {
        (&spectrum.u_min + &spectrum.u_max) * std::f64::consts::FRAC_1_SQRT_2
    };
    TargetVector::new(c_hat.sqrt().matrix() * y)
}

/// `−½ ln NSNR_min`.
pub fn d_nsnr(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    Ok(nsnr_distance(nsnr_min(c, c_hat)?))
}

fn nsnr_distance(nsnr_min: f64) -> f64 {
    (-0.5 * nsnr_min.ln()).max(0.0)
}

/// Gaussian KL divergence `½Tr(Q) − D/2 − ½ln|Q|`.
pub fn d_kl(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    Ok(matrix_ratio(c, c_hat)?.spectrum.kl())
}

/// `½(KL(C,Ĉ) + KL(Ĉ,C))`.
pub fn d_symkl(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    Ok(0.5 * (d_kl(c, c_hat)? + d_kl(c_hat, c)?))
}

pub fn d_frobenius(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    check_dim(c.dim(), c_hat.dim())?;
    Ok((c.matrix() - c_hat.matrix()).norm())
}

/// Spectral norm of the symmetric difference `C − Ĉ`.
pub fn d_spectral(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<f64> {
    check_dim(c.dim(), c_hat.dim())?;
    spectral_norm_sym(&(c.matrix() - c_hat.matrix()))
}

fn spectral_norm_sym(m: &DMatrix<f64>) -> Result<f64> {
    let eig = symmetric_eigen(m)?;
    Ok(eig.min().abs().max(eig.max().abs()))
}

/// All metrics of one `(C, Ĉ)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValues {
    pub d_nsnr: f64,
    pub d_kl: f64,
    pub d_symkl: f64,
    pub d_frobenius: f64,
    pub d_spectral: f64,
    pub nsnr_min: f64,
}

impl MetricValues {
    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::NsnrDistance => self.d_nsnr,
            MetricKind::Kl => self.d_kl,
            MetricKind::SymKl => self.d_symkl,
            MetricKind::Frobenius => self.d_frobenius,
            MetricKind::Spectral => self.d_spectral,
        }
    }
}

/// Every metric from a single computation of `Q`.
pub fn evaluate_all(c: &SpdMatrix, c_hat: &SpdMatrix) -> Result<MetricValues> {
    let spectrum = matrix_ratio(c, c_hat)?.spectrum;
    let nsnr_min = spectrum.nsnr_min();
    let diff = c.matrix() - c_hat.matrix();
    Ok(MetricValues {
        d_nsnr: nsnr_distance(nsnr_min),
        d_kl: spectrum.kl(),
        d_symkl: 0.5 * (spectrum.kl() + spectrum.reverse_kl()),
        d_frobenius: diff.norm(),
        d_spectral: spectral_norm_sym(&diff)?,
        nsnr_min,
    })
}
