//! Dense real symmetric positive-definite matrices.
//!
//! Every [`SpdMatrix`] carries its own eigendecomposition, computed once at
//! construction. Inverses, square roots and the other matrix functions are
//! all derived from that single decomposition.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest admissible eigenvalue, relative to the largest.
pub const PD_RELATIVE_TOL: f64 = 1e-10;

/// Largest asymmetry (relative to the largest entry) that is silently
/// symmetrized away. Anything above is rejected.
pub const SYMMETRY_RELATIVE_TOL: f64 = 1e-8;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl EigenPair {
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DVector::from_iterator(self.values.len(), self.values.iter().map(|&v| f(v)));
        let mut left = self.vectors.clone();
        for (mut col, s) in left.column_iter_mut().zip(scaled.iter()) {
            col *= *s;
        }
        let mut out = left * self.vectors.transpose();
        symmetrize_in_place(&mut out);
        out
    }
}

/// Symmetric eigendecomposition of an arbitrary real symmetric matrix
/// (not necessarily definite), values ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<EigenPair> {
    check_square(m)?;
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or(Error::ConvergenceFailure)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenPair { values, vectors })
}

/// A validated SPD matrix together with its eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    eigen: EigenPair,
}

impl SpdMatrix {
    /// Validates and symmetrizes `m`. Rounding-level asymmetry is averaged
    /// away; gross asymmetry and indefiniteness are errors.
    pub fn new(mut m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = m.amax();
        let asymmetry = max_asymmetry(&m);
        if asymmetry > SYMMETRY_RELATIVE_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry, scale });
        }
        symmetrize_in_place(&mut m);
        let eigen = symmetric_eigen(&m)?;
        let definite = eigen.max() > 0.0 && eigen.min() > PD_RELATIVE_TOL * eigen.max();
        if !definite {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: eigen.min(),
                max_eigenvalue: eigen.max(),
            });
        }
        Ok(Self { matrix: m, eigen })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim]).expect("identity is SPD")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn eigen(&self) -> &EigenPair {
        &self.eigen
    }

    /// `M^p` through the eigendecomposition. The result's eigenstructure is
    /// derived directly (eigenvalues raised to `p`), not recomputed.
    pub fn power(&self, p: f64) -> SpdMatrix {
        if p == 1.0 {
            return self.clone();
        }
        let n = self.dim();
        let raised: Vec<f64> = self.eigen.values.iter().map(|v| v.powf(p)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raised[a].total_cmp(&raised[b]));
        let eigen = EigenPair {
            values: DVector::from_iterator(n, order.iter().map(|&i| raised[i])),
            vectors: DMatrix::from_fn(n, n, |r, c| self.eigen.vectors[(r, order[c])]),
        };
        let matrix = self.eigen.reconstruct_with(|v| v.powf(p));
        SpdMatrix { matrix, eigen }
    }

    pub fn inverse(&self) -> SpdMatrix {
        self.power(-1.0)
    }

    pub fn sqrt(&self) -> SpdMatrix {
        self.power(0.5)
    }

    pub fn inv_sqrt(&self) -> SpdMatrix {
        self.power(-0.5)
    }

    /// `α·M` for `α > 0`.
    pub fn scaled(&self, alpha: f64) -> Result<SpdMatrix> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "scale factor {alpha} must be positive"
            )));
        }
        Ok(SpdMatrix {
            matrix: &self.matrix * alpha,
            eigen: EigenPair {
                values: &self.eigen.values * alpha,
                vectors: self.eigen.vectors.clone(),
            },
        })
    }

    /// Largest over smallest eigenvalue.
    pub fn cond(&self) -> f64 {
        self.eigen.max() / self.eigen.min()
    }

    /// Natural log-determinant.
    pub fn logdet(&self) -> f64 {
        self.eigen.values.iter().map(|v| v.ln()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Lower-triangular `L` with `L·Lᵀ = M`.
    pub fn cholesky(&self) -> Result<DMatrix<f64>> {
        cholesky(&self.matrix)
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        Ok(v.dot(&(&self.matrix * v)))
    }
}

/// Validating constructor, see [`SpdMatrix::new`].
pub fn assert_spd(m: DMatrix<f64>) -> Result<SpdMatrix> {
    SpdMatrix::new(m)
}

pub fn eig_sym(m: &SpdMatrix) -> &EigenPair {
    m.eigen()
}

pub fn mat_power(m: &SpdMatrix, p: f64) -> SpdMatrix {
    m.power(p)
}

/// Cholesky factor of a raw symmetric matrix; fails on a non-positive pivot.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(m)?;
    Cholesky::new(m.clone())
        .map(|c| c.unpack())
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
            max_eigenvalue: f64::NAN,
        })
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.is_square() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
