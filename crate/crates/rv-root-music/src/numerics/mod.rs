//! Dense linear-algebra and polynomial-rooting kernel.
//!
//! Everything downstream (signal model, estimator, perturbation analysis)
//! goes through this module for eigendecompositions, singular value
//! decompositions and polynomial work. All operations are pure functions
//! of their inputs.

pub mod poly;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use poly::ComplexPolynomial;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Relative tolerance for the symmetry check on [`RealSymmetric`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative trimming threshold for polynomial coefficients.
pub const COEFF_TRIM_TOL: f64 = 1e-14;

/// Residual bound factor for reported polynomial roots: for each root r,
/// |p(r)| <= ROOT_RESIDUAL_TOL * max|coeff| * max(1, |r|)^degree.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// A real symmetric matrix, validated on construction.
#[derive(Debug, Clone)]
pub struct RealSymmetric(RMatrix);

impl RealSymmetric {
    /// Wraps a square matrix after checking symmetry to a relative
    /// tolerance of `1e-12` against the largest entry magnitude.
    pub fn new(m: RMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Contract(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !scale.is_finite() {
            return Err(Error::Contract("matrix has non-finite entries".into()));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::Contract(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EvdResult {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, ordered to match `eigenvalues`.
    pub eigenvectors: RMatrix,
}

/// Thin SVD of a complex matrix, singular values descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors as columns (m x k).
    pub left: CMatrix,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns (n x k); A = U diag(w) V^H.
    pub right: CMatrix,
}

/// Symmetric eigendecomposition with descending eigenvalue order.
pub fn symmetric_evd(a: &RealSymmetric) -> Result<EvdResult> {
    let n = a.order();
    let se = nalgebra::SymmetricEigen::try_new(a.matrix().clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "symmetric EVD of order-{n} matrix did not converge within 10000 iterations"
            ))
        })?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = RMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    Ok(EvdResult {
        eigenvalues,
        eigenvectors: vecs,
    })
}

/// Thin complex SVD with descending singular values.
pub fn complex_svd(a: &CMatrix) -> Result<SvdResult> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Contract("SVD input has non-finite entries".into()));
    }
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "SVD of {}x{} matrix did not converge within 10000 iterations",
                a.nrows(),
                a.ncols()
            ))
        })?;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd.singular_values.len();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let singular_values: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let mut left = CMatrix::zeros(u.nrows(), k);
    let mut right = CMatrix::zeros(v_t.ncols(), k);
    for (col, &i) in idx.iter().enumerate() {
        left.set_column(col, &u.column(i));
        right.set_column(col, &v_t.row(i).adjoint());
    }
    Ok(SvdResult {
        left,
        singular_values,
        right,
    })
}

/// Largest principal angle (radians) between the column spans of two
/// real matrices with orthonormal columns. Uses the sine formulation
/// sin(theta) = sigma_max(B - A A^T B), which stays accurate for the
/// tiny angles the subspace-equivalence checks assert; the cosine form
/// saturates near sqrt(machine epsilon).
pub fn max_principal_angle(a: &RMatrix, b: &RMatrix) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::Contract("subspaces live in different dimensions".into()));
    }
    if a.ncols() == 0 || b.ncols() == 0 {
        return Err(Error::Contract("empty subspace".into()));
    }
    let resid = b - a * (a.transpose() * b);
    let sv = complex_svd(&to_complex(&resid))?;
    let largest = sv.singular_values.first().copied().unwrap_or(0.0);
    Ok(largest.clamp(0.0, 1.0).asin())
}

/// Complex-subspace version of [`max_principal_angle`].
pub fn max_principal_angle_complex(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::Contract("subspaces live in different dimensions".into()));
    }
    if a.ncols() == 0 || b.ncols() == 0 {
        return Err(Error::Contract("empty subspace".into()));
    }
    let resid = b - a * (a.adjoint() * b);
    let sv = complex_svd(&resid)?;
    let largest = sv.singular_values.first().copied().unwrap_or(0.0);
    Ok(largest.clamp(0.0, 1.0).asin())
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lifts a real matrix into the complex field.
pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}
