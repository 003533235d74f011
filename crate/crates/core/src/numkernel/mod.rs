//! Dense complex matrix kernel.
//!
//! Matrices acting on `M_d` are represented on column-stacked vectors: `vec(X)[i + j d] = X[i, j]`.
//! All inner products are Hilbert-Schmidt with the unnormalized trace, `<A, B> = tr(A† B)`.

mod hs;
mod schur;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use hs::extend_orthonormal;
pub use hs::{orthonormalize_hs, HSBasis};
pub use schur::{
    solve_triangular_sylvester, spectral_projector, spectral_split, Region, Schur, SpectralSplit,
};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Numerical tolerances shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Absolute entrywise tolerance for matrix equality.
    pub eq_tol: f64,
    /// Singular values below `rank_tol_factor * sigma_max` count as zero.
    pub rank_tol_factor: f64,
    /// Eigenvalues with `||z| - 1| <= peripheral_tol` are peripheral.
    pub peripheral_tol: f64,
    /// Eigenvalues closer than this are merged.
    pub cluster_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eq_tol: 1e-9,
            rank_tol_factor: 1e-10,
            peripheral_tol: 1e-8,
            cluster_tol: 1e-7,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eq_tol", self.eq_tol),
            ("rank_tol_factor", self.rank_tol_factor),
            ("peripheral_tol", self.peripheral_tol),
            ("cluster_tol", self.cluster_tol),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        if self.cluster_tol < self.rank_tol_factor {
            return Err(Error::InvalidTolerance(
                "cluster_tol must be at least rank_tol_factor".into(),
            ));
        }
        Ok(())
    }
}

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Column-stacking vectorization.
pub fn vec_matrix(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec_matrix`] for a `d x d` matrix.
pub fn unvec(v: &[C64], d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d, "unvec length");
    CMatrix::from_column_slice(d, d, v)
}

/// `tr(A† B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.dotc(b)
}

pub fn hs_norm(a: &CMatrix) -> f64 {
    a.norm()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.trace()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigenvalues (as a multiset) and unit-norm right eigenvectors of a square matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: CMatrix,
}

pub fn eig_general(a: &CMatrix) -> Result<Eigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let schur = Schur::new(a)?;
    let y = schur::triangular_eigenvectors(&schur.t);
    let vectors = &schur.q * y;
    Ok(Eigen {
        values: schur.eigenvalues(),
        vectors,
    })
}

/// Only the eigenvalues.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    Ok(Schur::new(a)?.eigenvalues())
}

/// Singular values (descending) and right singular vectors as columns of `v`.
fn svd_full_v(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (rows, cols) = a.shape();
    let padded;
    let m = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    (svd.singular_values.iter().copied().collect(), v_t.adjoint())
}

/// Orthonormal basis (as columns) of `{v : |A v| <= rank_tol_factor * sigma_max(A) |v|}`.
pub fn null_space(a: &CMatrix, tol: &ToleranceConfig) -> CMatrix {
    let smax = if a.is_empty() { 0.0 } else { operator_norm(a) };
    null_space_below(a, tol.rank_tol_factor * smax)
}

/// Right singular vectors with singular value at most `threshold`.
pub fn null_space_below(a: &CMatrix, threshold: f64) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    let (sv, v) = svd_full_v(a);
    let keep: Vec<usize> = (0..cols).filter(|&i| sv[i] <= threshold).collect();
    CMatrix::from_fn(cols, keep.len(), |r, c| v[(r, keep[c])])
}

/// The `count` right singular vectors with the smallest singular values, plus those values.
pub fn smallest_right_singular(a: &CMatrix, count: usize) -> (CMatrix, Vec<f64>) {
    let cols = a.ncols();
    let count = count.min(cols);
    if a.nrows() == 0 {
        return (CMatrix::identity(cols, count), vec![0.0; count]);
    }
    let (sv, v) = svd_full_v(a);
    let start = cols - count;
    (
        v.columns(start, count).into_owned(),
        sv[start..].to_vec(),
    )
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Numerical rank under the relative criterion `sigma > rank_tol_factor * sigma_max`.
pub fn rank(a: &CMatrix, tol: &ToleranceConfig) -> usize {
    let sv = singular_values(a);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_tol_factor * smax).count()
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `a`.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part; `>= -eq_tol` is read as positive semidefinite.
pub fn psd_gap(a: &CMatrix, tol: &ToleranceConfig) -> Result<f64> {
    let skew = (a - a.adjoint()).norm();
    if skew > tol.eq_tol * a.norm().max(1.0) {
        return Err(Error::NotHermitian { gap: skew });
    }
    Ok(eigh(a).0.first().copied().unwrap_or(0.0))
}
