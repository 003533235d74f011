use super::{hs_inner, unvec, vec_matrix, CMatrix, ToleranceConfig, C64};

/// A Hilbert-Schmidt orthonormal family of `d x d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HSBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl HSBasis {
    pub fn empty(dim: usize) -> Self {
        HSBasis {
            dim,
            elements: Vec::new(),
        }
    }

    /// Wraps the columns of an `d^2 x k` matrix with orthonormal columns.
    pub fn from_orthonormal_columns(columns: &CMatrix, dim: usize) -> Self {
        assert_eq!(columns.nrows(), dim * dim);
        let elements = columns
            .column_iter()
            .map(|c| unvec(c.clone_owned().as_slice(), dim))
            .collect();
        HSBasis { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<CMatrix> {
        self.elements
    }

    /// `d^2 x k` matrix of vectorized elements.
    pub fn as_columns(&self) -> CMatrix {
        let n = self.dim * self.dim;
        let mut out = CMatrix::zeros(n, self.elements.len());
        for (j, e) in self.elements.iter().enumerate() {
            out.set_column(j, &vec_matrix(e));
        }
        out
    }

    pub fn coords(&self, x: &CMatrix) -> Vec<C64> {
        self.elements.iter().map(|e| hs_inner(e, x)).collect()
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for e in &self.elements {
            out += e * hs_inner(e, x);
        }
        out
    }

    /// HS distance from `x` to the span.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        (x - self.project(x)).norm()
    }

    /// `max |G - I|` over the Gram matrix entries.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b) - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Orthonormal basis of the span of `vectors` under `tr(A† B)`.
///
/// Two-pass modified Gram-Schmidt in input order. A direction is discarded when its residual
/// falls below `rank_tol_factor` times the largest input norm.
pub fn orthonormalize_hs(vectors: &[CMatrix], tol: &ToleranceConfig) -> HSBasis {
    let Some(first) = vectors.first() else {
        return HSBasis::empty(0);
    };
    let dim = first.nrows();
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut basis = HSBasis::empty(dim);
    if scale == 0.0 {
        return basis;
    }
    extend_orthonormal(&mut basis, vectors, tol.rank_tol_factor * scale);
    basis
}

/// Appends to `basis` the directions of `vectors` whose residual exceeds `threshold`.
pub(crate) fn extend_orthonormal(basis: &mut HSBasis, vectors: &[CMatrix], threshold: f64) {
    for v in vectors {
        assert_eq!(v.shape(), (basis.dim, basis.dim), "shape mismatch");
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &basis.elements {
                let c = hs_inner(e, &w);
                w -= e * c;
            }
        }
        let norm = w.norm();
        if norm > threshold {
            basis.elements.push(w / C64::new(norm, 0.0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::c64;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| c64(x, 0.0)),
        ))
    }

    #[test]
    fn collinear_pair_collapses() {
        let tol = ToleranceConfig::default();
        let i2 = CMatrix::identity(2, 2);
        let b = orthonormalize_hs(&[i2.clone(), i2.clone() * c64(2.0, 0.0)], &tol);
        assert_eq!(b.len(), 1);
        let expected = i2 / c64(2f64.sqrt(), 0.0);
        assert!((&b.elements()[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn orthonormal_pair_is_kept() {
        let tol = ToleranceConfig::default();
        let e11 = diag(&[1.0, 0.0]);
        let e22 = diag(&[0.0, 1.0]);
        let b = orthonormalize_hs(&[e11.clone(), e22.clone()], &tol);
        assert_eq!(b.elements(), &[e11, e22]);
    }

    #[test]
    fn fixed_space_of_averaged_map() {
        let tol = ToleranceConfig::default();
        let a = diag(&[1.0, 0.0, 0.5]);
        let b = diag(&[0.0, 1.0, 0.5]);
        let basis = orthonormalize_hs(&[a.clone(), b.clone()], &tol);
        assert_eq!(basis.len(), 2);
        assert!(basis.gram_defect() < 1e-14);
        assert!(basis.residual(&a) < 1e-14);
        assert!(basis.residual(&b) < 1e-14);
        assert!(basis.residual(&diag(&[0.0, 0.0, 1.0])) > 0.1);
    }
}
