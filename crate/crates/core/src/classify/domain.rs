use serde::Serialize;

use crate::channel::Channel;
use crate::error::Result;
use crate::numkernel::{
    null_space_below, operator_norm, orthonormalize_hs, unvec, CMatrix, HSBasis, ToleranceConfig,
};

/// A subspace of `M_d` closed under the matrix product.
#[derive(Debug, Clone)]
pub struct SubalgebraBasis {
    pub elements: HSBasis,
    pub star_closed: bool,
    /// `max` HS distance from `B_a B_b` to the span.
    pub closure_residual: f64,
}

impl SubalgebraBasis {
    pub(crate) fn from_basis(elements: HSBasis, star_closed: bool) -> Self {
        let mut closure_residual: f64 = 0.0;
        for a in elements.elements() {
            for b in elements.elements() {
                closure_residual = closure_residual.max(elements.residual(&(a * b)));
            }
        }
        SubalgebraBasis {
            elements,
            star_closed,
            closure_residual,
        }
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &CMatrix, eps: f64) -> bool {
        self.elements.residual(x) <= eps * x.norm().max(1.0)
    }
}

/// Gram matrices of the Kadison-Schwarz defects of a UCP superoperator `S` over matrix units,
/// stacked as `[H_L; H_R]` with `x† H_L x = tr(S(X†X) - S(X)†S(X))` and
/// `x† H_R x = tr(S(XX†) - S(X)S(X)†)` for `x = vec(X)`.
pub(crate) fn defect_gram(s: &CMatrix, d: usize) -> CMatrix {
    let n = d * d;
    // tr S(Z) = sum_c w_c vec(Z)_c
    let w: Vec<_> = (0..n).map(|c| (0..d).map(|i| s[(i + i * d, c)]).sum()).collect();
    let weight = unvec(&w, d);
    let sts = s.adjoint() * s;
    let mut h = CMatrix::zeros(2 * n, n);
    for j in 0..d {
        for i in 0..d {
            let a = i + j * d;
            for l in 0..d {
                for k in 0..d {
                    let b = k + l * d;
                    // E_a† E_b = delta_{ik} E_{jl};  E_b E_a† = delta_{jl} E_{ki}
                    let left = if i == k { weight[(j, l)] } else { Default::default() };
                    let right = if j == l { weight[(k, i)] } else { Default::default() };
                    h[(a, b)] = left - sts[(a, b)];
                    h[(n + a, b)] = right - sts[(a, b)];
                }
            }
        }
    }
    h
}

fn cutoff(h: &CMatrix, tol: &ToleranceConfig) -> f64 {
    tol.rank_tol_factor * operator_norm(h).max(1.0)
}

fn star_closed(basis: &HSBasis) -> bool {
    basis
        .elements()
        .iter()
        .all(|b| basis.residual(&b.adjoint()) <= 1e-8)
}

/// Multiplicative domain of `tau^k`, as the joint null space of the two defect forms.
pub fn multiplicative_domain(ch: &Channel, k: usize, tol: &ToleranceConfig) -> Result<SubalgebraBasis> {
    ch.require_unital(tol)?;
    let k = k.max(1);
    let h = defect_gram(&ch.superop_power(k), ch.dim());
    let null = null_space_below(&h, cutoff(&h, tol));
    let basis = HSBasis::from_orthonormal_columns(&null, ch.dim());
    let closed = star_closed(&basis);
    Ok(SubalgebraBasis::from_basis(basis, closed))
}

#[derive(Debug, Clone)]
pub struct StabilizedDomain {
    pub domain: SubalgebraBasis,
    /// Smallest `k` at which the intersection reached its final dimension.
    pub stabilized_at: usize,
    /// Last `k` examined.
    pub k_reached: usize,
    /// True when the dimension was unchanged for `d^2` consecutive steps before the cap.
    pub stabilized: bool,
    /// Dimension of `M_{tau^1} ∩ ... ∩ M_{tau^k}` for each examined `k`.
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSummary {
    pub dim: usize,
    pub stabilized_at: usize,
    pub stabilized: bool,
}

impl StabilizedDomain {
    pub fn summary(&self) -> DomainSummary {
        DomainSummary {
            dim: self.domain.dim(),
            stabilized_at: self.stabilized_at,
            stabilized: self.stabilized,
        }
    }
}

/// `M_{tau^∞} = ∩_k M_{tau^k}`, truncated once the dimension is unchanged for `d^2` consecutive
/// powers or at `k_max` (default `4 d^2`).
pub fn multiplicative_domain_inf(
    ch: &Channel,
    k_max: Option<usize>,
    tol: &ToleranceConfig,
) -> Result<StabilizedDomain> {
    ch.require_unital(tol)?;
    let d = ch.dim();
    let n = d * d;
    let k_max = k_max.unwrap_or(4 * n).max(1);
    let window = n;

    let mut v = CMatrix::identity(n, n);
    let mut power = CMatrix::identity(n, n);
    let mut dims = Vec::new();
    let mut stabilized_at = 1;
    let mut unchanged = 0;
    let mut stabilized = false;
    for k in 1..=k_max {
        power = ch.superop() * power;
        if v.ncols() > 0 {
            let h = defect_gram(&power, d);
            let null = null_space_below(&(&h * &v), cutoff(&h, tol));
            v = &v * null;
        }
        let dim = v.ncols();
        if dims.last() == Some(&dim) {
            unchanged += 1;
        } else {
            stabilized_at = k;
            unchanged = 0;
        }
        dims.push(dim);
        if unchanged >= window || dim == 0 {
            stabilized = true;
            break;
        }
    }
    let basis = orthonormal_columns_basis(&v, d);
    let closed = star_closed(&basis);
    Ok(StabilizedDomain {
        domain: SubalgebraBasis::from_basis(basis, closed),
        stabilized_at,
        k_reached: dims.len(),
        stabilized,
        dims,
    })
}

fn orthonormal_columns_basis(v: &CMatrix, d: usize) -> HSBasis {
    if v.ncols() == 0 {
        return HSBasis::empty(d);
    }
    HSBasis::from_orthonormal_columns(v, d)
}

/// The (non-unital) algebra generated by the Kraus operators.
pub fn kraus_algebra(ch: &Channel, tol: &ToleranceConfig) -> Result<SubalgebraBasis> {
    ch.require_unital(tol)?;
    let kraus = ch.kraus();
    let mut basis = orthonormalize_hs(kraus, tol);
    if basis.is_empty() {
        return Ok(SubalgebraBasis::from_basis(HSBasis::empty(ch.dim()), true));
    }
    loop {
        let before = basis.len();
        let words: Vec<CMatrix> = basis
            .elements()
            .iter()
            .flat_map(|b| kraus.iter().map(move |l| b * l))
            .collect();
        for w in &words {
            let size = w.norm();
            if size > 0.0 {
                crate::numkernel::extend_orthonormal(&mut basis, std::slice::from_ref(w), tol.eq_tol * size);
            }
        }
        if basis.len() == before {
            break;
        }
    }
    let closed = kraus.iter().all(|l| basis.residual(&l.adjoint()) <= 1e-8 * l.norm().max(1.0));
    Ok(SubalgebraBasis::from_basis(basis, closed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{fixture, matrix_unit, unitary_channel, haar_unitary, rng};
    use crate::numkernel::c64;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    // Brute-force oracle: X is in M_tau iff both Kadison-Schwarz defects vanish.
    fn ks_defect(ch: &Channel, x: &CMatrix) -> f64 {
        let a = ch.apply(&(x.adjoint() * x)).unwrap() - ch.apply(&x.adjoint()).unwrap() * ch.apply(x).unwrap();
        let b = ch.apply(&(x * x.adjoint())).unwrap() - ch.apply(x).unwrap() * ch.apply(&x.adjoint()).unwrap();
        a.norm().max(b.norm())
    }

    #[test]
    fn gram_matches_defect_traces() {
        let ch = fixture("comp3").unwrap();
        let h = defect_gram(ch.superop(), 3);
        let x = CMatrix::from_fn(3, 3, |i, j| c64(i as f64 - j as f64, (i * j) as f64 * 0.3));
        let v = crate::numkernel::vec_matrix(&x);
        let n = 9;
        let hl = h.rows(0, n).into_owned();
        let hr = h.rows(n, n).into_owned();
        let tl = (ch.apply(&(x.adjoint() * &x)).unwrap() - ch.apply(&x).unwrap().adjoint() * ch.apply(&x).unwrap()).trace();
        let tr = (ch.apply(&(&x * x.adjoint())).unwrap() - ch.apply(&x).unwrap() * ch.apply(&x).unwrap().adjoint()).trace();
        assert!(((v.adjoint() * &hl * &v)[(0, 0)] - tl).norm() < 1e-12);
        assert!(((v.adjoint() * &hr * &v)[(0, 0)] - tr).norm() < 1e-12);
    }

    #[test]
    fn identity_domain_is_everything() {
        let m = multiplicative_domain(&fixture("identity(2)").unwrap(), 1, &tol()).unwrap();
        assert_eq!(m.dim(), 4);
        let inf = multiplicative_domain_inf(&fixture("identity(2)").unwrap(), None, &tol()).unwrap();
        assert_eq!(inf.domain.dim(), 4);
        assert_eq!(inf.stabilized_at, 1);
        assert!(inf.stabilized);
    }

    #[test]
    fn shemesh_domain() {
        let ch = fixture("shemesh2").unwrap();
        let m = multiplicative_domain(&ch, 1, &tol()).unwrap();
        assert!(m.contains(&CMatrix::identity(2, 2), 1e-9));
        assert!(!m.contains(&matrix_unit(2, 0, 1), 1e-3));
        for e in m.elements.elements() {
            assert!(ks_defect(&ch, e) < 1e-9);
        }
        let inf = multiplicative_domain_inf(&ch, Some(8), &tol()).unwrap();
        assert!(inf.dims.iter().all(|&k| k == m.dim()));
    }

    #[test]
    fn station3_domain_contains_boundary() {
        let ch = fixture("station3").unwrap();
        let m = multiplicative_domain(&ch, 1, &tol()).unwrap();
        assert!(m.contains(&crate::channel::diag_real(&[1.0, 1.0, 0.0]), 1e-9));
        assert!(m.contains(&crate::channel::diag_real(&[0.0, 0.0, 1.0]), 1e-9));
        let inf = multiplicative_domain_inf(&ch, None, &tol()).unwrap();
        assert!(inf.stabilized_at <= 2);
    }

    #[test]
    fn kraus_algebras() {
        let sh = kraus_algebra(&fixture("shemesh2").unwrap(), &tol()).unwrap();
        assert_eq!(sh.dim(), 3);
        assert!(!sh.star_closed);
        let st = kraus_algebra(&fixture("station3").unwrap(), &tol()).unwrap();
        assert_eq!(st.dim(), 9);
        assert!(st.star_closed);
        let u = unitary_channel(haar_unitary(3, &mut rng(2))).unwrap();
        assert!(kraus_algebra(&u, &tol()).unwrap().star_closed);
    }
}
