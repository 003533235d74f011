use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::ce_product_with;
use crate::channel::Channel;
use crate::error::Result;
use crate::numkernel::{
    c64, null_space, operator_norm, singular_values, vec_matrix, CMatrix, ToleranceConfig, C64,
};
use crate::spectral::{peripheral_decomposition, PeripheralDecomposition, PeripheralVector};

/// `(P(tau), ∘)` in the labelled peripheral eigenbasis `B_a`.
#[derive(Debug, Clone)]
pub struct BoundaryAlgebra {
    pub decomposition: PeripheralDecomposition,
    /// `B_a ∘ B_b = sum_c gamma[a][b][c] B_c`.
    pub structure_constants: Vec<Vec<Vec<C64>>>,
    /// Coordinates of `I`.
    pub unit_coords: Vec<C64>,
    /// `max |B_a ∘ B_b - sum_c gamma[a][b][c] B_c|_HS`.
    pub closure_residual: f64,
    /// `max |I ∘ B_a - B_a|_HS` and `|B_a ∘ I - B_a|_HS`.
    pub unit_residual: f64,
    /// Dimension of the centre `{Z : Z ∘ B_a = B_a ∘ Z for all a}`.
    pub center_dim: usize,
    /// `max |B_a ∘ B_b - B_a B_b|_HS`: zero exactly when `∘` is the matrix product.
    pub ordinary_product_gap: f64,
}

impl BoundaryAlgebra {
    pub fn dim(&self) -> usize {
        self.decomposition.p_basis.len()
    }

    pub fn basis(&self) -> &[PeripheralVector] {
        &self.decomposition.p_basis
    }

    pub fn product(&self, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
        ce_product_with(&self.decomposition, x, y)
    }

    /// `sqrt(sum |gamma|^2)`.
    pub fn checksum(&self) -> f64 {
        self.structure_constants
            .iter()
            .flatten()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Least-squares coordinates in a (generally non-orthogonal) basis with full column rank.
struct Coordinates {
    pinv: CMatrix,
}

impl Coordinates {
    fn new(basis: &[PeripheralVector]) -> Self {
        let k = basis.len();
        let n = basis.first().map_or(0, |b| b.vector.len());
        let mut m = CMatrix::zeros(n, k);
        for (j, b) in basis.iter().enumerate() {
            m.set_column(j, &vec_matrix(&b.vector));
        }
        let pinv = if k == 0 {
            CMatrix::zeros(0, n)
        } else {
            m.pseudo_inverse(0.0).expect("non-negative epsilon")
        };
        Coordinates { pinv }
    }

    fn of(&self, x: &CMatrix) -> Vec<C64> {
        (&self.pinv * vec_matrix(x)).iter().copied().collect()
    }
}

fn combine(basis: &[PeripheralVector], coords: &[C64]) -> CMatrix {
    let d = basis[0].vector.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (b, &c) in basis.iter().zip(coords) {
        out += &b.vector * c;
    }
    out
}

pub fn boundary_algebra_of(dec: PeripheralDecomposition, tol: &ToleranceConfig) -> Result<BoundaryAlgebra> {
    let basis = &dec.p_basis;
    let k = basis.len();
    let d = dec.dim;
    let coords = Coordinates::new(basis);
    let mut gamma = vec![vec![Vec::new(); k]; k];
    let mut closure_residual: f64 = 0.0;
    let mut ordinary_product_gap: f64 = 0.0;
    let mut products = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let p = ce_product_with(&dec, &basis[a].vector, &basis[b].vector)?;
            let g = coords.of(&p);
            closure_residual = closure_residual.max((&p - combine(basis, &g)).norm());
            ordinary_product_gap =
                ordinary_product_gap.max((&p - &basis[a].vector * &basis[b].vector).norm());
            gamma[a][b] = g;
            products.push(p);
        }
    }
    let id = CMatrix::identity(d, d);
    let unit_coords = coords.of(&id);
    let mut unit_residual: f64 = 0.0;
    for b in basis {
        let left = ce_product_with(&dec, &id, &b.vector)?;
        let right = ce_product_with(&dec, &b.vector, &id)?;
        unit_residual = unit_residual
            .max((left - &b.vector).norm())
            .max((right - &b.vector).norm());
    }

    // Centre: coefficients z with sum_c z_c (gamma[c][a] - gamma[a][c]) = 0 for every a.
    let center_dim = if k == 0 {
        0
    } else {
        let mut system = CMatrix::zeros(k * k, k);
        for a in 0..k {
            for c in 0..k {
                for e in 0..k {
                    system[(a * k + e, c)] = gamma[c][a][e] - gamma[a][c][e];
                }
            }
        }
        let scale = system.norm();
        if scale <= tol.eq_tol {
            k
        } else {
            null_space(&system, tol).ncols()
        }
    };

    Ok(BoundaryAlgebra {
        decomposition: dec,
        structure_constants: gamma,
        unit_coords,
        closure_residual,
        unit_residual,
        center_dim,
        ordinary_product_gap,
    })
}

/// The boundary algebra of a UCP map.
pub fn boundary_algebra(ch: &Channel, tol: &ToleranceConfig) -> Result<BoundaryAlgebra> {
    boundary_algebra_of(peripheral_decomposition(ch, tol)?, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CStarReport {
    pub associativity_gap: f64,
    pub involution_gap: f64,
    pub unit_gap: f64,
    /// `max | |X† ∘ X|_op - |X|_op^2 |` over basis elements and random samples of unit HS norm.
    pub cstar_identity_gap: f64,
    pub samples: usize,
}

impl CStarReport {
    pub fn max_gap(&self) -> f64 {
        self.associativity_gap
            .max(self.involution_gap)
            .max(self.unit_gap)
            .max(self.cstar_identity_gap)
    }
}

/// Checks the C*-algebra axioms of `(P(tau), ∘)` on basis triples and random elements.
pub fn verify_cstar_axioms(alg: &BoundaryAlgebra, sample_count: usize, seed: u64) -> Result<CStarReport> {
    let basis = alg.basis();
    let k = basis.len();
    let mut report = CStarReport {
        associativity_gap: 0.0,
        involution_gap: 0.0,
        unit_gap: alg.unit_residual,
        cstar_identity_gap: 0.0,
        samples: sample_count,
    };
    if k == 0 {
        return Ok(report);
    }
    let dec = &alg.decomposition;
    let prod = |x: &CMatrix, y: &CMatrix| ce_product_with(dec, x, y);

    let mut pair = vec![CMatrix::zeros(0, 0); k * k];
    for a in 0..k {
        for b in 0..k {
            pair[a * k + b] = prod(&basis[a].vector, &basis[b].vector)?;
        }
    }
    for a in 0..k {
        for b in 0..k {
            let ab = &pair[a * k + b];
            let ba_adj = prod(&basis[b].vector.adjoint(), &basis[a].vector.adjoint())?;
            report.involution_gap = report.involution_gap.max((ab.adjoint() - ba_adj).norm());
            for c in 0..k {
                let left = prod(ab, &basis[c].vector)?;
                let right = prod(&basis[a].vector, &pair[b * k + c])?;
                report.associativity_gap = report.associativity_gap.max((left - right).norm());
            }
        }
    }

    let mut rng = crate::channel::rng(seed);
    let mut elements: Vec<CMatrix> = basis.iter().map(|b| b.vector.clone()).collect();
    for _ in 0..sample_count {
        let coeffs: Vec<C64> = (0..k)
            .map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let x = combine(basis, &coeffs);
        let norm = x.norm();
        elements.push(x / c64(norm, 0.0));
    }
    for x in &elements {
        let xx = prod(&x.adjoint(), x)?;
        let nx = operator_norm(x);
        report.cstar_identity_gap = report
            .cstar_identity_gap
            .max((operator_norm(&xx) - nx * nx).abs());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutomorphismReport {
    /// `max |tau(X ∘ Y) - tau(X) ∘ tau(Y)|_HS` over basis pairs.
    pub hom_gap: f64,
    /// `max |tau(X†) - tau(X)†|_HS` over the basis.
    pub adjoint_gap: f64,
    /// Smallest singular value of `tau` restricted to `P(tau)`.
    pub min_singular: f64,
    pub bijective: bool,
}

/// Checks that `tau` restricts to a *-automorphism of `(P(tau), ∘)`.
pub fn verify_restricted_automorphism(ch: &Channel, tol: &ToleranceConfig) -> Result<AutomorphismReport> {
    let dec = peripheral_decomposition(ch, tol)?;
    let basis = &dec.p_basis;
    let mut hom_gap: f64 = 0.0;
    let mut adjoint_gap: f64 = 0.0;
    let images: Vec<CMatrix> = basis.iter().map(|b| ch.apply_unchecked(&b.vector)).collect();
    for (a, x) in basis.iter().enumerate() {
        adjoint_gap = adjoint_gap
            .max((ch.apply_unchecked(&x.vector.adjoint()) - images[a].adjoint()).norm());
        for (b, y) in basis.iter().enumerate() {
            let lhs = ch.apply_unchecked(&ce_product_with(&dec, &x.vector, &y.vector)?);
            let rhs = ce_product_with(&dec, &images[a], &images[b])?;
            hom_gap = hom_gap.max((lhs - rhs).norm());
        }
    }
    let q = dec.p_span.as_columns();
    let restricted = q.adjoint() * ch.superop() * &q;
    let sv = singular_values(&restricted);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let min_singular = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let min_singular = if min_singular.is_finite() { min_singular } else { 0.0 };
    Ok(AutomorphismReport {
        hom_gap,
        adjoint_gap,
        min_singular,
        bijective: sv.is_empty() || min_singular > tol.rank_tol_factor * smax,
    })
}
