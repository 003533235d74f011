//! The Choi-Effros product on the peripheral space and the boundary algebra it defines.
//!
//! For peripheral eigenvectors `X ∈ E_lambda`, `Y ∈ E_mu` the limit
//! `(lambda mu)^{-n} tau^n(XY)` along a subsequence on which every peripheral phase returns to 1
//! kills the transient part of `XY` and leaves every peripheral component fixed, so the product is
//! the peripheral projection `P(XY)`. Bilinearity extends this to all of `P(tau)`.

mod algebra;

pub use algebra::{
    boundary_algebra, boundary_algebra_of, verify_cstar_axioms, verify_restricted_automorphism,
    AutomorphismReport, BoundaryAlgebra, CStarReport,
};

use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numkernel::{unvec, vec_matrix, CMatrix, ToleranceConfig, C64};
use crate::spectral::{peripheral_decomposition, PeripheralDecomposition};

/// Inputs further than this (relative to their norm) from `P(tau)` are rejected.
pub const PERIPHERAL_MEMBERSHIP_TOL: f64 = 1e-7;

pub(crate) fn require_peripheral(dec: &PeripheralDecomposition, x: &CMatrix) -> Result<()> {
    if x.shape() != (dec.dim, dec.dim) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {0}x{0} matrix",
            dec.dim
        )));
    }
    let residual = dec.peripheral_residual(x);
    if residual > PERIPHERAL_MEMBERSHIP_TOL * x.norm().max(1.0) {
        return Err(Error::NotPeripheral { residual });
    }
    Ok(())
}

/// `X ∘ Y = P(XY)` for `X, Y ∈ P(tau)` given a precomputed decomposition.
pub fn ce_product_with(dec: &PeripheralDecomposition, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    require_peripheral(dec, x)?;
    require_peripheral(dec, y)?;
    Ok(dec.project(&(x * y)))
}

/// The Choi-Effros product `X ∘ Y` on `P(tau)`.
pub fn ce_product(ch: &Channel, x: &CMatrix, y: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    let dec = peripheral_decomposition(ch, tol)?;
    ce_product_with(&dec, x, y)
}

pub const DEFAULT_K_MAX: usize = 100_000;
pub const DEFAULT_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeProduct {
    pub estimate: CMatrix,
    pub k_used: usize,
    /// `max_i |mu_i^k - 1|` over the peripheral eigenvalues at `k_used`.
    pub phase_defect: f64,
    /// First power at which the transient part of `T^k` has HS norm at most `delta`.
    pub k_min: usize,
}

/// `max_i |mu_i^k - 1|`.
fn phase_defect(phases: &[f64], k: usize) -> f64 {
    phases
        .iter()
        .map(|&theta| (C64::from_polar(1.0, theta * k as f64) - 1.0).norm())
        .fold(0.0, f64::max)
}

/// `(lambda mu)^{-k} tau^k(XY)` at the first `k` for which every peripheral phase is within
/// `delta` of 1 and the transient part of `tau^k` has decayed below `delta`.
#[allow(clippy::too_many_arguments)]
pub fn ce_product_iterative_with(
    superop: &CMatrix,
    dec: &PeripheralDecomposition,
    x: &CMatrix,
    lambda: C64,
    y: &CMatrix,
    mu: C64,
    k_max: usize,
    delta: f64,
) -> Result<IterativeProduct> {
    require_peripheral(dec, x)?;
    require_peripheral(dec, y)?;
    if !(delta > 0.0) || k_max == 0 {
        return Err(Error::BadParams("need delta > 0 and k_max >= 1".into()));
    }
    let n = superop.nrows();

    // Transient decay: smallest k with |T^k (I - P)|_HS <= delta.
    let mut transient = CMatrix::identity(n, n) - &dec.projector;
    let mut k_min = 1;
    transient = superop * transient;
    while transient.norm() > delta {
        if k_min >= k_max {
            return Err(Error::SubsequenceNotFound {
                k_max,
                best_k: k_min,
                best_defect: transient.norm(),
            });
        }
        transient = superop * transient;
        k_min += 1;
    }

    let phases: Vec<f64> = dec.spectrum.peripheral.iter().map(|c| c.value.arg()).collect();
    let mut best = (k_min, f64::INFINITY);
    let mut found = None;
    for k in k_min..=k_max {
        let q = phase_defect(&phases, k);
        if q < best.1 {
            best = (k, q);
        }
        if q < delta {
            found = Some((k, q));
            break;
        }
    }
    let (k_used, defect) = found.ok_or(Error::SubsequenceNotFound {
        k_max,
        best_k: best.0,
        best_defect: best.1,
    })?;

    let mut v = vec_matrix(&(x * y));
    for _ in 0..k_used {
        v = superop * v;
    }
    let lm = lambda * mu;
    let scale = C64::from_polar(1.0, -lm.arg() * k_used as f64) / lm.norm().powi(k_used as i32);
    Ok(IterativeProduct {
        estimate: unvec(v.as_slice(), dec.dim) * scale,
        k_used,
        phase_defect: defect,
        k_min,
    })
}

/// Iterative subsequence estimate of `X ∘ Y` for `X ∈ E_lambda`, `Y ∈ E_mu`.
#[allow(clippy::too_many_arguments)]
pub fn ce_product_iterative(
    ch: &Channel,
    x: &CMatrix,
    lambda: C64,
    y: &CMatrix,
    mu: C64,
    k_max: usize,
    delta: f64,
    tol: &ToleranceConfig,
) -> Result<IterativeProduct> {
    let dec = peripheral_decomposition(ch, tol)?;
    ce_product_iterative_with(ch.superop(), &dec, x, lambda, y, mu, k_max, delta)
}

/// Per-pair comparison of the spectral and iterative products.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductAgreement {
    pub pairs: usize,
    /// `max |spectral - iterative| / (|X|_op |Y|_op)` (HS norm of the difference).
    pub max_relative_gap: f64,
    /// `max |tau(P(XY)) - lambda mu P(XY)|_HS`.
    pub eigen_composition_gap: f64,
    pub max_k_used: usize,
}

/// Runs both products on every pair of labelled peripheral basis vectors.
pub fn product_agreement(
    ch: &Channel,
    dec: &PeripheralDecomposition,
    k_max: usize,
    delta: f64,
) -> Result<ProductAgreement> {
    let mut out = ProductAgreement {
        pairs: 0,
        max_relative_gap: 0.0,
        eigen_composition_gap: 0.0,
        max_k_used: 0,
    };
    for a in &dec.p_basis {
        for b in &dec.p_basis {
            let spectral = ce_product_with(dec, &a.vector, &b.vector)?;
            let it = ce_product_iterative_with(
                ch.superop(),
                dec,
                &a.vector,
                a.eigenvalue,
                &b.vector,
                b.eigenvalue,
                k_max,
                delta,
            )?;
            let scale = crate::numkernel::operator_norm(&a.vector) * crate::numkernel::operator_norm(&b.vector);
            out.max_relative_gap = out
                .max_relative_gap
                .max((&spectral - &it.estimate).norm() / scale.max(f64::MIN_POSITIVE));
            let image = ch.apply_unchecked(&spectral);
            let lm = a.eigenvalue * b.eigenvalue;
            out.eigen_composition_gap = out.eigen_composition_gap.max((image - &spectral * lm).norm());
            out.max_k_used = out.max_k_used.max(it.k_used);
            out.pairs += 1;
        }
    }
    Ok(out)
}
