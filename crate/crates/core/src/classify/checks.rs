use serde::Serialize;

use super::pa::is_peripherally_automorphic;
use super::stationarity::invariant_states;
use crate::channel::{matrix_unit, Channel, StateDensity};
use crate::error::{Error, Result};
use crate::numkernel::{psd_gap, singular_values, CMatrix, ToleranceConfig};
use crate::spectral::{peripheral_decomposition, spectrum};

/// Subspace-containment and action tolerance used by the convexity check.
const CONTAINMENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateReducingReport {
    /// `lambda_min(sigma - tau*(sigma))`.
    pub gap: f64,
    /// `|sigma - tau*(sigma)|_HS`.
    pub preserving_gap: f64,
    pub reducing: bool,
    pub preserving: bool,
    /// `reducing => preserving`.
    pub proposition_holds: bool,
}

/// Compares `psi ∘ tau` with `psi` on the positive cone through their densities.
pub fn state_reducing_gap(ch: &Channel, psi: &StateDensity, tol: &ToleranceConfig) -> Result<StateReducingReport> {
    ch.require_unital(tol)?;
    if psi.dim() != ch.dim() {
        return Err(Error::NotAState(format!(
            "state is {}x{}, channel acts on M_{}",
            psi.dim(),
            psi.dim(),
            ch.dim()
        )));
    }
    let sigma = psi.rho();
    let diff = sigma - ch.adjoint().apply_unchecked(sigma);
    let gap = psd_gap(&diff, tol)?;
    let preserving_gap = diff.norm();
    let reducing = gap >= -tol.eq_tol;
    let preserving = preserving_gap <= tol.eq_tol;
    Ok(StateReducingReport {
        gap,
        preserving_gap,
        reducing,
        preserving,
        proposition_holds: !reducing || preserving,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KribsReport {
    /// `tau(P) <= P`.
    pub sub: bool,
    /// `P <= tau(P)`.
    pub sup: bool,
    /// `(I - P) L_i P = 0` for every `i`.
    pub range_invariant: bool,
    /// `(I - P) L_i† P = 0` for every `i`.
    pub corange_invariant: bool,
    /// `sup <=> range_invariant` and `sub <=> corange_invariant`.
    pub consistent: bool,
}

pub fn kribs_check(ch: &Channel, p: &CMatrix, tol: &ToleranceConfig) -> Result<KribsReport> {
    let d = ch.dim();
    if p.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("projection must be {d}x{d}")));
    }
    let gap = (p * p - p).norm().max((p - p.adjoint()).norm());
    if gap > tol.eq_tol {
        return Err(Error::NotAProjection { gap });
    }
    let image = ch.apply_unchecked(p);
    let sub = psd_gap(&(p - &image), tol)? >= -tol.eq_tol;
    let sup = psd_gap(&(&image - p), tol)? >= -tol.eq_tol;
    let q = CMatrix::identity(d, d) - p;
    let range_invariant = ch.kraus().iter().all(|l| (&q * l * p).norm() <= tol.eq_tol);
    let corange_invariant = ch.kraus().iter().all(|l| (&q * l.adjoint() * p).norm() <= tol.eq_tol);
    Ok(KribsReport {
        sub,
        sup,
        range_invariant,
        corange_invariant,
        consistent: sup == range_invariant && sub == corange_invariant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AutomorphismCheck {
    /// Every eigenvalue is peripheral.
    pub unimodular: bool,
    /// `max |tau(E_ab E_cd) - tau(E_ab) tau(E_cd)|_HS`.
    pub multiplicative_gap: f64,
    /// Smallest singular value of the superoperator.
    pub min_singular: f64,
    pub bijective: bool,
    pub is_automorphism: bool,
}

pub fn automorphism_check(ch: &Channel, tol: &ToleranceConfig) -> Result<AutomorphismCheck> {
    let data = spectrum(ch, tol)?;
    let d = ch.dim();
    let unimodular = data.peripheral_count() == d * d;

    let units: Vec<CMatrix> = (0..d * d).map(|a| matrix_unit(d, a % d, a / d)).collect();
    let images: Vec<CMatrix> = units.iter().map(|e| ch.apply_unchecked(e)).collect();
    let mut multiplicative_gap: f64 = 0.0;
    for (x, tx) in units.iter().zip(&images) {
        for (y, ty) in units.iter().zip(&images) {
            let gap = (ch.apply_unchecked(&(x * y)) - tx * ty).norm();
            multiplicative_gap = multiplicative_gap.max(gap);
        }
    }
    let sv = singular_values(ch.superop());
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let min_singular = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let bijective = min_singular > tol.rank_tol_factor * smax;
    Ok(AutomorphismCheck {
        unimodular,
        multiplicative_gap,
        min_singular,
        bijective,
        is_automorphism: unimodular && bijective && multiplicative_gap <= tol.eq_tol.max(1e-8),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    /// The average is peripherally automorphic.
    pub applicable: bool,
    /// Peripheral eigenvalues of the average lie in every member's peripheral spectrum.
    pub spectrum_contained: Option<bool>,
    /// `P(average) ⊆ P(tau_j)` for every member.
    pub space_contained: Option<bool>,
    /// Every member acts on `P(average)` as the average does.
    pub action_agrees: Option<bool>,
}

/// For a peripherally automorphic average, checks that it is extreme on its peripheral space.
pub fn convexity_check(weights: &[f64], channels: &[Channel], tol: &ToleranceConfig) -> Result<ConvexityReport> {
    let avg = Channel::convex_combine(weights, channels, tol)?;
    let pa = is_peripherally_automorphic(&avg, tol)?;
    if !pa.overall {
        return Ok(ConvexityReport {
            applicable: false,
            spectrum_contained: None,
            space_contained: None,
            action_agrees: None,
        });
    }
    let dec = peripheral_decomposition(&avg, tol)?;
    let mut spectrum_contained = true;
    let mut space_contained = true;
    let mut action_agrees = true;
    for ch in channels {
        let member = peripheral_decomposition(ch, tol)?;
        spectrum_contained &= dec.spectrum.peripheral.iter().all(|c| {
            member
                .spectrum
                .peripheral
                .iter()
                .any(|m| (m.value - c.value).norm() <= tol.cluster_tol)
        });
        for pv in &dec.p_basis {
            space_contained &= member.p_span.residual(&pv.vector) <= CONTAINMENT_TOL;
            let gap = (avg.apply_unchecked(&pv.vector) - ch.apply_unchecked(&pv.vector)).norm();
            action_agrees &= gap <= CONTAINMENT_TOL;
        }
    }
    Ok(ConvexityReport {
        applicable: true,
        spectrum_contained: Some(spectrum_contained),
        space_contained: Some(space_contained),
        action_agrees: Some(action_agrees),
    })
}

/// `max |tr(rho0 X† Y)|` over `X` in the peripheral basis and `Y` in the transient basis.
pub fn gns_orthogonality_gap(ch: &Channel, tol: &ToleranceConfig) -> Result<f64> {
    let states = invariant_states(ch, tol)?;
    if !(states.faithful_gap > tol.eq_tol && states.rank == ch.dim()) {
        return Err(Error::NotStationary);
    }
    let dec = peripheral_decomposition(ch, tol)?;
    let rho = states.rho0.rho();
    let mut gap: f64 = 0.0;
    for x in &dec.p_basis {
        let left = rho * x.vector.adjoint();
        for y in dec.n_basis.elements() {
            gap = gap.max((&left * y).trace().norm());
        }
    }
    Ok(gap)
}
