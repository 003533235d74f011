use serde::Serialize;

use super::domain::{multiplicative_domain_inf, DomainSummary};
use crate::channel::Channel;
use crate::error::Result;
use crate::numkernel::{c64, CMatrix, ToleranceConfig};
use crate::spectral::{peripheral_decomposition, PeripheralDecomposition};

/// A condition passes when its gap is at most this.
pub const VERDICT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionResult {
    pub holds: bool,
    pub gap: f64,
}

impl ConditionResult {
    fn from_gap(gap: f64) -> Self {
        ConditionResult {
            holds: gap <= VERDICT_TOL,
            gap,
        }
    }
}

/// `X ∘ Y` differing from `XY`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWitness {
    pub x: CMatrix,
    pub y: CMatrix,
    pub ce_product: CMatrix,
    pub ordinary: CMatrix,
}

#[derive(Debug, Clone)]
pub struct PAReport {
    /// `P(tau) ⊆ M_tau`.
    pub c1: ConditionResult,
    /// `P(tau) ⊆ M_{tau^k}` for every examined `k`.
    pub c2: ConditionResult,
    /// `X ∘ Y = XY` on `P(tau)`.
    pub c3: ConditionResult,
    /// `tau(A† B) = A† B` for `A, B` in the same peripheral eigenspace.
    pub c4: ConditionResult,
    /// `X L_i = lambda L_i X` for `X ∈ E_lambda`.
    pub c5: ConditionResult,
    /// Distance of `B_a B_b` from `P(tau)` over basis pairs.
    pub closure_gap: f64,
    pub domain: DomainSummary,
    pub agree: bool,
    pub overall: bool,
    pub witness: Option<ProductWitness>,
}

impl PAReport {
    pub fn conditions(&self) -> [ConditionResult; 5] {
        [self.c1, self.c2, self.c3, self.c4, self.c5]
    }
}

fn ks_defect(ch: &Channel, x: &CMatrix) -> f64 {
    let tx = ch.apply_unchecked(x);
    let txa = ch.apply_unchecked(&x.adjoint());
    let left = ch.apply_unchecked(&(x.adjoint() * x)) - &txa * &tx;
    let right = ch.apply_unchecked(&(x * x.adjoint())) - &tx * &txa;
    left.norm().max(right.norm())
}

/// `B / b_pivot` with the pivot the first entry (column-stacked) of modulus above `1e-8`.
fn pivot_normalized(b: &CMatrix) -> CMatrix {
    let d = b.nrows();
    let pivot = (0..d * d)
        .map(|a| b[(a % d, a / d)])
        .find(|z| z.norm() > 1e-8)
        .unwrap_or(c64(1.0, 0.0));
    b / pivot
}

/// Generic element `sum_a (2a + 1) R_a` of the pivot-normalized echelon basis.
fn generic_element(dec: &PeripheralDecomposition) -> CMatrix {
    let d = dec.dim;
    dec.p_basis
        .iter()
        .enumerate()
        .fold(CMatrix::zeros(d, d), |acc, (a, pv)| {
            acc + pivot_normalized(&pv.vector) * c64((2 * a + 1) as f64, 0.0)
        })
}

fn witness(dec: &PeripheralDecomposition, worst: Option<(usize, usize)>) -> Option<ProductWitness> {
    let x = generic_element(dec);
    let ordinary = &x * &x;
    let ce_product = dec.project(&ordinary);
    if (&ce_product - &ordinary).norm() > VERDICT_TOL * ordinary.norm().max(1.0) {
        return Some(ProductWitness {
            y: x.clone(),
            x,
            ce_product,
            ordinary,
        });
    }
    let (a, b) = worst?;
    let x = dec.p_basis[a].vector.clone();
    let y = dec.p_basis[b].vector.clone();
    let ordinary = &x * &y;
    Some(ProductWitness {
        ce_product: dec.project(&ordinary),
        x,
        y,
        ordinary,
    })
}

/// Evaluates the five equivalent characterizations of peripheral automorphy.
pub fn is_peripherally_automorphic(ch: &Channel, tol: &ToleranceConfig) -> Result<PAReport> {
    let dec = peripheral_decomposition(ch, tol)?;
    pa_report_with(ch, &dec, tol)
}

pub(crate) fn pa_report_with(
    ch: &Channel,
    dec: &PeripheralDecomposition,
    tol: &ToleranceConfig,
) -> Result<PAReport> {
    let basis = &dec.p_basis;

    let c1 = basis.iter().map(|b| ks_defect(ch, &b.vector)).fold(0.0, f64::max);

    let inf = multiplicative_domain_inf(ch, None, tol)?;
    let c2 = basis
        .iter()
        .map(|b| inf.domain.elements.residual(&b.vector))
        .fold(0.0, f64::max);

    let mut c3: f64 = 0.0;
    let mut worst = None;
    let mut closure_gap: f64 = 0.0;
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate() {
            let xy = &x.vector * &y.vector;
            let gap = (dec.project(&xy) - &xy).norm();
            if gap > c3 {
                c3 = gap;
                worst = Some((a, b));
            }
            closure_gap = closure_gap.max(dec.p_span.residual(&xy));
        }
    }

    let mut c4: f64 = 0.0;
    for (_, group) in dec.groups() {
        for a in &group {
            for b in &group {
                let z = a.adjoint() * *b;
                c4 = c4.max((ch.apply_unchecked(&z) - z).norm());
            }
        }
    }

    let mut c5: f64 = 0.0;
    for pv in basis {
        for l in ch.kraus() {
            c5 = c5.max((&pv.vector * l - l * &pv.vector * pv.eigenvalue).norm());
        }
    }

    let conditions = [c1, c2, c3, c4, c5].map(ConditionResult::from_gap);
    let agree = conditions.iter().all(|c| c.holds == conditions[0].holds);
    let [c1, c2, c3, c4, c5] = conditions;
    Ok(PAReport {
        c1,
        c2,
        c3,
        c4,
        c5,
        closure_gap,
        domain: inf.summary(),
        agree,
        overall: c5.holds,
        witness: if c3.holds { None } else { witness(dec, worst) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{diag_real, fixture};

    fn report(name: &str) -> PAReport {
        is_peripherally_automorphic(&fixture(name).unwrap(), &ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn fixture_verdicts() {
        for (name, expected) in [
            ("station3", true),
            ("avg3", false),
            ("comp3", false),
            ("faithful3", false),
            ("shemesh2", true),
            ("tau1_avg", true),
            ("tau2_avg", true),
            ("identity(2)", true),
        ] {
            let r = report(name);
            assert_eq!(r.overall, expected, "{name}: {:?}", r.conditions());
            assert!(r.agree, "{name}: {:?}", r.conditions());
            assert_eq!(r.closure_gap <= VERDICT_TOL, expected, "{name}");
        }
    }

    #[test]
    fn avg3_witness_is_the_displayed_triple() {
        let w = report("avg3").witness.unwrap();
        assert!((&w.x - diag_real(&[1.0, 3.0, 2.0])).norm() < 1e-12);
        assert!((&w.ce_product - diag_real(&[1.0, 9.0, 5.0])).norm() < 1e-10);
        assert!((&w.ordinary - diag_real(&[1.0, 9.0, 4.0])).norm() < 1e-12);
    }

    #[test]
    fn pa_channels_have_no_witness() {
        assert!(report("station3").witness.is_none());
    }
}
