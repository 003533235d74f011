use serde::Serialize;

use super::projector::peripheral_split;
use super::{arg_key, cluster_eigenvalues, eigenspace_of, spectrum_of, SpectralData};
use crate::channel::{block_projections, Channel};
use crate::error::{Error, Result};
use crate::numkernel::{
    c64, operator_norm, smallest_right_singular, unvec, vec_matrix, CMatrix, HSBasis,
    ToleranceConfig, C64,
};

/// Two subspaces are considered equal when each lies within this distance of the other.
const SUBSPACE_TOL: f64 = 1e-7;

/// A peripheral eigenvector with unit HS norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PeripheralVector {
    pub eigenvalue: C64,
    pub vector: CMatrix,
}

/// `M_d = P(tau) ⊕ N(tau)`.
#[derive(Debug, Clone)]
pub struct PeripheralDecomposition {
    pub dim: usize,
    /// Eigenvalue-labelled basis of `P(tau)`, grouped by eigenvalue in order of argument.
    pub p_basis: Vec<PeripheralVector>,
    /// Orthonormal basis of `N(tau)`.
    pub n_basis: HSBasis,
    /// Spectral projector onto `vec(P(tau))` along `vec(N(tau))`.
    pub projector: CMatrix,
    /// Orthonormal basis of `P(tau)`.
    pub p_span: HSBasis,
    pub spectrum: SpectralData,
}

impl PeripheralDecomposition {
    pub fn dim_p(&self) -> usize {
        self.p_basis.len()
    }

    pub fn dim_n(&self) -> usize {
        self.n_basis.len()
    }

    /// Oblique projection of `x` onto `P(tau)`.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        unvec((&self.projector * vec_matrix(x)).as_slice(), self.dim)
    }

    /// `|x - P x|_HS`.
    pub fn peripheral_residual(&self, x: &CMatrix) -> f64 {
        (x - self.project(x)).norm()
    }

    /// Basis vectors grouped by eigenvalue.
    pub fn groups(&self) -> Vec<(C64, Vec<&CMatrix>)> {
        let mut out: Vec<(C64, Vec<&CMatrix>)> = Vec::new();
        for pv in &self.p_basis {
            match out.last_mut() {
                Some((lambda, members)) if *lambda == pv.eigenvalue => members.push(&pv.vector),
                _ => out.push((pv.eigenvalue, vec![&pv.vector])),
            }
        }
        out
    }
}

/// Decomposition for an arbitrary superoperator on `M_dim`.
pub fn peripheral_decomposition_of(
    superop: &CMatrix,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<PeripheralDecomposition> {
    let spectrum = spectrum_of(superop, tol)?;
    let split = peripheral_split(superop, tol)?;
    let k = split.rank();
    let s11 = &split.range_block;

    let mut clusters = cluster_eigenvalues(&split.eigenvalues[..k], tol.cluster_tol);
    clusters.sort_by(|a, b| arg_key(a.raw).total_cmp(&arg_key(b.raw)));
    let mut p_basis = Vec::with_capacity(k);
    for c in &clusters {
        let shifted = s11 - CMatrix::identity(k, k) * c.raw;
        let (y, _) = smallest_right_singular(&shifted, c.multiplicity);
        let lambda = c.raw / c.raw.norm();
        let group = echelon_columns(&(&split.range_basis * y));
        for col in group.column_iter() {
            let x = unvec(col.clone_owned().as_slice(), dim);
            let norm = x.norm();
            p_basis.push(PeripheralVector {
                eigenvalue: lambda,
                vector: x / c64(norm, 0.0),
            });
        }
    }

    Ok(PeripheralDecomposition {
        dim,
        p_basis,
        n_basis: HSBasis::from_orthonormal_columns(&split.kernel_basis, dim),
        projector: split.projector,
        p_span: HSBasis::from_orthonormal_columns(&split.range_basis, dim),
        spectrum,
    })
}

/// Reduced column-echelon form of a basis (columns), making the basis a function of its span.
/// Pivots below `1e-8` (inputs have unit-norm columns) are skipped.
fn echelon_columns(basis: &CMatrix) -> CMatrix {
    const PIVOT_TOL: f64 = 1e-8;
    let mut rows = basis.transpose();
    let (k, n) = rows.shape();
    let mut lead = 0;
    for j in 0..n {
        if lead == k {
            break;
        }
        let (best, size) = (lead..k)
            .map(|r| (r, rows[(r, j)].norm()))
            .fold((lead, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if size <= PIVOT_TOL {
            continue;
        }
        rows.swap_rows(lead, best);
        let pivot = rows[(lead, j)];
        let scaled = rows.row(lead) / pivot;
        rows.set_row(lead, &scaled);
        for r in 0..k {
            if r != lead {
                let f = rows[(r, j)];
                if f != C64::new(0.0, 0.0) {
                    let update = rows.row(r) - rows.row(lead) * f;
                    rows.set_row(r, &update);
                }
            }
        }
        lead += 1;
    }
    rows.transpose()
}

pub fn peripheral_decomposition(ch: &Channel, tol: &ToleranceConfig) -> Result<PeripheralDecomposition> {
    ch.require_unital(tol)?;
    peripheral_decomposition_of(ch.superop(), ch.dim(), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityEntry {
    pub eigenvalue: C64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalizabilityReport {
    pub ok: bool,
    pub entries: Vec<MultiplicityEntry>,
}

/// Compares algebraic and geometric multiplicity of every peripheral eigenvalue.
pub fn check_peripheral_diagonalizable(
    ch: &Channel,
    tol: &ToleranceConfig,
) -> Result<DiagonalizabilityReport> {
    ch.require_unital(tol)?;
    let data = spectrum_of(ch.superop(), tol)?;
    let mut entries = Vec::with_capacity(data.peripheral.len());
    for c in &data.peripheral {
        let geometric = eigenspace_of(ch.superop(), &data, ch.dim(), c.value, tol)?.len();
        entries.push(MultiplicityEntry {
            eigenvalue: c.value,
            algebraic: c.multiplicity,
            geometric,
        });
    }
    Ok(DiagonalizabilityReport {
        ok: entries.iter().all(|e| e.algebraic == e.geometric),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Decays,
    DoesNotDecay,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub verdict: DecayVerdict,
    /// First `n` with `|tau^n(X)|_HS <= tol`.
    pub first_n: Option<usize>,
    pub n_max: usize,
    /// `|tau^n(X)|_HS` for `n = 0, 1, ...` up to the stopping point.
    pub residuals: Vec<f64>,
}

const DECAY_CAP: usize = 10_000;

/// Iterates `tau^n(X)` until its HS norm drops to `tol` or `n_max` steps pass.
///
/// The default `n_max` is `2 ceil(log tol / log r)` for transient radius `r`, at least `d^2 + 1`
/// and at most `10^4`. Without a spectral gap the run goes to the cap and a non-decaying result
/// is reported as inconclusive.
pub fn decay_verify(
    ch: &Channel,
    x: &CMatrix,
    n_max: Option<usize>,
    tol: f64,
    tols: &ToleranceConfig,
) -> Result<DecayReport> {
    ch.require_unital(tols)?;
    if x.shape() != (ch.dim(), ch.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {0}x{0} matrix",
            ch.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::BadParams("decay tolerance must be positive".into()));
    }
    let r = spectrum_of(ch.superop(), tols)?.transient_radius;
    let gapless = r >= 1.0 - tols.peripheral_tol;
    let d2 = ch.dim() * ch.dim();
    let n_max = n_max.unwrap_or_else(|| {
        if gapless {
            DECAY_CAP
        } else {
            let steps = if r > 0.0 {
                2.0 * (tol.ln() / r.ln()).ceil()
            } else {
                0.0
            };
            (steps.min(DECAY_CAP as f64) as usize).max(d2 + 1).min(DECAY_CAP)
        }
    });

    let mut v = vec_matrix(x);
    let mut residuals = vec![v.norm()];
    let mut first_n = (residuals[0] <= tol).then_some(0);
    let mut n = 0;
    while first_n.is_none() && n < n_max {
        v = ch.superop() * v;
        n += 1;
        let norm = v.norm();
        residuals.push(norm);
        if norm <= tol {
            first_n = Some(n);
        }
    }
    let verdict = match (first_n, gapless) {
        (Some(_), _) => DecayVerdict::Decays,
        (None, false) => DecayVerdict::DoesNotDecay,
        (None, true) => DecayVerdict::Inconclusive,
    };
    Ok(DecayReport {
        verdict,
        first_n,
        n_max,
        residuals,
    })
}

/// `max(|(I - B B†) A|, |(I - A A†) B|)` for orthonormal column bases `A`, `B`.
pub fn subspace_gap(a: &CMatrix, b: &CMatrix) -> f64 {
    fn outside(a: &CMatrix, b: &CMatrix) -> f64 {
        if a.ncols() == 0 {
            return 0.0;
        }
        if b.ncols() == 0 {
            return operator_norm(a);
        }
        operator_norm(&(a - b * (b.adjoint() * a)))
    }
    outside(a, b).max(outside(b, a))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSpaceReport {
    pub m: usize,
    pub p_equal: bool,
    pub n_equal: bool,
    pub p_gap: f64,
    pub n_gap: f64,
}

/// Compares `P(tau^m), N(tau^m)` with `P(tau), N(tau)`.
pub fn power_space_equality(ch: &Channel, m: usize, tol: &ToleranceConfig) -> Result<PowerSpaceReport> {
    if m == 0 {
        return Err(Error::BadParams("power must be at least 1".into()));
    }
    let base = peripheral_decomposition(ch, tol)?;
    let power = peripheral_decomposition_of(&ch.superop_power(m), ch.dim(), tol)?;
    let p_gap = subspace_gap(&base.p_span.as_columns(), &power.p_span.as_columns());
    let n_gap = subspace_gap(&base.n_basis.as_columns(), &power.n_basis.as_columns());
    Ok(PowerSpaceReport {
        m,
        p_equal: base.dim_p() == power.dim_p() && p_gap <= SUBSPACE_TOL,
        n_equal: base.dim_n() == power.dim_n() && n_gap <= SUBSPACE_TOL,
        p_gap,
        n_gap,
    })
}

/// Orthonormal basis of `P(tau|_A)` for the block-diagonal algebra `A = ⊕ M_{d_j}`, computed from
/// the restriction of the superoperator to `vec(A)`. Requires `tau(A) ⊆ A`.
pub fn peripheral_space_on_blocks(
    ch: &Channel,
    block_dims: &[usize],
    tol: &ToleranceConfig,
) -> Result<HSBasis> {
    ch.require_unital(tol)?;
    let d = ch.dim();
    let projections = block_projections(d, block_dims)?;
    let mut units = Vec::new();
    for p in &projections {
        let idx: Vec<usize> = (0..d).filter(|&i| p[(i, i)].re > 0.5).collect();
        for &j in &idx {
            for &i in &idx {
                units.push(i + j * d);
            }
        }
    }
    let n = d * d;
    let basis = CMatrix::from_fn(n, units.len(), |r, c| {
        if r == units[c] {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let t = ch.superop();
    let image = t * &basis;
    let leak = operator_norm(&(&image - &basis * (basis.adjoint() * &image)));
    if leak > tol.eq_tol * operator_norm(t).max(1.0) {
        return Err(Error::BadParams(format!(
            "map does not leave the block algebra invariant (leak {leak:e})"
        )));
    }
    let restricted = basis.adjoint() * image;
    let split = peripheral_split(&restricted, tol)?;
    Ok(HSBasis::from_orthonormal_columns(&(&basis * split.range_basis), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{diag_real, fixture, matrix_unit, unitary_channel};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn station3_decomposition() {
        let dec = peripheral_decomposition(&fixture("station3").unwrap(), &tol()).unwrap();
        assert_eq!((dec.dim_p(), dec.dim_n()), (2, 7));
        // P(tau) = {diag(a, a, b)}
        assert!(dec.p_span.residual(&diag_real(&[1.0, 1.0, 0.0])) < 1e-12);
        assert!(dec.p_span.residual(&diag_real(&[0.0, 0.0, 1.0])) < 1e-12);
        for pv in &dec.p_basis {
            let ch = fixture("station3").unwrap();
            let img = ch.apply(&pv.vector).unwrap();
            assert!((img - &pv.vector * pv.eigenvalue).norm() < 1e-8);
        }
    }

    #[test]
    fn avg3_decomposition() {
        let dec = peripheral_decomposition(&fixture("avg3").unwrap(), &tol()).unwrap();
        assert_eq!((dec.dim_p(), dec.dim_n()), (2, 7));
        assert_eq!(dec.groups().len(), 1);
    }

    #[test]
    fn irrational_rotation_is_all_peripheral() {
        let theta = std::f64::consts::SQRT_2;
        let mut u = CMatrix::identity(2, 2);
        u[(1, 1)] = c64(theta.cos(), theta.sin());
        let dec = peripheral_decomposition(&unitary_channel(u).unwrap(), &tol()).unwrap();
        assert_eq!((dec.dim_p(), dec.dim_n()), (4, 0));
    }

    #[test]
    fn multiplicities_match() {
        for name in ["shemesh2", "station3", "avg3", "comp3", "identity(2)"] {
            let r = check_peripheral_diagonalizable(&fixture(name).unwrap(), &tol()).unwrap();
            assert!(r.ok, "{name}: {r:?}");
        }
        let r = check_peripheral_diagonalizable(&fixture("identity(2)").unwrap(), &tol()).unwrap();
        assert_eq!(r.entries[0].algebraic, 4);
        assert_eq!(r.entries[0].geometric, 4);
    }

    #[test]
    fn decay_examples() {
        let sh = fixture("shemesh2").unwrap();
        let r = decay_verify(&sh, &matrix_unit(2, 0, 1), None, 1e-12, &tol()).unwrap();
        assert_eq!(r.verdict, DecayVerdict::Decays);
        assert_eq!(r.first_n, Some(1));

        let avg3 = fixture("avg3").unwrap();
        // tau(diag(a, b, c)) = diag(a, b, (a + b)/2) kills diag(0, 0, c) in one step.
        let r = decay_verify(&avg3, &diag_real(&[0.0, 0.0, -1.0]), None, 1e-12, &tol()).unwrap();
        assert_eq!(r.first_n, Some(1));

        let dec = peripheral_decomposition(&avg3, &tol()).unwrap();
        let r = decay_verify(&avg3, &dec.p_basis[0].vector, None, 1e-9, &tol()).unwrap();
        assert_eq!(r.verdict, DecayVerdict::DoesNotDecay);
        assert!(r.residuals.iter().all(|&x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn identity_never_decays() {
        let id = fixture("identity(2)").unwrap();
        let r = decay_verify(&id, &matrix_unit(2, 0, 1), Some(5), 1e-9, &tol()).unwrap();
        assert_eq!(r.verdict, DecayVerdict::DoesNotDecay);
    }

    #[test]
    fn powers_share_spaces() {
        for (name, m) in [("station3", 2), ("shemesh2", 3), ("identity(3)", 5)] {
            let r = power_space_equality(&fixture(name).unwrap(), m, &tol()).unwrap();
            assert!(r.p_equal && r.n_equal, "{name}: {r:?}");
        }
    }

    #[test]
    fn block_restriction_of_pinching() {
        let ch = fixture("pinch_diag(3)").unwrap();
        let p = peripheral_space_on_blocks(&ch, &[1, 2], &tol()).unwrap();
        assert_eq!(p.len(), 3);
        assert!(peripheral_space_on_blocks(&fixture("station3").unwrap(), &[2, 1], &tol()).is_ok());
        let u = crate::channel::haar_unitary(2, &mut crate::channel::rng(3));
        let conj = unitary_channel(u).unwrap();
        assert!(peripheral_space_on_blocks(&conj, &[1, 1], &tol()).is_err());
    }
}
