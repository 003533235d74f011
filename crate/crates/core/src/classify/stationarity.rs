use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::domain::kraus_algebra;
use crate::channel::{rng, Channel, StateDensity};
use crate::error::{Error, Result};
use crate::numkernel::{
    c64, eigh, hermitian_part, null_space_below, operator_norm, orthonormalize_hs, psd_gap,
    spectral_split, unvec, vec_matrix, CMatrix, Region, ToleranceConfig,
};
use crate::spectral::{eigenspace, spectrum_of};

/// Draws of a random fixed Hermitian element before block splitting gives up.
pub const MAX_DRAWS: usize = 8;

#[derive(Debug, Clone)]
pub struct InvariantStates {
    /// Hermitian HS-orthonormal basis of the fixed points of the adjoint.
    pub fixed_basis: Vec<CMatrix>,
    /// Image of `I/d` under the eigenvalue-1 spectral projector of the adjoint.
    pub rho0: StateDensity,
    /// Smallest eigenvalue of `rho0`.
    pub faithful_gap: f64,
    /// Number of eigenvalues of `rho0` above `eq_tol`.
    pub rank: usize,
}

/// Spectral projector of `t` for the eigenvalue cluster at 1.
fn unit_eigenprojector(t: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    let data = spectrum_of(t, tol)?;
    let nearest = data
        .eigenvalues
        .iter()
        .filter(|c| (c.raw - 1.0).norm() > tol.cluster_tol)
        .map(|c| (c.raw - 1.0).norm())
        .fold(f64::INFINITY, f64::min);
    let radius = (0.5 * nearest).min(0.5);
    let guard = tol.cluster_tol.min(0.5 * radius);
    Ok(spectral_split(t, Region::Disk { center: c64(1.0, 0.0), radius }, guard)?.projector)
}

pub fn invariant_states(ch: &Channel, tol: &ToleranceConfig) -> Result<InvariantStates> {
    ch.require_unital(tol)?;
    let d = ch.dim();
    let n = d * d;
    let t_adj = ch.superop().adjoint();

    let shifted = &t_adj - CMatrix::identity(n, n);
    let fixed = null_space_below(&shifted, tol.rank_tol_factor * operator_norm(&t_adj).max(1.0));
    let mut hermitian = Vec::with_capacity(2 * fixed.ncols());
    for col in fixed.column_iter() {
        let x = unvec(col.clone_owned().as_slice(), d);
        hermitian.push(hermitian_part(&x));
        hermitian.push(hermitian_part(&(x * c64(0.0, -1.0))));
    }
    let fixed_basis = orthonormalize_hs(&hermitian, tol).into_elements();

    let projector = unit_eigenprojector(&t_adj, tol)?;
    let start = vec_matrix(&(CMatrix::identity(d, d) / c64(d as f64, 0.0)));
    let mut rho = hermitian_part(&unvec((projector * start).as_slice(), d));
    let tr = rho.trace().re;
    rho /= c64(tr, 0.0);
    let (values, _) = eigh(&rho);
    let faithful_gap = values[0];
    let rank = values.iter().filter(|&&v| v > tol.eq_tol).count();
    let rho0 = StateDensity::new(rho, tol)
        .map_err(|e| Error::InternalInconsistency(format!("invariant state: {e}")))?;
    Ok(InvariantStates {
        fixed_basis,
        rho0,
        faithful_gap,
        rank,
    })
}

#[derive(Debug, Clone)]
pub struct StationarityReport {
    pub star_closed: bool,
    pub algebra_dim: usize,
    pub rho0: StateDensity,
    pub faithful_gap: f64,
    pub rank: usize,
    pub stationary: bool,
    /// Kernel projection of `rho0`; present exactly when the channel is not stationary.
    pub witness: Option<CMatrix>,
    /// `lambda_min(P - tau(P))` for the witness (non-negative up to rounding).
    pub witness_sub_gap: Option<f64>,
    /// `|tau(P) - P|_HS` for the witness.
    pub witness_defect: Option<f64>,
}

/// Decides whether `tau` admits a faithful invariant state, cross-checked against *-closure of
/// the Kraus algebra. A non-stationary channel comes with a projection `P` satisfying
/// `tau(P) <= P` and `tau(P) != P`.
pub fn is_stationary(ch: &Channel, tol: &ToleranceConfig) -> Result<StationarityReport> {
    let states = invariant_states(ch, tol)?;
    let algebra = kraus_algebra(ch, tol)?;
    let d = ch.dim();
    let stationary = states.faithful_gap > tol.eq_tol && states.rank == d;
    if stationary != algebra.star_closed {
        return Err(Error::InternalInconsistency(format!(
            "invariant state has lambda_min {:e} and rank {}/{d}, but Kraus algebra star_closed = {}",
            states.faithful_gap, states.rank, algebra.star_closed
        )));
    }

    let (witness, witness_sub_gap, witness_defect) = if stationary {
        (None, None, None)
    } else {
        let (values, vectors) = eigh(states.rho0.rho());
        let kernel: Vec<usize> = (0..d).filter(|&i| values[i] <= tol.eq_tol).collect();
        let v = CMatrix::from_fn(d, kernel.len(), |r, c| vectors[(r, kernel[c])]);
        let p = &v * v.adjoint();
        let image = ch.apply_unchecked(&p);
        let sub = psd_gap(&(&p - &image), tol)?;
        let defect = (&image - &p).norm();
        (Some(p), Some(sub), Some(defect))
    };

    Ok(StationarityReport {
        star_closed: algebra.star_closed,
        algebra_dim: algebra.dim(),
        faithful_gap: states.faithful_gap,
        rank: states.rank,
        rho0: states.rho0,
        stationary,
        witness,
        witness_sub_gap,
        witness_defect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub sizes: Vec<usize>,
    pub irreducible: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub projections: Vec<CMatrix>,
    pub irreducible_flags: Vec<bool>,
}

impl BlockDecomposition {
    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn summary(&self) -> BlockSummary {
        BlockSummary {
            sizes: self
                .projections
                .iter()
                .map(|p| p.trace().re.round() as usize)
                .collect(),
            irreducible: self.irreducible_flags.clone(),
        }
    }
}

/// Orthonormal basis (columns) of the range of a projection.
fn range_of(p: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(p);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0.5).collect();
    CMatrix::from_fn(p.nrows(), keep.len(), |r, c| vectors[(r, keep[c])])
}

/// Hermitian HS-orthonormal basis of the compression `P E P`.
fn compress(fixed: &[CMatrix], p: &CMatrix, tol: &ToleranceConfig) -> Vec<CMatrix> {
    let compressed: Vec<CMatrix> = fixed.iter().map(|f| p * f * p).collect();
    orthonormalize_hs(&compressed, tol).into_elements()
}

/// Splits `range(P)` along the eigenvalue clusters of `U† H U`.
fn split_by(h: &CMatrix, p: &CMatrix) -> Vec<CMatrix> {
    const GAP: f64 = 1e-6;
    let u = range_of(p);
    let (values, w) = eigh(&(u.adjoint() * h * &u));
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (v - values[*g.last().unwrap()]).abs() <= GAP * scale => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let cols = CMatrix::from_fn(w.nrows(), g.len(), |r, c| w[(r, g[c])]);
            let q = &u * cols;
            &q * q.adjoint()
        })
        .collect()
}

/// Lexicographic key: first diagonal index carried by the block, then its rank.
fn block_key(p: &CMatrix) -> (usize, usize) {
    let first = (0..p.nrows()).find(|&i| p[(i, i)].re > 1e-6).unwrap_or(p.nrows());
    (first, p.trace().re.round() as usize)
}

/// Resolves the identity into fixed projections on which `tau` restricts to irreducible maps.
pub fn irreducible_blocks(ch: &Channel, seed: u64, tol: &ToleranceConfig) -> Result<BlockDecomposition> {
    if !is_stationary(ch, tol)?.stationary {
        return Err(Error::NotStationary);
    }
    let d = ch.dim();
    let fixed_raw = eigenspace(ch, c64(1.0, 0.0), tol)?;
    let hermitian: Vec<CMatrix> = fixed_raw
        .elements()
        .iter()
        .flat_map(|x| [hermitian_part(x), hermitian_part(&(x * c64(0.0, -1.0)))])
        .collect();
    let fixed = orthonormalize_hs(&hermitian, tol).into_elements();

    let mut rng = rng(seed);
    let mut pending = vec![CMatrix::identity(d, d)];
    let mut done = Vec::new();
    while let Some(p) = pending.pop() {
        let local = compress(&fixed, &p, tol);
        if local.len() <= 1 {
            done.push(p);
            continue;
        }
        let mut pieces = None;
        for _ in 0..MAX_DRAWS {
            let h = local.iter().fold(CMatrix::zeros(d, d), |acc, f| {
                acc + f * c64(rng.sample::<f64, _>(StandardNormal), 0.0)
            });
            let parts = split_by(&h, &p);
            if parts.len() > 1 {
                pieces = Some(parts);
                break;
            }
        }
        let parts = pieces.ok_or(Error::DegenerateDraws { draws: MAX_DRAWS })?;
        pending.extend(parts);
    }
    done.sort_by_key(block_key);

    let irreducible_flags = done.iter().map(|p| compress(&fixed, p, tol).len() == 1).collect();
    Ok(BlockDecomposition {
        projections: done,
        irreducible_flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{diag_real, fixture, pinch_diag};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn invariant_state_examples() {
        let s = invariant_states(&fixture("station3").unwrap(), &tol()).unwrap();
        assert!((s.rho0.rho() - diag_real(&[0.25, 0.25, 0.5])).norm() < 1e-12);
        assert!((s.faithful_gap - 0.25).abs() < 1e-12);
        let s = invariant_states(&fixture("shemesh2").unwrap(), &tol()).unwrap();
        assert!((s.rho0.rho() - diag_real(&[0.0, 1.0])).norm() < 1e-12);
        assert!(s.faithful_gap.abs() < 1e-12);
        assert_eq!(s.fixed_basis.len(), 1);
        let s = invariant_states(&fixture("identity(2)").unwrap(), &tol()).unwrap();
        assert!((s.faithful_gap - 0.5).abs() < 1e-12);
        assert_eq!(s.fixed_basis.len(), 4);
    }

    #[test]
    fn shemesh_is_not_stationary() {
        let ch = fixture("shemesh2").unwrap();
        let r = is_stationary(&ch, &tol()).unwrap();
        assert!(!r.stationary && !r.star_closed);
        let w = r.witness.unwrap();
        assert!((&w - diag_real(&[1.0, 0.0])).norm() < 1e-12);
        assert!((ch.apply(&w).unwrap() - diag_real(&[0.5, 0.0])).norm() < 1e-12);
        assert!(r.witness_sub_gap.unwrap() >= -1e-12);
        assert!(r.witness_defect.unwrap() > 1e-8);
    }

    #[test]
    fn avg3_invariant_state_has_rank_two() {
        let r = is_stationary(&fixture("avg3").unwrap(), &tol()).unwrap();
        assert!(!r.stationary);
        assert_eq!(r.rank, 2);
        assert!((r.rho0.rho() - diag_real(&[0.5, 0.5, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn station3_is_stationary_and_irreducible() {
        let ch = fixture("station3").unwrap();
        assert!(is_stationary(&ch, &tol()).unwrap().stationary);
        let b = irreducible_blocks(&ch, 0, &tol()).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.irreducible_flags[0]);
    }

    #[test]
    fn pinching_splits_into_matrix_units() {
        let b = irreducible_blocks(&pinch_diag(2), 5, &tol()).unwrap();
        assert_eq!(b.len(), 2);
        assert!((&b.projections[0] - diag_real(&[1.0, 0.0])).norm() < 1e-10);
        assert!((&b.projections[1] - diag_real(&[0.0, 1.0])).norm() < 1e-10);
    }

    #[test]
    fn identity_splits_into_rank_one_blocks() {
        let b = irreducible_blocks(&fixture("identity(2)").unwrap(), 9, &tol()).unwrap();
        assert_eq!(b.summary().sizes, vec![1, 1]);
        assert!(b.irreducible_flags.iter().all(|&f| f));
        let sum = &b.projections[0] + &b.projections[1];
        assert!((sum - CMatrix::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn non_stationary_blocks_are_refused() {
        assert!(matches!(
            irreducible_blocks(&fixture("shemesh2").unwrap(), 0, &tol()),
            Err(Error::NotStationary)
        ));
    }
}
