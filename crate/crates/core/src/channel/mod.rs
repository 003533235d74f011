//! Completely positive maps on `M_d` in Kraus form, with cached superoperator and Choi matrix.
//!
//! The action convention is `tau(X) = sum_i L_i† X L_i`, and with column-stacking `vec`,
//! `vec(tau(X)) = sum_i (L_i^T ⊗ L_i†) vec(X)`.

mod descriptor;
mod fixtures;
mod random;
mod state;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::{
    self, c64, eigh, kron, operator_norm, rank, unvec, vec_matrix, CMatrix, ToleranceConfig, C64,
};

pub use descriptor::{parse_matrix, ChannelDescriptor, JsonMatrix, RandomSpec};
pub use fixtures::{fixture, pinch_diag, unitary_channel, FIXTURE_NAMES, EXAMPLE_FIXTURES};
pub use random::{
    haar_unitary, population_params, random_block_channel, random_channel, random_population,
    RandomKind,
};
pub(crate) use random::rng;
pub use state::StateDensity;

/// A completely positive map `X -> sum_i L_i† X L_i` on `M_d`.
///
/// Caches are built once at construction and never mutated.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim: usize,
    kraus: Vec<CMatrix>,
    superop: CMatrix,
    choi: CMatrix,
    unitality_gap: f64,
}

/// Structural checks on a channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub is_cp: bool,
    pub choi_gap: f64,
    pub is_unital: bool,
    pub unitality_gap: f64,
    pub is_trace_preserving: bool,
    pub tp_gap: f64,
    pub is_faithful: bool,
    pub joint_rank: usize,
}

impl Channel {
    /// Builds a channel from its Kraus operators. Non-unital lists are accepted; classification
    /// entry points reject them through [`Channel::require_unital`].
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Kraus list".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::DimensionMismatch("zero-dimensional Kraus operator".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {i} has shape {:?}, expected ({dim}, {dim})",
                    k.shape()
                )));
            }
            if !numkernel::is_finite(k) {
                return Err(Error::NonFinite);
            }
        }
        let n = dim * dim;
        let mut superop = CMatrix::zeros(n, n);
        let mut sum = CMatrix::zeros(dim, dim);
        for k in &kraus {
            superop += kron(&k.transpose(), &k.adjoint());
            sum += k.adjoint() * k;
        }
        let unitality_gap = operator_norm(&(sum - CMatrix::identity(dim, dim)));
        let mut ch = Channel {
            dim,
            kraus,
            superop,
            choi: CMatrix::zeros(0, 0),
            unitality_gap,
        };
        ch.choi = ch.build_choi();
        Ok(ch)
    }

    /// Builds a channel from a Choi matrix `sum_{jk} E_jk ⊗ tau(E_jk)`, extracting a minimal
    /// Kraus family from its eigendecomposition.
    pub fn from_choi(dim: usize, choi: &CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        if choi.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix must be {0}x{0}, got {1:?}",
                dim * dim,
                choi.shape()
            )));
        }
        let gap = numkernel::psd_gap(choi, tol)?;
        if gap < -tol.eq_tol {
            return Err(Error::BadParams(format!(
                "Choi matrix is not positive semidefinite (min eigenvalue {gap:e})"
            )));
        }
        Channel::from_kraus(kraus_from_choi(dim, choi, tol))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `d^2 x d^2` matrix of the map on column-stacked vectors.
    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// `|sum_i L_i† L_i - I|` in operator norm.
    pub fn unitality_gap(&self) -> f64 {
        self.unitality_gap
    }

    pub fn is_unital(&self, tol: &ToleranceConfig) -> bool {
        self.unitality_gap <= tol.eq_tol
    }

    pub fn require_unital(&self, tol: &ToleranceConfig) -> Result<()> {
        if self.is_unital(tol) {
            Ok(())
        } else {
            Err(Error::NotUnital {
                gap: self.unitality_gap,
            })
        }
    }

    fn check_shape(&self, x: &CMatrix) -> Result<()> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} matrix, got {1:?}",
                self.dim,
                x.shape()
            )));
        }
        Ok(())
    }

    /// `tau(X) = sum_i L_i† X L_i`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_shape(x)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        out
    }

    /// `tau^n(X)` by repeated superoperator application.
    pub fn apply_power(&self, x: &CMatrix, n: usize) -> Result<CMatrix> {
        self.check_shape(x)?;
        let mut v = vec_matrix(x);
        for _ in 0..n {
            v = &self.superop * v;
        }
        Ok(unvec(v.as_slice(), self.dim))
    }

    /// The trace dual `tau*(X) = sum_i L_i X L_i†`, whose superoperator is `superop†`.
    pub fn adjoint(&self) -> Channel {
        Channel::from_kraus(self.kraus.iter().map(|k| k.adjoint()).collect())
            .expect("adjoint of a valid Kraus family")
    }

    fn build_choi(&self) -> CMatrix {
        let d = self.dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for j in 0..d {
            for k in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(j, k)] = c64(1.0, 0.0);
                let image = self.apply_unchecked(&e);
                choi.view_mut((j * d, k * d), (d, d)).copy_from(&image);
            }
        }
        choi
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> ValidationReport {
        let d = self.dim;
        let choi_gap = eigh(&self.choi).0.first().copied().unwrap_or(0.0);
        let mut dual_sum = CMatrix::zeros(d, d);
        for k in &self.kraus {
            dual_sum += k * k.adjoint();
        }
        let tp_gap = operator_norm(&(dual_sum - CMatrix::identity(d, d)));
        let mut stacked = CMatrix::zeros(d, d * self.kraus.len());
        for (i, k) in self.kraus.iter().enumerate() {
            stacked.view_mut((0, i * d), (d, d)).copy_from(k);
        }
        let joint_rank = rank(&stacked, tol);
        ValidationReport {
            is_cp: choi_gap >= -tol.eq_tol,
            choi_gap,
            is_unital: self.unitality_gap <= tol.eq_tol,
            unitality_gap: self.unitality_gap,
            is_trace_preserving: tp_gap <= tol.eq_tol,
            tp_gap,
            is_faithful: joint_rank == d,
            joint_rank,
        }
    }

    /// `X -> outer(inner(X))`. Kraus operators are `inner_i * outer_j`, `i` varying slowest.
    pub fn compose(outer: &Channel, inner: &Channel) -> Result<Channel> {
        if outer.dim != inner.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose maps on M_{} and M_{}",
                outer.dim, inner.dim
            )));
        }
        let mut kraus = Vec::with_capacity(outer.kraus.len() * inner.kraus.len());
        for li in &inner.kraus {
            for lo in &outer.kraus {
                kraus.push(li * lo);
            }
        }
        Channel::from_kraus(prune_zero(kraus, outer.dim))
    }

    /// `sum_j p_j tau_j`, with Kraus family `{sqrt(p_j) L}`.
    pub fn convex_combine(weights: &[f64], channels: &[Channel], tol: &ToleranceConfig) -> Result<Channel> {
        if weights.len() != channels.len() || weights.is_empty() {
            return Err(Error::BadWeights(format!(
                "{} weights for {} channels",
                weights.len(),
                channels.len()
            )));
        }
        if weights.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::BadWeights("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.eq_tol {
            return Err(Error::BadWeights(format!("weights sum to {total}, not 1")));
        }
        let dim = channels[0].dim;
        if channels.iter().any(|c| c.dim != dim) {
            return Err(Error::DimensionMismatch("channels act on different algebras".into()));
        }
        let kraus = weights
            .iter()
            .zip(channels)
            .flat_map(|(&p, ch)| ch.kraus.iter().map(move |k| k * c64(p.sqrt(), 0.0)))
            .collect();
        Channel::from_kraus(kraus)
    }

    /// `X -> tau(sum_j P_j X P_j)` for the coordinate block projections `P_j`.
    pub fn pinch_compress(&self, block_dims: &[usize]) -> Result<Channel> {
        let projections = block_projections(self.dim, block_dims)?;
        let mut kraus = Vec::with_capacity(projections.len() * self.kraus.len());
        for p in &projections {
            for k in &self.kraus {
                kraus.push(p * k);
            }
        }
        Channel::from_kraus(prune_zero(kraus, self.dim))
    }

    /// Superoperator of `tau^m`.
    pub fn superop_power(&self, m: usize) -> CMatrix {
        let n = self.dim * self.dim;
        let mut out = CMatrix::identity(n, n);
        for _ in 0..m {
            out = &self.superop * out;
        }
        out
    }
}

/// Coordinate block projections for a partition of `dim`.
pub fn block_projections(dim: usize, block_dims: &[usize]) -> Result<Vec<CMatrix>> {
    if block_dims.is_empty() || block_dims.contains(&0) {
        return Err(Error::BadPartition("blocks must be non-empty".into()));
    }
    let total: usize = block_dims.iter().sum();
    if total != dim {
        return Err(Error::BadPartition(format!(
            "block sizes sum to {total}, expected {dim}"
        )));
    }
    let mut start = 0;
    Ok(block_dims
        .iter()
        .map(|&size| {
            let mut p = CMatrix::zeros(dim, dim);
            for i in start..start + size {
                p[(i, i)] = c64(1.0, 0.0);
            }
            start += size;
            p
        })
        .collect())
}

fn prune_zero(kraus: Vec<CMatrix>, dim: usize) -> Vec<CMatrix> {
    let kept: Vec<CMatrix> = kraus.into_iter().filter(|k| k.norm() > 1e-14).collect();
    if kept.is_empty() {
        vec![CMatrix::zeros(dim, dim)]
    } else {
        kept
    }
}

/// Minimal Kraus family from the Choi matrix.
///
/// With `w = row-major vec(L)`, the Choi matrix equals `conj(sum_i w_i w_i†)`, so each eigenpair
/// `(mu, v)` above the rank threshold gives `L = unvec_rowmajor(sqrt(mu) conj(v))`.
pub fn kraus_from_choi(dim: usize, choi: &CMatrix, tol: &ToleranceConfig) -> Vec<CMatrix> {
    let (values, vectors) = eigh(choi);
    let top = values.iter().copied().fold(0.0, f64::max);
    let mut kraus = Vec::new();
    for (idx, &mu) in values.iter().enumerate().rev() {
        if mu <= tol.rank_tol_factor * top || mu <= 0.0 {
            continue;
        }
        let scale = mu.sqrt();
        let k = CMatrix::from_fn(dim, dim, |r, c| vectors[(r * dim + c, idx)].conj() * scale);
        kraus.push(k);
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(dim, dim));
    }
    kraus
}

/// Matrix unit `E_ij` in `M_d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    e[(i, j)] = c64(1.0, 0.0);
    e
}

/// Real diagonal matrix.
pub fn diag_real(values: &[f64]) -> CMatrix {
    let d = values.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { c64(values[i], 0.0) } else { C64::new(0.0, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn identity_superop() {
        let ch = fixture("identity(3)").unwrap();
        assert!(close(ch.superop(), &CMatrix::identity(9, 9), 0.0));
    }

    #[test]
    fn shemesh_action() {
        let ch = fixture("shemesh2").unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.5), c64(2.0, 0.0), c64(3.0, 0.0), c64(5.0, -1.0)]);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[c64(3.0, -0.25), c64(0.0, 0.0), c64(0.0, 0.0), c64(5.0, -1.0)],
        );
        assert!(close(&ch.apply(&x).unwrap(), &expected, 1e-15));
    }

    #[test]
    fn unitary_superop() {
        let u = haar_unitary(3, &mut random::rng(4));
        let ch = unitary_channel(u.clone()).unwrap();
        let expected = kron(&u.transpose(), &u.adjoint());
        assert!(close(ch.superop(), &expected, 1e-15));
        let s = ch.superop();
        assert!(close(&(s.adjoint() * s), &CMatrix::identity(9, 9), 1e-12));
    }

    #[test]
    fn validate_fixtures() {
        let tol = ToleranceConfig::default();
        let r = fixture("shemesh2").unwrap().validate(&tol);
        assert!(r.is_cp && r.is_unital && !r.is_trace_preserving);
        assert!(fixture("faithful3").unwrap().validate(&tol).is_faithful);
        let u = unitary_channel(haar_unitary(2, &mut random::rng(9))).unwrap();
        let r = u.validate(&tol);
        assert!(r.is_cp && r.is_unital && r.is_trace_preserving && r.is_faithful);
        let r = fixture("shemesh2").unwrap().validate(&tol);
        assert!(r.is_faithful, "L3 = E22 and L1, L2 cover the first column");
        // tau*(I) = diag(1/2, 3/2), so the TP gap is 1/2.
        assert!((r.tp_gap - 0.5).abs() < 1e-14);
    }

    #[test]
    fn shemesh_adjoint() {
        let ch = fixture("shemesh2").unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[c64(2.0, 1.0), c64(7.0, 0.0), c64(-3.0, 0.0), c64(1.0, 0.0)]);
        let expected = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.5), c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.5)]);
        assert!(close(&ch.adjoint().apply(&x).unwrap(), &expected, 1e-15));
    }

    #[test]
    fn station3_adjoint() {
        let ch = fixture("station3").unwrap();
        let y = diag_real(&[2.0, 3.0, 4.0]);
        assert!(close(&ch.adjoint().apply(&y).unwrap(), &diag_real(&[2.0, 2.0, 5.0]), 1e-15));
        let id = fixture("identity(2)").unwrap();
        assert_eq!(id.adjoint().superop(), id.superop());
    }

    #[test]
    fn fixture_arithmetic() {
        let avg3 = fixture("avg3").unwrap();
        assert!(close(&avg3.apply(&diag_real(&[1.0, 3.0, 2.0])).unwrap(), &diag_real(&[1.0, 3.0, 2.0]), 1e-13));
        assert!(close(&avg3.apply(&diag_real(&[1.0, 9.0, 4.0])).unwrap(), &diag_real(&[1.0, 9.0, 5.0]), 1e-13));
        let comp3 = fixture("comp3").unwrap();
        assert!(close(&comp3.apply(&diag_real(&[9.0, 0.0, 1.0])).unwrap(), &diag_real(&[9.0, 0.0, 2.5]), 1e-13));
    }

    #[test]
    fn composition_formula() {
        // tau(X) = diag(x11, x22, (x11 + x33 + 2 x22) / 4)
        let comp3 = fixture("comp3").unwrap();
        let x = CMatrix::from_fn(3, 3, |i, j| c64((1 + i + 3 * j) as f64, (i as f64) - (j as f64)));
        let out = comp3.apply(&x).unwrap();
        let expected = diag_real(&[1.0, 5.0, 0.0])
            + matrix_unit(3, 2, 2) * ((x[(0, 0)] + x[(2, 2)] + x[(1, 1)] * 2.0) / 4.0);
        assert!(close(&out, &expected, 1e-14));
        let id = fixture("identity(3)").unwrap();
        let back = Channel::compose(&id, &comp3).unwrap();
        assert!(close(back.superop(), comp3.superop(), 1e-15));
    }

    #[test]
    fn composition_of_unitaries() {
        let mut rng = random::rng(1);
        let u = haar_unitary(2, &mut rng);
        let v = haar_unitary(2, &mut rng);
        let cu = unitary_channel(u.clone()).unwrap();
        let cv = unitary_channel(v.clone()).unwrap();
        let both = Channel::compose(&cu, &cv).unwrap();
        assert_eq!(both.kraus().len(), 1);
        assert!(close(&both.kraus()[0], &(&v * &u), 1e-15));
        assert!(close(both.superop(), &(cu.superop() * cv.superop()), 1e-14));
    }

    #[test]
    fn averaging_gives_diagonal_pinching() {
        let tol = ToleranceConfig::default();
        let id = fixture("identity(2)").unwrap();
        let z = unitary_channel(diag_real(&[1.0, -1.0])).unwrap();
        let avg = Channel::convex_combine(&[0.5, 0.5], &[id.clone(), z], &tol).unwrap();
        assert!(close(avg.superop(), pinch_diag(2).superop(), 1e-15));
        let single = Channel::convex_combine(&[1.0], std::slice::from_ref(&id), &tol).unwrap();
        assert!(close(single.superop(), id.superop(), 0.0));
        assert!(matches!(
            Channel::convex_combine(&[0.7, 0.7], &[id.clone(), id.clone()], &tol),
            Err(Error::BadWeights(_))
        ));
    }

    #[test]
    fn avg3_is_the_average() {
        let tol = ToleranceConfig::default();
        let t1 = fixture("tau1_avg").unwrap();
        let t2 = fixture("tau2_avg").unwrap();
        let avg = Channel::convex_combine(&[0.5, 0.5], &[t1, t2], &tol).unwrap();
        assert!(close(avg.superop(), fixture("avg3").unwrap().superop(), 1e-15));
        assert!(avg.is_unital(&tol));
    }

    #[test]
    fn pinch_compress_cases() {
        let station = fixture("station3").unwrap();
        let same = station.pinch_compress(&[3]).unwrap();
        assert!(close(same.superop(), station.superop(), 1e-15));
        let diag_only = station.pinch_compress(&[1, 1, 1]).unwrap();
        assert!(close(diag_only.superop(), station.superop(), 1e-15));
        let id = fixture("identity(2)").unwrap();
        assert!(close(id.pinch_compress(&[1, 1]).unwrap().superop(), pinch_diag(2).superop(), 0.0));
        assert!(matches!(station.pinch_compress(&[1, 1]), Err(Error::BadPartition(_))));
    }

    #[test]
    fn choi_round_trip() {
        let tol = ToleranceConfig::default();
        let ch = fixture("station3").unwrap();
        let back = Channel::from_choi(3, ch.choi(), &tol).unwrap();
        assert!(close(back.superop(), ch.superop(), 1e-12));
        assert!(back.kraus().len() <= ch.kraus().len());
    }

    #[test]
    fn station3_flips_sign() {
        let ch = fixture("station3").unwrap();
        let out = ch.apply(&diag_real(&[1.0, 1.0, -1.0])).unwrap();
        assert!(close(&out, &diag_real(&[-1.0, -1.0, 1.0]), 1e-15));
    }

    #[test]
    fn non_unital_is_tagged() {
        let tol = ToleranceConfig::default();
        let ch = Channel::from_kraus(vec![matrix_unit(2, 0, 0)]).unwrap();
        assert!(!ch.validate(&tol).is_unital);
        assert!(matches!(ch.require_unital(&tol), Err(Error::NotUnital { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            Channel::from_kraus(vec![CMatrix::identity(2, 2), CMatrix::identity(3, 3)]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(Channel::from_kraus(vec![]).is_err());
        let ch = fixture("identity(2)").unwrap();
        assert!(ch.apply(&CMatrix::identity(3, 3)).is_err());
    }
}
