//! Spectrum of the superoperator, the peripheral/transient decomposition and related checks.

mod decomposition;
mod projector;

use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numkernel::{
    eigenvalues, null_space_below, operator_norm, CMatrix, HSBasis, ToleranceConfig, C64,
};

pub use decomposition::{
    check_peripheral_diagonalizable, decay_verify, peripheral_decomposition,
    peripheral_decomposition_of, peripheral_space_on_blocks, power_space_equality, subspace_gap,
    DecayReport, DecayVerdict, DiagonalizabilityReport, MultiplicityEntry, PeripheralDecomposition,
    PeripheralVector, PowerSpaceReport,
};
pub use projector::{
    contour_projector, peripheral_projector, peripheral_region, PeripheralMethod, CONTOUR_NODES,
};

/// A cluster of numerically coincident eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenCluster {
    /// Cluster mean, radially snapped onto the unit circle for peripheral clusters.
    pub value: C64,
    pub multiplicity: usize,
    /// Unsnapped cluster mean.
    #[serde(skip)]
    pub raw: C64,
    /// Largest distance from a member to the mean.
    #[serde(skip)]
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    /// All clusters, by decreasing modulus then increasing argument.
    pub eigenvalues: Vec<EigenCluster>,
    pub peripheral: Vec<EigenCluster>,
    /// Largest modulus outside the peripheral set (0 if there is none).
    pub transient_radius: f64,
    /// Eigenvalues just inside the peripheral cutoff: `peripheral_tol < 1 - |z| <= 1e3 peripheral_tol`.
    pub ambiguous: Vec<C64>,
}

impl SpectralData {
    pub fn spectral_gap(&self) -> f64 {
        1.0 - self.transient_radius
    }

    pub fn peripheral_count(&self) -> usize {
        self.peripheral.iter().map(|c| c.multiplicity).sum()
    }
}

/// Argument in `[0, 2 pi)`, with values a hair below zero folded to zero.
pub(crate) fn arg_key(z: C64) -> f64 {
    let a = z.arg();
    if a < -1e-12 {
        a + std::f64::consts::TAU
    } else {
        a.max(0.0)
    }
}

/// Single-linkage clustering at radius `radius`; clusters are returned by decreasing modulus.
pub fn cluster_eigenvalues(values: &[C64], radius: f64) -> Vec<EigenCluster> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<C64>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(values[i]);
    }
    let mut clusters: Vec<EigenCluster> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<C64>() / g.len() as f64;
            let spread = g.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
            EigenCluster {
                value: mean,
                multiplicity: g.len(),
                raw: mean,
                spread,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.raw
            .norm()
            .total_cmp(&a.raw.norm())
            .then(arg_key(a.raw).total_cmp(&arg_key(b.raw)))
    });
    clusters
}

pub(crate) fn is_peripheral(z: C64, tol: &ToleranceConfig) -> bool {
    (z.norm() - 1.0).abs() <= tol.peripheral_tol
}

/// Clustered spectrum of a superoperator.
pub fn spectrum_of(superop: &CMatrix, tol: &ToleranceConfig) -> Result<SpectralData> {
    let values = eigenvalues(superop)?;
    let mut clusters = cluster_eigenvalues(&values, tol.cluster_tol);
    let mut peripheral = Vec::new();
    let mut transient_radius: f64 = 0.0;
    let mut ambiguous = Vec::new();
    for c in clusters.iter_mut() {
        if is_peripheral(c.raw, tol) {
            c.value = c.raw / c.raw.norm();
            peripheral.push(*c);
        } else {
            transient_radius = transient_radius.max(c.raw.norm());
            let depth = 1.0 - c.raw.norm();
            if depth > 0.0 && depth <= 1e3 * tol.peripheral_tol {
                ambiguous.push(c.raw);
            }
        }
    }
    peripheral.sort_by(|a, b| arg_key(a.value).total_cmp(&arg_key(b.value)));
    Ok(SpectralData {
        eigenvalues: clusters,
        peripheral,
        transient_radius,
        ambiguous,
    })
}

/// Clustered spectrum of a UCP map.
pub fn spectrum(ch: &Channel, tol: &ToleranceConfig) -> Result<SpectralData> {
    ch.require_unital(tol)?;
    spectrum_of(ch.superop(), tol)
}

/// HS-orthonormal basis of `E_lambda = ker(T - lambda)`, for `lambda` within `cluster_tol` of an
/// eigenvalue. The null-space cutoff is widened to cover the spread of the matched cluster.
pub fn eigenspace_of(
    superop: &CMatrix,
    data: &SpectralData,
    dim: usize,
    lambda: C64,
    tol: &ToleranceConfig,
) -> Result<HSBasis> {
    let cluster = data
        .eigenvalues
        .iter()
        .filter(|c| (c.value - lambda).norm() <= tol.cluster_tol || (c.raw - lambda).norm() <= tol.cluster_tol)
        .min_by(|a, b| (a.raw - lambda).norm().total_cmp(&(b.raw - lambda).norm()))
        .ok_or(Error::NotAnEigenvalue { eigenvalue: lambda })?;
    let n = superop.nrows();
    let shifted = superop - CMatrix::identity(n, n) * cluster.raw;
    let smax = operator_norm(superop).max(1.0);
    let threshold = (tol.rank_tol_factor * smax).max(10.0 * cluster.spread);
    let basis = null_space_below(&shifted, threshold);
    Ok(HSBasis::from_orthonormal_columns(&basis, dim))
}

/// HS-orthonormal basis of `E_lambda(tau) = {X : tau(X) = lambda X}`.
pub fn eigenspace(ch: &Channel, lambda: C64, tol: &ToleranceConfig) -> Result<HSBasis> {
    let data = spectrum(ch, tol)?;
    eigenspace_of(ch.superop(), &data, ch.dim(), lambda, tol)
}
