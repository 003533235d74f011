use serde::{Deserialize, Serialize};

use super::spectrum_of;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numkernel::{c64, spectral_split, CMatrix, Region, SpectralSplit, ToleranceConfig};

/// Trapezoid nodes for the contour projector.
pub const CONTOUR_NODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeripheralMethod {
    Schur,
    Contour,
}

/// The selection `|z| >= 1 - peripheral_tol`.
pub fn peripheral_region(tol: &ToleranceConfig) -> Region {
    Region::ModulusAtLeast(1.0 - tol.peripheral_tol)
}

/// Ordered-Schur split at the peripheral cutoff. Eigenvalues within `peripheral_tol / 2` of the
/// cutoff are refused.
pub(crate) fn peripheral_split(superop: &CMatrix, tol: &ToleranceConfig) -> Result<SpectralSplit> {
    spectral_split(superop, peripheral_region(tol), 0.5 * tol.peripheral_tol)
}

/// `I - (1/N) sum_k z_k (z_k - T)^{-1}` over `N` equispaced nodes on `|z| = radius`.
pub fn contour_projector(t: &CMatrix, radius: f64, nodes: usize) -> Result<CMatrix> {
    let n = t.nrows();
    let id = CMatrix::identity(n, n);
    let mut q = CMatrix::zeros(n, n);
    for k in 0..nodes {
        let theta = std::f64::consts::TAU * k as f64 / nodes as f64;
        let z = c64(radius * theta.cos(), radius * theta.sin());
        let shifted = &id * z - t;
        let resolvent = shifted
            .lu()
            .solve(&(&id * z))
            .ok_or(Error::NoSpectralGap { transient_radius: radius })?;
        q += resolvent;
    }
    Ok(id - q / c64(nodes as f64, 0.0))
}

/// Projector onto `vec(P(tau))` along `vec(N(tau))`.
pub fn peripheral_projector(
    ch: &Channel,
    method: PeripheralMethod,
    tol: &ToleranceConfig,
) -> Result<CMatrix> {
    ch.require_unital(tol)?;
    let t = ch.superop();
    match method {
        PeripheralMethod::Schur => Ok(peripheral_split(t, tol)?.projector),
        PeripheralMethod::Contour => {
            let r = spectrum_of(t, tol)?.transient_radius;
            if r >= 1.0 - tol.peripheral_tol {
                return Err(Error::NoSpectralGap { transient_radius: r });
            }
            contour_projector(t, 0.5 * (1.0 + r), CONTOUR_NODES)
        }
    }
}
