use crate::error::{Error, Result};
use crate::numkernel::{psd_gap, CMatrix, ToleranceConfig};

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDensity {
    rho: CMatrix,
}

impl StateDensity {
    pub fn new(rho: CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::NotAState("density must be a non-empty square matrix".into()));
        }
        let gap = psd_gap(&rho, tol).map_err(|_| Error::NotAState("density is not Hermitian".into()))?;
        if gap < -tol.eq_tol {
            return Err(Error::NotAState(format!("density has eigenvalue {gap:e}")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol.eq_tol || tr.im.abs() > tol.eq_tol {
            return Err(Error::NotAState(format!("density has trace {tr}")));
        }
        Ok(StateDensity { rho })
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        StateDensity {
            rho: CMatrix::identity(d, d) / crate::numkernel::c64(d as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::diag_real;

    #[test]
    fn validation() {
        let tol = ToleranceConfig::default();
        assert!(StateDensity::new(diag_real(&[0.25, 0.25, 0.5]), &tol).is_ok());
        assert!(StateDensity::new(diag_real(&[0.5, 0.6]), &tol).is_err());
        assert!(StateDensity::new(diag_real(&[1.5, -0.5]), &tol).is_err());
        let mut skew = diag_real(&[0.5, 0.5]);
        skew[(0, 1)] = crate::numkernel::c64(0.1, 0.0);
        assert!(matches!(StateDensity::new(skew, &tol), Err(Error::NotAState(_))));
        assert_eq!(StateDensity::maximally_mixed(4).rho().trace().re, 1.0);
    }
}
