//! Classification of UCP maps: peripheral automorphy, stationarity, multiplicative domains,
//! irreducible blocks and related structural checks.

mod checks;
mod domain;
mod pa;
mod stationarity;

pub use checks::{
    automorphism_check, convexity_check, gns_orthogonality_gap, kribs_check, state_reducing_gap,
    AutomorphismCheck, ConvexityReport, KribsReport, StateReducingReport,
};
pub use domain::{
    kraus_algebra, multiplicative_domain, multiplicative_domain_inf, DomainSummary,
    StabilizedDomain, SubalgebraBasis,
};
pub use pa::{is_peripherally_automorphic, ConditionResult, PAReport, ProductWitness, VERDICT_TOL};
pub use stationarity::{
    invariant_states, irreducible_blocks, is_stationary, BlockDecomposition, BlockSummary,
    InvariantStates, StationarityReport, MAX_DRAWS,
};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numkernel::ToleranceConfig;
use crate::spectral::PeripheralDecomposition;

/// Everything `classify` reports about one channel.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub pa: PAReport,
    pub stationarity: StationarityReport,
    /// Present for stationary channels.
    pub blocks: Option<BlockDecomposition>,
    pub automorphism: AutomorphismCheck,
}

impl ClassificationReport {
    /// Irreducible: stationary with a single block.
    pub fn irreducible(&self) -> bool {
        self.blocks
            .as_ref()
            .is_some_and(|b| b.len() == 1 && b.irreducible_flags[0])
    }
}

/// Runs the peripheral-automorphy, stationarity, block and automorphism analyses.
pub fn classify(ch: &Channel, seed: u64, tol: &ToleranceConfig) -> Result<ClassificationReport> {
    let dec = crate::spectral::peripheral_decomposition(ch, tol)?;
    classify_with(ch, &dec, seed, tol)
}

pub fn classify_with(
    ch: &Channel,
    dec: &PeripheralDecomposition,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<ClassificationReport> {
    let pa = pa::pa_report_with(ch, dec, tol)?;
    let stationarity = is_stationary(ch, tol)?;
    let blocks = match irreducible_blocks(ch, seed, tol) {
        Ok(b) => Some(b),
        Err(Error::NotStationary) => None,
        Err(e) => return Err(e),
    };
    Ok(ClassificationReport {
        pa,
        stationarity,
        blocks,
        automorphism: automorphism_check(ch, tol)?,
    })
}
