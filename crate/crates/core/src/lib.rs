//! Peripheral spaces, peripheral Poisson boundaries and structural classification of unital
//! completely positive maps on `M_d`.
//!
//! A channel acts as `tau(X) = sum_i L_i† X L_i`; superoperators use column-stacking `vec`.

pub mod boundary;
pub mod channel;
pub mod classify;
pub mod error;
pub mod numkernel;
pub mod spectral;

pub use boundary::BoundaryAlgebra;
pub use channel::{Channel, ChannelDescriptor, RandomKind, StateDensity, ValidationReport};
pub use classify::{BlockDecomposition, ClassificationReport, PAReport, StationarityReport};
pub use error::{Error, Result};
pub use numkernel::{CMatrix, HSBasis, ToleranceConfig, C64};
pub use spectral::{PeripheralDecomposition, SpectralData};
