//! Free bose fields on finite oscillator networks.
//!
//! A model is a positive-definite coupling matrix Ω² on ℝⁿ. From its
//! eigendecomposition the crate builds the classical phase-space structure
//! (flow, complex structure, the map z_Ω), the truncated Fock
//! quantization with ladder, Weyl and field operators, and the locality
//! tests that decide whether a finite-quanta state can look like the
//! vacuum outside a region.

pub mod classical;
pub mod fock;
pub mod locality;
pub mod models;
pub mod optimize;
pub mod quadrature;
pub mod spectral;

pub use classical::{ComplexAmplitude, PhaseVector};
pub use fock::{FockBasis, FockOperator, FockVector};
pub use locality::Region;
pub use models::ModelSpec;
pub use spectral::{decompose, CouplingMatrix, SpectralModel};
