//! Core algebra and dynamics of the consent-friction model.
//!
//! * [`kernel`]: friction, legitimacy and allocation over stakeholders
//! * [`estimators`]: alignment, stake, entropy and friction-proxy estimates
//! * [`rom`]: replicator-mutator dynamics with consent-derived survival
//! * [`dynamics`]: friction and legitimacy along parameter paths
//! * [`coarse`]: lumpability and coarse-graining of type spaces

pub mod coarse;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod ode;
pub mod rom;

pub use error::{Error, Result};
pub use kernel::{friction, DelegationDomain, KernelTriple, Stakeholder};
