//! Quasi-Monte-Carlo baseline: a deterministic low-discrepancy sequence and
//! cube-domain integration with ordinary and log-space accumulation.

pub mod integrate;
pub mod sobol;

pub use integrate::{qmc_integrate, qmc_integrate_log, QmcEstimate};
pub use sobol::{sobol_points, SobolSequence, MAX_DIMENSION};
