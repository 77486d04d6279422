//! Tensor networks for arithmetic circuits of multivariable functions.
//!
//! The crate builds tensor networks that represent sums, products, and powers
//! of single-variable functions sampled on quadrature grids, then contracts
//! them either exactly or with SVD-compressed boundary sweeps to evaluate
//! high-dimensional integrals over hypercubes. A Sobol quasi-Monte-Carlo
//! integrator is included as the comparison baseline.
//!
//! Modules:
//!
//! * [`tensor`]: dense tensors with named legs, contraction, fusing, and
//!   truncated SVD splitting.
//! * [`circuit`]: elementary circuit tensors (function, add, multiply, COPY,
//!   CNOT, modular-add) and quadrature rules.
//! * [`expr`]: a small infix expression language compiled to tensor networks.
//! * [`network`]: tensor-network container and exact greedy contraction.
//! * [`boundary`]: boundary-MPS contraction for row-structured and banded
//!   networks with canonicalize-then-truncate compression sweeps.
//! * [`integrands`]: integrand families (product-of-sums polynomials,
//!   Gaussians in a hypercube, multiscale circuits), their exact
//!   compressibility projectors, a moment recursion, and brute-force oracles.
//! * [`qmc`]: Sobol sequence and quasi-Monte-Carlo integration.

pub mod boundary;
pub mod circuit;
pub mod expr;
pub mod integrands;
pub mod network;
pub mod qmc;
pub mod rng;
pub mod tensor;

mod linalg;

pub use boundary::{boundary_contract_banded, boundary_contract_rows, RowStructure};
pub use circuit::QuadratureRule;
pub use integrands::{FamilyInstance, FamilySpec};
pub use network::{contract_exact, ContractionReport, TensorNetwork};
pub use qmc::{qmc_integrate, qmc_integrate_log, sobol_points, QmcEstimate, SobolSequence};
pub use tensor::{Leg, SvdSplit, Tensor, TruncationSpec};

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown leg `{0}`")]
    UnknownLeg(String),
    #[error("duplicate leg `{0}`")]
    DuplicateLeg(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("open legs remain after contraction: {0:?}")]
    OpenLegs(Vec<String>),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
