//! Built-in integrand families: factor-sum polynomials, pairwise-coupled
//! Gaussians, and layered orthogonal-map integrands, each with random
//! constructors, tensor-network builders, independent reference sums, and a
//! flat key=value parameter serialization.

pub mod config;
pub mod gaussian;
pub mod mera;
pub mod oracle;
pub mod polynomial;

pub use config::{FamilyInstance, FamilySpec};
pub use gaussian::{build_gaussian_tn, make_banded_a, GaussianSpec};
pub use mera::{build_mera_integrand, make_random_mera, MeraLayer, MeraSpec};
pub use oracle::{brute_force_gaussian, brute_force_mera, brute_force_polynomial};
pub use polynomial::{
    build_polynomial_network, build_polynomial_tn, build_projected_network, exact_projectors,
    make_perturbed_polynomial, make_polynomial, make_power_polynomial, make_sin_polynomial,
    make_sin_polynomial_with_phases, sin_term,
    recursion_integral, PerturbationSpec, PolynomialSpec,
};
