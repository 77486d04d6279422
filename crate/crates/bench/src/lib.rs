//! Shared instance constructors for the criterion benchmarks.

use tensorquad::boundary::RowStructure;
use tensorquad::integrands::{
    build_gaussian_tn, build_polynomial_tn, make_banded_a, make_polynomial,
    make_power_polynomial, PolynomialSpec,
};
use tensorquad::TensorNetwork;

/// Replicated-row network: 6 identical rows over 20 variables on a 10-point
/// grid — the shape where boundary compression shines.
pub fn replicated_rows() -> (PolynomialSpec, RowStructure) {
    let spec = make_power_polynomial(20, 6, 10, 0).unwrap();
    let rows = build_polynomial_tn(&spec).unwrap();
    (spec, rows)
}

/// Pair-coupled Gaussian with a width-2 band densified at strength 0.1 over
/// 20 variables on a 4-point grid — the shape that exercises truncation.
pub fn densified_band() -> TensorNetwork {
    let spec = make_banded_a(20, 2, 4, 0.1, 0).unwrap();
    build_gaussian_tn(&spec).unwrap()
}

/// Small fully-random polynomial network for the greedy exact contractor.
pub fn small_general_network() -> TensorNetwork {
    let spec = make_polynomial(5, 4, 5, 1.0, 0).unwrap();
    tensorquad::integrands::build_polynomial_network(&spec).unwrap()
}
