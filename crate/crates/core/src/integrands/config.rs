//! Flat key=value serialization of integrand family parameters, the shared
//! vocabulary between config files, command-line overrides, and result
//! records. Every family round-trips exactly through `to_pairs`/`from_pairs`.

use std::collections::BTreeMap;

use super::gaussian::{make_banded_a, GaussianSpec};
use super::mera::{make_random_mera, MeraSpec};
use super::polynomial::{
    make_perturbed_polynomial, make_polynomial, make_power_polynomial, make_sin_polynomial,
    PolynomialSpec,
};
use crate::{Error, Result};

/// Parameters identifying one integrand family instance shape (everything
/// except the random seed).
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    PolynomialPower { n_vars: usize, n_factors: usize, grid: usize },
    PolynomialGeneral { n_vars: usize, n_factors: usize, grid: usize, lambda: f64 },
    PolynomialPerturbed { n_vars: usize, n_factors: usize, grid: usize, delta: f64 },
    PolynomialSin { n_vars: usize, n_factors: usize, grid: usize, c: f64 },
    Gaussian { n_vars: usize, band_width: usize, grid: usize, delta: f64 },
    Mera { n_leaves: usize, grid: usize },
}

/// A constructed instance, ready for network building or reference sums.
#[derive(Clone, Debug)]
pub enum FamilyInstance {
    Polynomial(PolynomialSpec),
    Gaussian(GaussianSpec),
    Mera(MeraSpec),
}

fn get<'a>(pairs: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    pairs
        .get(key)
        .map(|s| s.as_str())
        .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
}

fn get_usize(pairs: &BTreeMap<String, String>, key: &str) -> Result<usize> {
    let raw = get(pairs, key)?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: `{raw}` is not a count")))
}

fn get_f64(pairs: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = get(pairs, key)?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: `{raw}` is not a number")))
}

impl FamilySpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            FamilySpec::PolynomialPower { .. } => "polynomial-power",
            FamilySpec::PolynomialGeneral { .. } => "polynomial-general",
            FamilySpec::PolynomialPerturbed { .. } => "polynomial-perturbed",
            FamilySpec::PolynomialSin { .. } => "polynomial-sin",
            FamilySpec::Gaussian { .. } => "gaussian",
            FamilySpec::Mera { .. } => "mera",
        }
    }

    pub fn grid(&self) -> usize {
        match *self {
            FamilySpec::PolynomialPower { grid, .. }
            | FamilySpec::PolynomialGeneral { grid, .. }
            | FamilySpec::PolynomialPerturbed { grid, .. }
            | FamilySpec::PolynomialSin { grid, .. }
            | FamilySpec::Gaussian { grid, .. }
            | FamilySpec::Mera { grid, .. } => grid,
        }
    }

    /// The same shape on a different grid size (used for grid sweeps).
    pub fn with_grid(&self, grid: usize) -> FamilySpec {
        let mut out = self.clone();
        match &mut out {
            FamilySpec::PolynomialPower { grid: g, .. }
            | FamilySpec::PolynomialGeneral { grid: g, .. }
            | FamilySpec::PolynomialPerturbed { grid: g, .. }
            | FamilySpec::PolynomialSin { grid: g, .. }
            | FamilySpec::Gaussian { grid: g, .. }
            | FamilySpec::Mera { grid: g, .. } => *g = grid,
        }
        out
    }

    pub fn n_vars(&self) -> usize {
        match *self {
            FamilySpec::PolynomialPower { n_vars, .. }
            | FamilySpec::PolynomialGeneral { n_vars, .. }
            | FamilySpec::PolynomialPerturbed { n_vars, .. }
            | FamilySpec::PolynomialSin { n_vars, .. }
            | FamilySpec::Gaussian { n_vars, .. } => n_vars,
            FamilySpec::Mera { n_leaves, .. } => n_leaves,
        }
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![("family", self.family_name().to_string())];
        match *self {
            FamilySpec::PolynomialPower { n_vars, n_factors, grid } => {
                pairs.push(("n", n_vars.to_string()));
                pairs.push(("k", n_factors.to_string()));
                pairs.push(("g", grid.to_string()));
            }
            FamilySpec::PolynomialGeneral { n_vars, n_factors, grid, lambda } => {
                pairs.push(("n", n_vars.to_string()));
                pairs.push(("k", n_factors.to_string()));
                pairs.push(("g", grid.to_string()));
                pairs.push(("lambda", lambda.to_string()));
            }
            FamilySpec::PolynomialPerturbed { n_vars, n_factors, grid, delta } => {
                pairs.push(("n", n_vars.to_string()));
                pairs.push(("k", n_factors.to_string()));
                pairs.push(("g", grid.to_string()));
                pairs.push(("delta", delta.to_string()));
            }
            FamilySpec::PolynomialSin { n_vars, n_factors, grid, c } => {
                pairs.push(("n", n_vars.to_string()));
                pairs.push(("k", n_factors.to_string()));
                pairs.push(("g", grid.to_string()));
                pairs.push(("c", c.to_string()));
            }
            FamilySpec::Gaussian { n_vars, band_width, grid, delta } => {
                pairs.push(("n", n_vars.to_string()));
                pairs.push(("w", band_width.to_string()));
                pairs.push(("g", grid.to_string()));
                pairs.push(("delta", delta.to_string()));
            }
            FamilySpec::Mera { n_leaves, grid } => {
                pairs.push(("n", n_leaves.to_string()));
                pairs.push(("g", grid.to_string()));
            }
        }
        pairs
    }

    /// Reads the family keys out of a flat map, ignoring unrelated keys.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<FamilySpec> {
        let family = get(pairs, "family")?;
        match family {
            "polynomial-power" => Ok(FamilySpec::PolynomialPower {
                n_vars: get_usize(pairs, "n")?,
                n_factors: get_usize(pairs, "k")?,
                grid: get_usize(pairs, "g")?,
            }),
            "polynomial-general" => Ok(FamilySpec::PolynomialGeneral {
                n_vars: get_usize(pairs, "n")?,
                n_factors: get_usize(pairs, "k")?,
                grid: get_usize(pairs, "g")?,
                lambda: get_f64(pairs, "lambda")?,
            }),
            "polynomial-perturbed" => Ok(FamilySpec::PolynomialPerturbed {
                n_vars: get_usize(pairs, "n")?,
                n_factors: get_usize(pairs, "k")?,
                grid: get_usize(pairs, "g")?,
                delta: get_f64(pairs, "delta")?,
            }),
            "polynomial-sin" => Ok(FamilySpec::PolynomialSin {
                n_vars: get_usize(pairs, "n")?,
                n_factors: get_usize(pairs, "k")?,
                grid: get_usize(pairs, "g")?,
                c: get_f64(pairs, "c")?,
            }),
            "gaussian" => Ok(FamilySpec::Gaussian {
                n_vars: get_usize(pairs, "n")?,
                band_width: get_usize(pairs, "w")?,
                grid: get_usize(pairs, "g")?,
                delta: get_f64(pairs, "delta")?,
            }),
            "mera" => Ok(FamilySpec::Mera {
                n_leaves: get_usize(pairs, "n")?,
                grid: get_usize(pairs, "g")?,
            }),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }

    /// Construct the random instance for a seed.
    pub fn instantiate(&self, seed: u64) -> Result<FamilyInstance> {
        Ok(match *self {
            FamilySpec::PolynomialPower { n_vars, n_factors, grid } => {
                FamilyInstance::Polynomial(make_power_polynomial(n_vars, n_factors, grid, seed)?)
            }
            FamilySpec::PolynomialGeneral { n_vars, n_factors, grid, lambda } => {
                FamilyInstance::Polynomial(make_polynomial(
                    n_vars, n_factors, grid, lambda, seed,
                )?)
            }
            FamilySpec::PolynomialPerturbed { n_vars, n_factors, grid, delta } => {
                FamilyInstance::Polynomial(make_perturbed_polynomial(
                    n_vars, n_factors, grid, delta, seed,
                )?)
            }
            FamilySpec::PolynomialSin { n_vars, n_factors, grid, c } => {
                FamilyInstance::Polynomial(make_sin_polynomial(n_vars, n_factors, grid, c, seed)?)
            }
            FamilySpec::Gaussian { n_vars, band_width, grid, delta } => {
                FamilyInstance::Gaussian(make_banded_a(n_vars, band_width, grid, delta, seed)?)
            }
            FamilySpec::Mera { n_leaves, grid } => {
                FamilyInstance::Mera(make_random_mera(n_leaves, grid, seed)?)
            }
        })
    }
}
