//! Independent full-grid references: every family's integral evaluated as a
//! plain weighted sum over all G^N grid cells, sharing no code with the
//! tensor-network builders or contraction routines.

use super::gaussian::GaussianSpec;
use super::mera::{amplitudes, MeraSpec};
use super::polynomial::PolynomialSpec;
use crate::{Error, Result};

const MAX_CELLS: usize = 1 << 26;

fn checked_cells(g: usize, n: usize) -> Result<usize> {
    let mut total = 1usize;
    for _ in 0..n {
        total = total.checked_mul(g).ok_or_else(|| {
            Error::InvalidArgument(format!("grid {g}^{n} overflows the cell budget"))
        })?;
        if total > MAX_CELLS {
            return Err(Error::InvalidArgument(format!(
                "grid {g}^{n} exceeds the brute-force cell budget"
            )));
        }
    }
    Ok(total)
}

/// Walk every multi-index of an N-dimensional G-grid in odometer order,
/// accumulating weight * f(index) with a fixed summation order.
fn grid_sum(g: usize, n: usize, weights: &[f64], mut f: impl FnMut(&[usize]) -> f64) -> f64 {
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for &p in &idx {
            w *= weights[p];
        }
        total += w * f(&idx);
        let mut d = 0;
        loop {
            if d == n {
                return total;
            }
            idx[d] += 1;
            if idx[d] < g {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub fn brute_force_polynomial(spec: &PolynomialSpec) -> Result<f64> {
    let (g, n) = (spec.grid_size(), spec.n_vars());
    checked_cells(g, n)?;
    Ok(grid_sum(g, n, spec.rule().weights(), |idx| {
        spec.value_at(idx).unwrap()
    }))
}

pub fn brute_force_gaussian(spec: &GaussianSpec) -> Result<f64> {
    let (g, n) = (spec.grid_size(), spec.n_vars());
    checked_cells(g, n)?;
    Ok(grid_sum(g, n, spec.rule().weights(), |idx| {
        spec.value_at(idx).unwrap()
    }))
}

pub fn brute_force_mera(spec: &MeraSpec) -> Result<f64> {
    let (g, n) = (spec.rule.len(), spec.n_leaves);
    checked_cells(g, n)?;
    let amps = amplitudes(spec)?;
    Ok(grid_sum(g, n, spec.rule.weights(), |idx| {
        let f = super::mera::value_at(spec, &amps, idx).unwrap();
        f * f
    }))
}
