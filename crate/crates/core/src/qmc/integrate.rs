//! Quadrature over axis-aligned boxes by low-discrepancy sampling, in plain
//! or log-space accumulation. Samples are consumed in fixed batches whose
//! partial sums combine in batch order, so the result is bit-stable no
//! matter how batches are scheduled.

use super::sobol::SobolSequence;
use crate::{Error, Result};

/// Default number of points per accumulation batch.
pub const DEFAULT_BATCH: usize = 1_000_000;

/// Sample-mean estimate in log form: the integral estimate is
/// `sign * exp(log_abs_mean) * domain_volume`.
#[derive(Clone, Copy, Debug)]
pub struct QmcEstimate {
    pub n_samples: u64,
    pub log_abs_mean: f64,
    pub sign: i8,
    pub domain_volume: f64,
}

impl QmcEstimate {
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.log_abs_mean.exp() * self.domain_volume
    }

    /// ln |estimate|, folding in the domain volume.
    pub fn log_value(&self) -> f64 {
        self.log_abs_mean + self.domain_volume.ln()
    }
}

fn check_domain(domain: &[(f64, f64)]) -> Result<f64> {
    if domain.is_empty() {
        return Err(Error::InvalidArgument("domain needs at least one axis".into()));
    }
    let mut volume = 1.0;
    for &(lo, hi) in domain {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "degenerate axis range [{lo}, {hi}]"
            )));
        }
        volume *= hi - lo;
    }
    Ok(volume)
}

/// ln(e^a + e^b) without leaving log space.
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn for_each_batch(
    dim: usize,
    n_samples: u64,
    batch_size: usize,
    mut handle: impl FnMut(&[f64]),
) -> Result<()> {
    let mut seq = SobolSequence::new(dim)?;
    let mut point = vec![0.0; dim];
    let mut remaining = n_samples;
    while remaining > 0 {
        let this_batch = remaining.min(batch_size as u64);
        for _ in 0..this_batch {
            seq.next_point(&mut point)?;
            handle(&point);
        }
        remaining -= this_batch;
    }
    Ok(())
}

fn map_to_domain(unit: &[f64], domain: &[(f64, f64)], out: &mut [f64]) {
    for (slot, (u, &(lo, hi))) in out.iter_mut().zip(unit.iter().zip(domain)) {
        *slot = lo + u * (hi - lo);
    }
}

/// Estimate the integral of `f` over the box `domain` from `n_samples`
/// low-discrepancy points, accumulating plain partial sums per batch and
/// combining batches in order.
pub fn qmc_integrate(
    f: impl Fn(&[f64]) -> f64,
    domain: &[(f64, f64)],
    n_samples: u64,
    batch_size: usize,
) -> Result<QmcEstimate> {
    let volume = check_domain(domain)?;
    if n_samples == 0 || batch_size == 0 {
        return Err(Error::InvalidArgument(
            "sample count and batch size must be positive".into(),
        ));
    }
    let dim = domain.len();
    let mut x = vec![0.0; dim];
    let mut total = 0.0;
    let mut batch_sum = 0.0;
    let mut in_batch = 0usize;
    for_each_batch(dim, n_samples, batch_size, |unit| {
        map_to_domain(unit, domain, &mut x);
        batch_sum += f(&x);
        in_batch += 1;
        if in_batch == batch_size {
            total += batch_sum;
            batch_sum = 0.0;
            in_batch = 0;
        }
    })?;
    total += batch_sum;
    let mean = total / n_samples as f64;
    Ok(QmcEstimate {
        n_samples,
        log_abs_mean: mean.abs().ln(),
        sign: if mean > 0.0 {
            1
        } else if mean < 0.0 {
            -1
        } else {
            0
        },
        domain_volume: volume,
    })
}

/// Same estimate for a positive integrand supplied as `ln f`; the mean is
/// accumulated entirely in log space, so values spanning hundreds of orders
/// of magnitude neither overflow nor vanish.
pub fn qmc_integrate_log(
    log_f: impl Fn(&[f64]) -> f64,
    domain: &[(f64, f64)],
    n_samples: u64,
    batch_size: usize,
) -> Result<QmcEstimate> {
    let volume = check_domain(domain)?;
    if n_samples == 0 || batch_size == 0 {
        return Err(Error::InvalidArgument(
            "sample count and batch size must be positive".into(),
        ));
    }
    let dim = domain.len();
    let mut x = vec![0.0; dim];
    let mut total = f64::NEG_INFINITY;
    let mut batch_acc = f64::NEG_INFINITY;
    let mut in_batch = 0usize;
    for_each_batch(dim, n_samples, batch_size, |unit| {
        map_to_domain(unit, domain, &mut x);
        batch_acc = log_add(batch_acc, log_f(&x));
        in_batch += 1;
        if in_batch == batch_size {
            total = log_add(total, batch_acc);
            batch_acc = f64::NEG_INFINITY;
            in_batch = 0;
        }
    })?;
    total = log_add(total, batch_acc);
    Ok(QmcEstimate {
        n_samples,
        log_abs_mean: total - (n_samples as f64).ln(),
        sign: if total == f64::NEG_INFINITY { 0 } else { 1 },
        domain_volume: volume,
    })
}
