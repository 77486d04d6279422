//! Tensor networks and exact contraction.
//!
//! A [`TensorNetwork`] is a bag of tensors whose legs are matched by name:
//! a leg name shared by exactly two tensors is a bond, a name owned by one
//! tensor is open. Exact contraction repeatedly merges the tensor pair whose
//! product has the fewest elements (ties broken deterministically), tracking
//! the overall scale in log space so that networks whose value over- or
//! underflows f64 still contract to a usable (log, sign) pair.

use std::collections::HashMap;

use crate::tensor::Tensor;
use crate::{Error, Result};

/// Outcome of contracting a network down to a scalar.
#[derive(Clone, Debug)]
pub struct ContractionReport {
    /// ln |value|; `f64::NEG_INFINITY` when the value is exactly zero.
    pub value_log: f64,
    /// Sign of the value: -1, 0, or 1.
    pub value_sign: i8,
    /// Largest bond dimension over every pairwise contraction performed.
    pub max_bond_reached: usize,
    /// Total relative weight removed by truncations (zero for exact runs).
    pub cumulative_discarded_weight: f64,
}

impl ContractionReport {
    /// The scalar as an f64 (may overflow to +-inf for extreme logs).
    pub fn value(&self) -> f64 {
        self.value_sign as f64 * self.value_log.exp()
    }

    /// ln |self/other| — the log-space relative deviation from a reference.
    pub fn log_relative_to(&self, reference: &ContractionReport) -> f64 {
        self.value_log - reference.value_log
    }

    /// |self - other| / |other| computed stably through logs.
    pub fn relative_error_to(&self, reference: &ContractionReport) -> f64 {
        if reference.value_sign == 0 {
            return if self.value_sign == 0 { 0.0 } else { f64::INFINITY };
        }
        if self.value_sign == 0 {
            return 1.0;
        }
        let ratio = (self.value_log - reference.value_log).exp()
            * (self.value_sign * reference.value_sign) as f64;
        (ratio - 1.0).abs()
    }
}

/// A collection of tensors with name-matched legs.
#[derive(Clone, Debug, Default)]
pub struct TensorNetwork {
    tensors: Vec<Tensor>,
    /// ln of a positive scale factor multiplying the whole network.
    log_scale: f64,
    /// Sign factor multiplying the whole network: -1, 0, or 1.
    sign: i8,
}

impl TensorNetwork {
    pub fn new() -> Self {
        TensorNetwork { tensors: Vec::new(), log_scale: 0.0, sign: 1 }
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Multiplies the network by a scalar, folded into (log_scale, sign).
    pub fn scale_by(&mut self, factor: f64) {
        if factor == 0.0 {
            self.sign = 0;
            return;
        }
        if factor < 0.0 {
            self.sign = -self.sign;
        }
        self.log_scale += factor.abs().ln();
    }

    /// Adds a tensor. Every leg name may be owned by at most two tensors in
    /// the network, and a shared name must have matching dimensions.
    pub fn add_tensor(&mut self, t: Tensor) -> Result<usize> {
        for leg in t.legs() {
            let mut owners = 0usize;
            for existing in &self.tensors {
                if let Ok(d) = existing.dim_of(&leg.name) {
                    owners += 1;
                    if d != leg.dim {
                        return Err(Error::DimensionMismatch(format!(
                            "leg `{}` has dim {} here but {} elsewhere",
                            leg.name, leg.dim, d
                        )));
                    }
                }
            }
            if owners >= 2 {
                return Err(Error::DuplicateLeg(format!(
                    "leg `{}` already connects two tensors",
                    leg.name
                )));
            }
        }
        self.tensors.push(t);
        Ok(self.tensors.len() - 1)
    }

    /// Leg names owned by exactly one tensor, sorted.
    pub fn open_legs(&self) -> Vec<String> {
        let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
        for t in &self.tensors {
            for leg in t.legs() {
                let e = counts.entry(&leg.name).or_insert((0, leg.dim));
                e.0 += 1;
            }
        }
        let mut open: Vec<String> = counts
            .into_iter()
            .filter(|(_, (n, _))| *n == 1)
            .map(|(name, _)| name.to_string())
            .collect();
        open.sort();
        open
    }

    /// Renames a leg across the network (errors if absent or colliding).
    pub fn rename_leg(&mut self, from: &str, to: &str) -> Result<()> {
        if from == to {
            return Ok(());
        }
        let owners: Vec<usize> = self
            .tensors
            .iter()
            .enumerate()
            .filter(|(_, t)| t.has_leg(from))
            .map(|(i, _)| i)
            .collect();
        if owners.is_empty() {
            return Err(Error::UnknownLeg(from.to_string()));
        }
        if self.tensors.iter().any(|t| t.has_leg(to)) {
            return Err(Error::DuplicateLeg(format!(
                "cannot rename `{from}`: `{to}` already exists"
            )));
        }
        for i in owners {
            self.tensors[i].rename_leg(from, to)?;
        }
        Ok(())
    }

    /// Splices a projector pair into the bond `bond`: `p_l` must own legs
    /// {bond, mid} and `p_r` legs {mid, fresh}. After the call one original
    /// owner keeps `bond` into `p_l`, and the other owner's `bond` leg is
    /// renamed to `fresh`, connecting through `p_r`.
    pub fn insert_projector_pair(&mut self, bond: &str, p_l: Tensor, p_r: Tensor) -> Result<()> {
        let owners: Vec<usize> = self
            .tensors
            .iter()
            .enumerate()
            .filter(|(_, t)| t.has_leg(bond))
            .map(|(i, _)| i)
            .collect();
        if owners.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "bond `{bond}` must connect exactly two tensors, found {}",
                owners.len()
            )));
        }
        if !p_l.has_leg(bond) {
            return Err(Error::UnknownLeg(format!(
                "left projector does not carry the bond leg `{bond}`"
            )));
        }
        let mid: Vec<&str> = p_l
            .legs()
            .iter()
            .map(|l| l.name.as_str())
            .filter(|n| *n != bond)
            .collect();
        if mid.len() != 1 {
            return Err(Error::InvalidArgument(
                "left projector must have exactly two legs: the bond and a middle leg".into(),
            ));
        }
        let mid = mid[0].to_string();
        if !p_r.has_leg(&mid) {
            return Err(Error::UnknownLeg(format!(
                "right projector does not carry the middle leg `{mid}`"
            )));
        }
        let fresh: Vec<&str> = p_r
            .legs()
            .iter()
            .map(|l| l.name.as_str())
            .filter(|n| *n != mid)
            .collect();
        if fresh.len() != 1 {
            return Err(Error::InvalidArgument(
                "right projector must have exactly two legs: the middle leg and a fresh leg"
                    .into(),
            ));
        }
        let fresh = fresh[0].to_string();
        if self.tensors.iter().any(|t| t.has_leg(&fresh)) {
            return Err(Error::DuplicateLeg(format!(
                "fresh leg `{fresh}` already exists in the network"
            )));
        }
        // Reconnect the second owner through the projector pair.
        self.tensors[owners[1]].rename_leg(bond, &fresh)?;
        self.add_tensor(p_l)?;
        self.add_tensor(p_r)?;
        Ok(())
    }

    /// Contracts the network to a scalar report. Errors with
    /// [`Error::OpenLegs`] if any leg is open.
    pub fn contract_exact(&self) -> Result<ContractionReport> {
        let open = self.open_legs();
        if !open.is_empty() {
            return Err(Error::OpenLegs(open));
        }
        let (t, report) = self.contract_greedy(|_| 0)?;
        debug_assert!(t.legs().is_empty());
        let v = t.scalar_value()?;
        Ok(finalize_scalar(v, self.log_scale, self.sign, report))
    }

    /// Contracts everything, returning the remaining tensor with open legs
    /// intact plus the accumulated (log, sign) prefactor: the network value
    /// is `tensor * sign * exp(log)` elementwise.
    pub fn contract_to_tensor(&self) -> Result<(Tensor, f64, i8)> {
        let (t, report) = self.contract_greedy(|_| 0)?;
        Ok((
            t,
            self.log_scale + report.value_log,
            self.sign * report.value_sign,
        ))
    }

    /// Like [`contract_exact`](Self::contract_exact) but perturbing
    /// tie-breaks with `salt`, for testing contraction-order independence.
    pub fn contract_exact_salted(&self, salt: u64) -> Result<ContractionReport> {
        let open = self.open_legs();
        if !open.is_empty() {
            return Err(Error::OpenLegs(open));
        }
        let (t, report) = self.contract_greedy(|k| {
            // Any deterministic function of (salt, k) works; it only
            // permutes equal-cost candidates.
            salt.wrapping_mul(0x9e3779b97f4a7c15).rotate_left((k % 63) as u32)
        })?;
        let v = t.scalar_value()?;
        Ok(finalize_scalar(v, self.log_scale, self.sign, report))
    }

    /// Greedy pairwise contraction. `tie_salt` maps a candidate counter to a
    /// value that reorders equal-cost pairs; the default (constant zero)
    /// falls back to lexicographic order for determinism.
    fn contract_greedy(
        &self,
        tie_salt: impl Fn(u64) -> u64,
    ) -> Result<(Tensor, ContractionReport)> {
        if self.tensors.is_empty() {
            return Err(Error::InvalidArgument("cannot contract an empty network".into()));
        }
        let mut pool: Vec<Tensor> = self.tensors.clone();
        let mut log_acc = 0.0f64;
        let mut sign_acc: i8 = 1;
        let mut max_bond = 1usize;
        let mut counter = 0u64;

        // Track the max bond over the initial tensors too.
        for t in &pool {
            for leg in t.legs() {
                max_bond = max_bond.max(leg.dim);
            }
        }

        loop {
            // Find connected pairs; contract the cheapest.
            let mut best: Option<(usize, usize, usize, String, u64)> = None;
            for i in 0..pool.len() {
                for j in (i + 1)..pool.len() {
                    let shared: Vec<&str> = pool[i]
                        .legs()
                        .iter()
                        .map(|l| l.name.as_str())
                        .filter(|n| pool[j].has_leg(n))
                        .collect();
                    if shared.is_empty() {
                        continue;
                    }
                    let shared_size: usize =
                        shared.iter().map(|n| pool[i].dim_of(n).unwrap()).product();
                    let cost = (pool[i].len() / shared_size) * (pool[j].len() / shared_size);
                    let key = shared.iter().min().unwrap().to_string();
                    counter += 1;
                    let salt = tie_salt(counter);
                    let better = match &best {
                        None => true,
                        Some((bc, bi, bj, bk, bs)) => {
                            (cost, &key, salt, i, j) < (*bc, bk, *bs, *bi, *bj)
                        }
                    };
                    if better {
                        best = Some((cost, i, j, key, salt));
                    }
                }
            }

            let Some((_, i, j, _, _)) = best else {
                break;
            };
            // i < j, so removing j first leaves index i valid.
            let b = pool.swap_remove(j);
            let a = pool.swap_remove(i);
            let mut c = a.contract(&b)?;
            for leg in c.legs() {
                max_bond = max_bond.max(leg.dim);
            }
            // Renormalize so intermediate magnitudes stay near 1. An exactly
            // zero intermediate simply stays zero and keeps contracting.
            let m = c.max_abs();
            if m.is_finite() && m > 0.0 {
                c.scale(1.0 / m);
                log_acc += m.ln();
            }
            pool.push(c);
        }

        // Disconnected components (and lone scalars) multiply together.
        let mut result = pool.pop().expect("nonempty pool");
        while let Some(t) = pool.pop() {
            result = result.contract(&t)?;
        }
        if result.legs().is_empty() {
            let v = result.data()[0];
            if v == 0.0 {
                sign_acc = 0;
                log_acc = f64::NEG_INFINITY;
            } else {
                if v < 0.0 {
                    sign_acc = -sign_acc;
                }
                log_acc += v.abs().ln();
                result = Tensor::scalar(1.0);
            }
        }
        Ok((
            result,
            ContractionReport {
                value_log: log_acc,
                value_sign: sign_acc,
                max_bond_reached: max_bond,
                cumulative_discarded_weight: 0.0,
            },
        ))
    }
}

fn finalize_scalar(
    scalar: f64,
    log_scale: f64,
    sign: i8,
    mut report: ContractionReport,
) -> ContractionReport {
    // `scalar` is the residual value after greedy renormalization; the
    // greedy log/sign already live in `report`.
    if scalar == 0.0 || sign == 0 || report.value_sign == 0 {
        report.value_log = f64::NEG_INFINITY;
        report.value_sign = 0;
        return report;
    }
    let mut s = report.value_sign * sign;
    if scalar < 0.0 {
        s = -s;
    }
    report.value_sign = s;
    report.value_log += scalar.abs().ln() + log_scale;
    report
}

/// Contracts a network expected to produce a plain f64 (no extreme scales).
pub fn contract_exact(tn: &TensorNetwork) -> Result<ContractionReport> {
    tn.contract_exact()
}
