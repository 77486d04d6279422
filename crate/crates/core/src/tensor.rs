//! Dense tensors with named legs.
//!
//! A tensor stores its entries row-major over an ordered list of legs; every
//! leg has a unique name within the tensor. Contraction pairs legs by name,
//! so no index bookkeeping leaks into callers. `fuse` flattens groups of legs
//! into single legs (invertible via `unfuse` given the original dims), and
//! `svd_split` factorizes a tensor across a bipartition of its legs with
//! optional rank truncation.

use crate::linalg;
use crate::{Error, Result};

/// A named tensor index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leg {
    pub name: String,
    pub dim: usize,
}

impl Leg {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Leg { name: name.into(), dim }
    }
}

/// Truncation policy for SVD splits: keep at most `max_chi` singular values,
/// and drop any singular value below `cutoff` relative to the largest one.
/// Both limits apply; whichever truncates more wins. At least one singular
/// value is always kept.
#[derive(Clone, Copy, Debug)]
pub struct TruncationSpec {
    pub max_chi: usize,
    pub cutoff: f64,
}

impl TruncationSpec {
    pub fn new(max_chi: usize, cutoff: f64) -> Result<Self> {
        if max_chi == 0 {
            return Err(Error::InvalidArgument("max_chi must be positive".into()));
        }
        if !(cutoff >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff must be non-negative, got {cutoff}"
            )));
        }
        Ok(TruncationSpec { max_chi, cutoff })
    }

    /// Rank cap only, no relative cutoff.
    pub fn rank(max_chi: usize) -> Self {
        TruncationSpec { max_chi, cutoff: 0.0 }
    }
}

/// Result of splitting a tensor across a leg bipartition.
#[derive(Clone, Debug)]
pub struct SvdSplit {
    /// Left factor; its last leg is the new bond.
    pub left: Tensor,
    /// Right factor; its first leg is the new bond.
    pub right: Tensor,
    /// Number of singular values kept.
    pub bond_dim: usize,
    /// Relative Frobenius norm of the dropped tail:
    /// sqrt(sum of dropped sigma^2) / sqrt(sum of all sigma^2).
    pub discarded_weight: f64,
}

#[derive(Clone, Debug)]
pub struct Tensor {
    legs: Vec<Leg>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor from legs and row-major data.
    pub fn new(legs: Vec<Leg>, data: Vec<f64>) -> Result<Self> {
        let mut expected = 1usize;
        for (i, leg) in legs.iter().enumerate() {
            if leg.dim == 0 {
                return Err(Error::InvalidArgument(format!(
                    "leg `{}` has zero dimension",
                    leg.name
                )));
            }
            if legs[..i].iter().any(|l| l.name == leg.name) {
                return Err(Error::DuplicateLeg(leg.name.clone()));
            }
            expected = expected.checked_mul(leg.dim).ok_or_else(|| {
                Error::InvalidArgument("tensor size overflows usize".into())
            })?;
        }
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "data length {} does not match leg dims (product {})",
                data.len(),
                expected
            )));
        }
        Ok(Tensor { legs, data })
    }

    pub fn from_legs(legs: &[(&str, usize)], data: Vec<f64>) -> Result<Self> {
        Tensor::new(
            legs.iter().map(|(n, d)| Leg::new(*n, *d)).collect(),
            data,
        )
    }

    pub fn zeros(legs: Vec<Leg>) -> Result<Self> {
        let len = legs.iter().map(|l| l.dim).product();
        Tensor::new(legs, vec![0.0; len])
    }

    /// A tensor with no legs holding a single value.
    pub fn scalar(value: f64) -> Self {
        Tensor { legs: Vec::new(), data: vec![value] }
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn order(&self) -> usize {
        self.legs.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn leg_index(&self, name: &str) -> Result<usize> {
        self.legs
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLeg(name.into()))
    }

    pub fn has_leg(&self, name: &str) -> bool {
        self.legs.iter().any(|l| l.name == name)
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        Ok(self.legs[self.leg_index(name)?].dim)
    }

    /// Value of the scalar tensor; errors if legs remain.
    pub fn scalar_value(&self) -> Result<f64> {
        if !self.legs.is_empty() {
            return Err(Error::OpenLegs(
                self.legs.iter().map(|l| l.name.clone()).collect(),
            ));
        }
        Ok(self.data[0])
    }

    pub fn rename_leg(&mut self, from: &str, to: &str) -> Result<()> {
        if from != to && self.has_leg(to) {
            return Err(Error::DuplicateLeg(to.into()));
        }
        let i = self.leg_index(from)?;
        self.legs[i].name = to.into();
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.legs.len()];
        for i in (0..self.legs.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.legs[i + 1].dim;
        }
        strides
    }

    /// Reorders legs to the given name order (a permutation of all legs).
    pub fn permute(&self, order: &[&str]) -> Result<Tensor> {
        if order.len() != self.legs.len() {
            return Err(Error::InvalidArgument(format!(
                "permutation names {} != tensor order {}",
                order.len(),
                self.legs.len()
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|n| self.leg_index(n))
            .collect::<Result<_>>()?;
        {
            let mut seen = vec![false; perm.len()];
            for &p in &perm {
                if seen[p] {
                    return Err(Error::DuplicateLeg(order[p].into()));
                }
                seen[p] = true;
            }
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let old_strides = self.strides();
        let new_legs: Vec<Leg> = perm.iter().map(|&p| self.legs[p].clone()).collect();
        let mut out = vec![0.0; self.data.len()];
        let dims: Vec<usize> = new_legs.iter().map(|l| l.dim).collect();
        let mut idx = vec![0usize; dims.len()];
        for slot in out.iter_mut() {
            let mut src = 0usize;
            for (k, &i) in idx.iter().enumerate() {
                src += i * old_strides[perm[k]];
            }
            *slot = self.data[src];
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(Tensor { legs: new_legs, data: out })
    }

    /// Fixes `leg` to `index`, removing it.
    pub fn slice(&self, leg: &str, index: usize) -> Result<Tensor> {
        let pos = self.leg_index(leg)?;
        let dim = self.legs[pos].dim;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "index {index} out of range for leg `{leg}` of dim {dim}"
            )));
        }
        let strides = self.strides();
        let mut new_legs = self.legs.clone();
        new_legs.remove(pos);
        let outer: usize = self.legs[..pos].iter().map(|l| l.dim).product();
        let inner: usize = strides[pos];
        let mut data = Vec::with_capacity(self.data.len() / dim);
        for o in 0..outer {
            let base = o * dim * inner + index * inner;
            data.extend_from_slice(&self.data[base..base + inner]);
        }
        Ok(Tensor { legs: new_legs, data })
    }

    /// Contracts all legs shared by name between `self` and `other`.
    /// With no shared legs the result is the outer product.
    pub fn contract(&self, other: &Tensor) -> Result<Tensor> {
        let shared: Vec<&str> = self
            .legs
            .iter()
            .filter(|l| other.has_leg(&l.name))
            .map(|l| l.name.as_str())
            .collect();
        for name in &shared {
            let da = self.dim_of(name)?;
            let db = other.dim_of(name)?;
            if da != db {
                return Err(Error::DimensionMismatch(format!(
                    "shared leg `{name}` has dims {da} and {db}"
                )));
            }
        }
        let free_a: Vec<&str> = self
            .legs
            .iter()
            .filter(|l| !shared.contains(&l.name.as_str()))
            .map(|l| l.name.as_str())
            .collect();
        let free_b: Vec<&str> = other
            .legs
            .iter()
            .filter(|l| !shared.contains(&l.name.as_str()))
            .map(|l| l.name.as_str())
            .collect();

        let a_order: Vec<&str> = free_a.iter().chain(shared.iter()).copied().collect();
        let b_order: Vec<&str> = shared.iter().chain(free_b.iter()).copied().collect();
        let a = self.permute(&a_order)?;
        let b = other.permute(&b_order)?;

        let m: usize = free_a
            .iter()
            .map(|n| self.dim_of(n).unwrap())
            .product();
        let kdim: usize = shared.iter().map(|n| self.dim_of(n).unwrap()).product();
        let n: usize = free_b
            .iter()
            .map(|n| other.dim_of(n).unwrap())
            .product();

        let data = linalg::matmul(a.data(), b.data(), m, kdim, n);
        let mut legs = Vec::with_capacity(free_a.len() + free_b.len());
        for name in free_a {
            legs.push(Leg::new(name, self.dim_of(name)?));
        }
        for name in free_b {
            legs.push(Leg::new(name, other.dim_of(name)?));
        }
        Tensor::new(legs, data)
    }

    /// Flattens groups of legs into single legs. `groups` must partition the
    /// tensor's legs; group order becomes the new leg order.
    pub fn fuse(&self, groups: &[(&str, &[&str])]) -> Result<Tensor> {
        let flat: Vec<&str> = groups.iter().flat_map(|(_, g)| g.iter().copied()).collect();
        if flat.len() != self.legs.len() {
            return Err(Error::InvalidArgument(format!(
                "fuse groups cover {} legs, tensor has {}",
                flat.len(),
                self.legs.len()
            )));
        }
        let permuted = self.permute(&flat)?;
        let mut legs = Vec::with_capacity(groups.len());
        for (name, members) in groups {
            let dim: usize = members
                .iter()
                .map(|m| self.dim_of(m))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .product();
            if legs.iter().any(|l: &Leg| l.name == *name) {
                return Err(Error::DuplicateLeg((*name).into()));
            }
            legs.push(Leg::new(*name, dim));
        }
        Tensor::new(legs, permuted.data)
    }

    /// Splits a fused leg back into parts; the product of part dims must
    /// equal the fused dim. Inverse of `fuse` for the same part order.
    pub fn unfuse(&self, leg: &str, parts: &[(&str, usize)]) -> Result<Tensor> {
        let pos = self.leg_index(leg)?;
        let dim = self.legs[pos].dim;
        let prod: usize = parts.iter().map(|(_, d)| d).product();
        if prod != dim {
            return Err(Error::DimensionMismatch(format!(
                "unfuse parts product {prod} != leg `{leg}` dim {dim}"
            )));
        }
        let mut legs = Vec::with_capacity(self.legs.len() + parts.len() - 1);
        legs.extend_from_slice(&self.legs[..pos]);
        for (name, d) in parts {
            legs.push(Leg::new(*name, *d));
        }
        legs.extend_from_slice(&self.legs[pos + 1..]);
        Tensor::new(legs, self.data.clone())
    }
}

/// Factorizes `t` as left x right across the bipartition (`left_legs`, rest),
/// truncating per `spec`. Singular values are split symmetrically: each
/// factor carries sqrt(sigma), keeping long alternating sweeps numerically
/// balanced. Ordering ties between equal singular values resolve by original
/// column index, so degenerate spectra truncate deterministically.
pub fn svd_split(
    t: &Tensor,
    left_legs: &[&str],
    bond_name: &str,
    spec: &TruncationSpec,
) -> Result<SvdSplit> {
    for name in left_legs {
        t.leg_index(name)?;
    }
    let right_legs: Vec<&str> = t
        .legs()
        .iter()
        .filter(|l| !left_legs.contains(&l.name.as_str()))
        .map(|l| l.name.as_str())
        .collect();
    if left_legs.is_empty() || right_legs.is_empty() {
        return Err(Error::InvalidArgument(
            "svd_split needs at least one leg on each side".into(),
        ));
    }
    if t.has_leg(bond_name) {
        return Err(Error::DuplicateLeg(bond_name.into()));
    }
    let order: Vec<&str> = left_legs.iter().chain(right_legs.iter()).copied().collect();
    let permuted = t.permute(&order)?;
    let rows: usize = left_legs.iter().map(|n| t.dim_of(n).unwrap()).product();
    let cols: usize = right_legs.iter().map(|n| t.dim_of(n).unwrap()).product();

    let fact = linalg::svd_truncated(permuted.data(), rows, cols, spec)?;
    let chi = fact.kept;

    let mut left_data = fact.u; // rows x chi
    let mut right_data = fact.vt; // chi x cols
    for (j, &s) in fact.sigma.iter().enumerate() {
        let r = s.sqrt();
        for i in 0..rows {
            left_data[i * chi + j] *= r;
        }
        for c in 0..cols {
            right_data[j * cols + c] *= r;
        }
    }

    let mut left_legs_out: Vec<Leg> = left_legs
        .iter()
        .map(|n| Leg::new(*n, t.dim_of(n).unwrap()))
        .collect();
    left_legs_out.push(Leg::new(bond_name, chi));
    let mut right_legs_out = vec![Leg::new(bond_name, chi)];
    right_legs_out.extend(
        right_legs
            .iter()
            .map(|n| Leg::new(*n, t.dim_of(n).unwrap())),
    );

    Ok(SvdSplit {
        left: Tensor::new(left_legs_out, left_data)?,
        right: Tensor::new(right_legs_out, right_data)?,
        bond_dim: chi,
        discarded_weight: fact.discarded_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent contraction oracle: explicit loops over every index
    /// assignment, no matrix reshaping.
    fn contract_oracle(a: &Tensor, b: &Tensor) -> Tensor {
        let shared: Vec<String> = a
            .legs()
            .iter()
            .filter(|l| b.has_leg(&l.name))
            .map(|l| l.name.clone())
            .collect();
        let free: Vec<Leg> = a
            .legs()
            .iter()
            .filter(|l| !shared.contains(&l.name))
            .chain(b.legs().iter().filter(|l| !shared.contains(&l.name)))
            .cloned()
            .collect();
        let decode = |mut flat: usize, dims: &[usize]| -> Vec<usize> {
            let mut idx = vec![0usize; dims.len()];
            for k in (0..dims.len()).rev() {
                idx[k] = flat % dims[k];
                flat /= dims[k];
            }
            idx
        };
        let shared_dims: Vec<usize> = shared.iter().map(|n| a.dim_of(n).unwrap()).collect();
        let free_dims: Vec<usize> = free.iter().map(|l| l.dim).collect();
        let n_shared: usize = shared_dims.iter().product();
        let n_free: usize = free_dims.iter().product();

        let lookup = |t: &Tensor, fidx: &[usize], sidx: &[usize]| -> f64 {
            let mut flat = 0usize;
            for leg in t.legs() {
                let v = if let Some(p) = free.iter().position(|f| f.name == leg.name) {
                    fidx[p]
                } else {
                    let p = shared.iter().position(|s| *s == leg.name).unwrap();
                    sidx[p]
                };
                flat = flat * leg.dim + v;
            }
            t.data()[flat]
        };

        let mut out = vec![0.0; n_free];
        for (f, slot) in out.iter_mut().enumerate() {
            let fidx = decode(f, &free_dims);
            let mut acc = 0.0;
            for s in 0..n_shared {
                let sidx = decode(s, &shared_dims);
                acc += lookup(a, &fidx, &sidx) * lookup(b, &fidx, &sidx);
            }
            *slot = acc;
        }
        Tensor::new(free, out).unwrap()
    }

    fn random_tensor(legs: &[(&str, usize)], seed: u64) -> Tensor {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let len = legs.iter().map(|(_, d)| d).product();
        let data = (0..len).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        Tensor::from_legs(legs, data).unwrap()
    }

    #[test]
    fn contract_matches_loop_oracle() {
        let a = random_tensor(&[("i", 3), ("j", 4), ("k", 2)], 1);
        let b = random_tensor(&[("j", 4), ("l", 5), ("k", 2)], 2);
        let got = a.contract(&b).unwrap();
        let want = contract_oracle(&a, &b);
        let want = want
            .permute(&got.legs().iter().map(|l| l.name.as_str()).collect::<Vec<_>>())
            .unwrap();
        assert_eq!(got.legs(), want.legs());
        for (g, w) in got.data().iter().zip(want.data()) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-13);
        }
    }

    #[test]
    fn contract_is_commutative() {
        let a = random_tensor(&[("i", 2), ("j", 3)], 3);
        let b = random_tensor(&[("j", 3), ("k", 4)], 4);
        let ab = a.contract(&b).unwrap();
        let ba = b.contract(&a).unwrap();
        let ba = ba
            .permute(&ab.legs().iter().map(|l| l.name.as_str()).collect::<Vec<_>>())
            .unwrap();
        for (x, y) in ab.data().iter().zip(ba.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn contract_tree_is_associative() {
        // A chain a-b-c with distinct bonds: both association orders agree.
        let a = random_tensor(&[("x", 2), ("ab", 3)], 5);
        let b = random_tensor(&[("ab", 3), ("bc", 4)], 6);
        let c = random_tensor(&[("bc", 4), ("y", 2)], 7);
        let left = a.contract(&b).unwrap().contract(&c).unwrap();
        let right = a.contract(&b.contract(&c).unwrap()).unwrap();
        let right = right
            .permute(&left.legs().iter().map(|l| l.name.as_str()).collect::<Vec<_>>())
            .unwrap();
        for (x, y) in left.data().iter().zip(right.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn outer_product_when_no_shared_legs() {
        let a = random_tensor(&[("i", 2)], 8);
        let b = random_tensor(&[("j", 3)], 9);
        let got = a.contract(&b).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_abs_diff_eq!(
                    got.data()[i * 3 + j],
                    a.data()[i] * b.data()[j],
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn mismatched_shared_dims_error() {
        let a = random_tensor(&[("i", 2), ("j", 3)], 10);
        let b = random_tensor(&[("j", 4)], 11);
        assert!(matches!(
            a.contract(&b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn fuse_then_unfuse_roundtrips() {
        let t = random_tensor(&[("i", 2), ("j", 3), ("k", 4)], 12);
        let fused = t.fuse(&[("ij", &["i", "j"]), ("k2", &["k"])]).unwrap();
        assert_eq!(fused.legs().len(), 2);
        assert_eq!(fused.dim_of("ij").unwrap(), 6);
        let back = fused
            .unfuse("ij", &[("i", 2), ("j", 3)])
            .unwrap()
            .unfuse("k2", &[("k", 4)])
            .unwrap();
        let back = back.permute(&["i", "j", "k"]).unwrap();
        assert_eq!(back.data(), t.data());
    }

    #[test]
    fn permute_roundtrips() {
        let t = random_tensor(&[("a", 2), ("b", 3), ("c", 4)], 13);
        let p = t.permute(&["c", "a", "b"]).unwrap();
        let back = p.permute(&["a", "b", "c"]).unwrap();
        assert_eq!(back.data(), t.data());
    }

    #[test]
    fn slice_fixes_leg() {
        let t = random_tensor(&[("a", 2), ("b", 3)], 14);
        let s = t.slice("a", 1).unwrap();
        assert_eq!(s.legs().len(), 1);
        for b in 0..3 {
            assert_eq!(s.data()[b], t.data()[3 + b]);
        }
    }

    #[test]
    fn svd_reconstructs_without_truncation() {
        let t = random_tensor(&[("i", 4), ("j", 3), ("k", 5)], 15);
        let split = svd_split(&t, &["i", "j"], "m", &TruncationSpec::rank(64)).unwrap();
        assert_eq!(split.discarded_weight, 0.0);
        let back = split.left.contract(&split.right).unwrap();
        let back = back.permute(&["i", "j", "k"]).unwrap();
        for (g, w) in back.data().iter().zip(t.data()) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn svd_split_identity_rank_two() {
        // 4x4 identity has four unit singular values; keeping two discards
        // sqrt(2)/sqrt(4) = sqrt(2)/2 of the Frobenius norm.
        let mut data = vec![0.0; 16];
        for i in 0..4 {
            data[i * 4 + i] = 1.0;
        }
        let t = Tensor::from_legs(&[("r", 4), ("c", 4)], data).unwrap();
        let split = svd_split(&t, &["r"], "m", &TruncationSpec::rank(2)).unwrap();
        assert_eq!(split.bond_dim, 2);
        assert_abs_diff_eq!(
            split.discarded_weight,
            std::f64::consts::SQRT_2 / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn svd_discarded_weight_monotone_in_chi() {
        let t = random_tensor(&[("i", 6), ("j", 6)], 16);
        let mut prev = f64::INFINITY;
        for chi in 1..=6 {
            let split = svd_split(&t, &["i"], "m", &TruncationSpec::rank(chi)).unwrap();
            assert!(split.discarded_weight <= prev + 1e-15);
            prev = split.discarded_weight;
        }
        assert_abs_diff_eq!(prev, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_cutoff_drops_small_values() {
        // Diagonal (1, 1e-3): relative cutoff 1e-2 keeps only the first.
        let t = Tensor::from_legs(&[("i", 2), ("j", 2)], vec![1.0, 0.0, 0.0, 1e-3])
            .unwrap();
        let split = svd_split(
            &t,
            &["i"],
            "m",
            &TruncationSpec::new(8, 1e-2).unwrap(),
        )
        .unwrap();
        assert_eq!(split.bond_dim, 1);
        assert_abs_diff_eq!(split.discarded_weight, 1e-3, epsilon = 1e-9);
    }

    #[test]
    fn svd_zero_tensor_keeps_rank_one_zero_factors() {
        let t = Tensor::from_legs(&[("i", 3), ("j", 2)], vec![0.0; 6]).unwrap();
        let split = svd_split(&t, &["i"], "m", &TruncationSpec::rank(2)).unwrap();
        assert_eq!(split.bond_dim, 1);
        assert_eq!(split.discarded_weight, 0.0);
        assert!(split.left.data().iter().all(|&v| v == 0.0));
        assert!(split.right.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn svd_degenerate_spectrum_truncates_deterministically() {
        // Permutation matrix: all singular values equal. Two calls must agree
        // exactly on which subspace survives.
        let mut data = vec![0.0; 25];
        for i in 0..5 {
            data[i * 5 + (i + 2) % 5] = 1.0;
        }
        let t = Tensor::from_legs(&[("i", 5), ("j", 5)], data).unwrap();
        let a = svd_split(&t, &["i"], "m", &TruncationSpec::rank(3)).unwrap();
        let b = svd_split(&t, &["i"], "m", &TruncationSpec::rank(3)).unwrap();
        assert_eq!(a.left.data(), b.left.data());
        assert_eq!(a.right.data(), b.right.data());
    }

    #[test]
    fn duplicate_leg_rejected() {
        assert!(matches!(
            Tensor::from_legs(&[("i", 2), ("i", 2)], vec![0.0; 4]),
            Err(Error::DuplicateLeg(_))
        ));
    }
}
