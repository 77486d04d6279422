//! Boundary-MPS contraction of row-structured and banded networks.
//!
//! Two schedules live here. [`boundary_contract_rows`] contracts a stack of
//! k rows that share one grid variable per column: the top row seeds a
//! boundary matrix-product state, each further row multiplies in grid-
//! pointwise (the shared variable acts as a Kronecker delta down the
//! column), and the boundary is recompressed after every absorption except
//! the final one, which closes the grid legs and leaves a plain matrix
//! chain. [`boundary_contract_banded`] contracts pairwise-coupled variable
//! networks (as produced by the banded Gaussian builder) by sweeping the
//! variables in order and carrying each variable's grid index to its
//! coupling partners through a temporary carrier bond.
//!
//! Both schedules renormalize aggressively and report results in log space,
//! so integrands spanning hundreds of orders of magnitude stay representable.

use std::collections::HashMap;

use crate::linalg;
use crate::network::{ContractionReport, TensorNetwork};
use crate::tensor::{Tensor, TruncationSpec};
use crate::{Error, Result};

/// One site of a row: data indexed `(left, grid, right)` row-major.
#[derive(Clone, Debug)]
pub struct RowSite {
    left: usize,
    grid: usize,
    right: usize,
    data: Vec<f64>,
}

impl RowSite {
    pub fn new(left: usize, grid: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || grid == 0 || right == 0 {
            return Err(Error::InvalidArgument(
                "site dimensions must be positive".into(),
            ));
        }
        if data.len() != left * grid * right {
            return Err(Error::DimensionMismatch(format!(
                "site data has {} elements for shape ({left}, {grid}, {right})",
                data.len()
            )));
        }
        Ok(RowSite { left, grid, right, data })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn at(&self, l: usize, g: usize, r: usize) -> f64 {
        self.data[(l * self.grid + g) * self.right + r]
    }
}

/// A stack of rows over shared per-column grid variables. Every row has the
/// same number of columns, column grids agree across rows, horizontal bonds
/// chain within each row, and both ends of each row have bond dimension 1.
/// The bottom row is expected to carry the quadrature weights.
#[derive(Clone, Debug)]
pub struct RowStructure {
    rows: Vec<Vec<RowSite>>,
}

impl RowStructure {
    pub fn new(rows: Vec<Vec<RowSite>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidArgument("structure must be non-empty".into()));
        }
        let n = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} columns, expected {n}",
                    row.len()
                )));
            }
            if row[0].left != 1 || row[n - 1].right != 1 {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} must start and end with bond dimension 1"
                )));
            }
            for j in 0..n {
                if j + 1 < n && row[j].right != row[j + 1].left {
                    return Err(Error::DimensionMismatch(format!(
                        "row {i}: bond between columns {j} and {} mismatches",
                        j + 1
                    )));
                }
                if row[j].grid != rows[0][j].grid {
                    return Err(Error::DimensionMismatch(format!(
                        "column {j}: grid dimension differs between rows 0 and {i}"
                    )));
                }
            }
        }
        Ok(RowStructure { rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<RowSite>] {
        &self.rows
    }
}

struct CompressStats {
    max_bond: usize,
    discarded: f64,
}

/// Boundary matrix-product state: a chain of `(left, grid, right)` sites
/// with an accumulated log scale.
#[derive(Clone, Debug)]
pub struct BoundaryMps {
    sites: Vec<RowSite>,
    log_scale: f64,
}

impl BoundaryMps {
    pub fn from_sites(sites: Vec<RowSite>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("empty boundary".into()));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(Error::DimensionMismatch(
                "boundary must start and end with bond dimension 1".into(),
            ));
        }
        for j in 0..sites.len() - 1 {
            if sites[j].right != sites[j + 1].left {
                return Err(Error::DimensionMismatch(format!(
                    "bond between sites {j} and {} mismatches",
                    j + 1
                )));
            }
        }
        Ok(BoundaryMps { sites, log_scale: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Bond dimensions to the right of each site except the last.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1]
            .iter()
            .map(|s| s.right)
            .collect()
    }

    fn max_bond(&self) -> usize {
        self.sites.iter().map(|s| s.left.max(s.right)).max().unwrap_or(1)
    }

    /// Full tensor over all grid legs (tests and small cross-checks only).
    pub fn dense(&self) -> Result<Tensor> {
        let total: usize = self.sites.iter().map(|s| s.grid).product();
        if total > 1 << 22 {
            return Err(Error::InvalidArgument(format!(
                "dense expansion of {total} elements refused"
            )));
        }
        let scale = self.log_scale.exp();
        let mut acc: Vec<f64> = vec![scale]; // shape (1,) as (prefix, bond=1)
        let mut rows = 1usize; // prefix size
        for s in &self.sites {
            // acc: (rows, s.left) times site (s.left, grid*right)
            let out = linalg::matmul(&acc, &s.data, rows, s.left, s.grid * s.right);
            rows *= s.grid;
            acc = out;
        }
        let legs = self
            .sites
            .iter()
            .enumerate()
            .map(|(j, s)| crate::tensor::Leg::new(format!("g{j}"), s.grid))
            .collect();
        Tensor::new(legs, acc)
    }

    fn renorm(&mut self, j: usize) {
        let m = self.sites[j]
            .data
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        if m.is_finite() && m > 0.0 {
            for v in &mut self.sites[j].data {
                *v /= m;
            }
            self.log_scale += m.ln();
        }
    }

    /// Multiplies another row in grid-pointwise: the shared variable per
    /// column couples the boundary and the row like a Kronecker delta.
    pub fn absorb_row(&mut self, row: &[RowSite]) -> Result<()> {
        if row.len() != self.sites.len() {
            return Err(Error::DimensionMismatch(format!(
                "row has {} columns, boundary has {}",
                row.len(),
                self.sites.len()
            )));
        }
        for (j, (b, m)) in self.sites.iter_mut().zip(row).enumerate() {
            if b.grid != m.grid {
                return Err(Error::DimensionMismatch(format!(
                    "column {j}: grid {} vs {}",
                    b.grid, m.grid
                )));
            }
            let (l1, g, r1) = (b.left, b.grid, b.right);
            let (l2, r2) = (m.left, m.right);
            let mut out = vec![0.0; l1 * l2 * g * r1 * r2];
            for a in 0..l1 {
                for c in 0..l2 {
                    for p in 0..g {
                        let bv_row = (a * g + p) * r1;
                        let mv_row = (c * g + p) * r2;
                        for x in 0..r1 {
                            let bv = b.data[bv_row + x];
                            if bv == 0.0 {
                                continue;
                            }
                            let o_row = ((((a * l2 + c) * g) + p) * r1 + x) * r2;
                            for y in 0..r2 {
                                out[o_row + y] = bv * m.data[mv_row + y];
                            }
                        }
                    }
                }
            }
            *b = RowSite {
                left: l1 * l2,
                grid: g,
                right: r1 * r2,
                data: out,
            };
        }
        Ok(())
    }

    /// Two-pass compression: left-to-right QR canonicalization, then
    /// right-to-left SVD truncation under `spec`. Returns the largest bond
    /// seen and the summed discarded weight.
    fn compress_with_stats(&mut self, spec: &TruncationSpec) -> Result<CompressStats> {
        let n = self.sites.len();
        let mut max_bond = self.max_bond();
        // Left-to-right: QR each site, push R into the next.
        for j in 0..n.saturating_sub(1) {
            let s = &self.sites[j];
            let (s_left, s_grid) = (s.left, s.grid);
            let (rows, cols) = (s.left * s.grid, s.right);
            let (q, r) = linalg::qr_thin(&s.data, rows, cols);
            let k = q.len() / rows;
            let next = &self.sites[j + 1];
            let (n_grid, n_right) = (next.grid, next.right);
            let merged = linalg::matmul(&r, &next.data, k, next.left, n_grid * n_right);
            self.sites[j] = RowSite {
                left: s_left,
                grid: s_grid,
                right: k,
                data: q,
            };
            self.sites[j + 1] = RowSite {
                left: k,
                grid: n_grid,
                right: n_right,
                data: merged,
            };
            self.renorm(j + 1);
            max_bond = max_bond.max(k);
        }
        // Right-to-left: SVD each site, keep the right factor, push U*S left.
        let mut discarded = 0.0;
        for j in (1..n).rev() {
            let s = &self.sites[j];
            let (rows, cols) = (s.left, s.grid * s.right);
            let svd = linalg::svd_truncated(&s.data, rows, cols, spec)?;
            discarded += svd.discarded_weight;
            let k = svd.kept;
            // Carry U * diag(sigma) into the previous site.
            let mut us = svd.u; // rows x k
            for row in 0..rows {
                for c in 0..k {
                    us[row * k + c] *= svd.sigma[c];
                }
            }
            let (s_grid, s_right) = (s.grid, s.right);
            let prev = &self.sites[j - 1];
            let (p_left, p_grid) = (prev.left, prev.grid);
            let carried = linalg::matmul(&prev.data, &us, p_left * p_grid, prev.right, k);
            self.sites[j] = RowSite {
                left: k,
                grid: s_grid,
                right: s_right,
                data: svd.vt,
            };
            self.sites[j - 1] = RowSite {
                left: p_left,
                grid: p_grid,
                right: k,
                data: carried,
            };
            self.renorm(j - 1);
            max_bond = max_bond.max(k);
        }
        Ok(CompressStats { max_bond, discarded })
    }

    /// Public compression entry point; returns the summed discarded weight.
    pub fn compress(&mut self, spec: &TruncationSpec) -> Result<f64> {
        Ok(self.compress_with_stats(spec)?.discarded)
    }
}

/// Contracts a [`RowStructure`] top row to bottom with boundary compression
/// after every absorption except the last, then closes the grid legs and
/// multiplies out the remaining matrix chain exactly.
pub fn boundary_contract_rows(
    structure: &RowStructure,
    trunc: &TruncationSpec,
) -> Result<ContractionReport> {
    let k = structure.n_rows();
    let mut boundary = BoundaryMps::from_sites(structure.rows()[0].clone())?;
    let mut max_bond = boundary.max_bond();
    let mut discarded = 0.0;
    for i in 1..k {
        // Compress the running boundary, then absorb the next row. The state
        // after the final absorption is closed exactly, never compressed.
        if i >= 2 {
            let stats = boundary.compress_with_stats(trunc)?;
            max_bond = max_bond.max(stats.max_bond);
            discarded += stats.discarded;
        }
        boundary.absorb_row(&structure.rows()[i])?;
        max_bond = max_bond.max(boundary.max_bond());
    }

    // Close every grid leg (the bottom row already carries the weights) and
    // multiply the resulting matrix chain left to right.
    let mut log_acc = boundary.log_scale();
    let mut sign: i8 = 1;
    let mut vec_acc = vec![1.0f64]; // 1 x bond running row vector
    let mut width = 1usize;
    for s in &boundary.sites {
        let mut closed = vec![0.0; s.left * s.right];
        for l in 0..s.left {
            for p in 0..s.grid {
                for r in 0..s.right {
                    closed[l * s.right + r] += s.at(l, p, r);
                }
            }
        }
        vec_acc = linalg::matmul(&vec_acc, &closed, 1, width, s.right);
        width = s.right;
        let m = vec_acc.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if m.is_finite() && m > 0.0 {
            for v in &mut vec_acc {
                *v /= m;
            }
            log_acc += m.ln();
        }
    }
    debug_assert_eq!(width, 1);
    let residual = vec_acc[0];
    if residual == 0.0 {
        return Ok(ContractionReport {
            value_log: f64::NEG_INFINITY,
            value_sign: 0,
            max_bond_reached: max_bond,
            cumulative_discarded_weight: discarded,
        });
    }
    if residual < 0.0 {
        sign = -sign;
    }
    Ok(ContractionReport {
        value_log: log_acc + residual.abs().ln(),
        value_sign: sign,
        max_bond_reached: max_bond,
        cumulative_discarded_weight: discarded,
    })
}

/// Parsed view of a pairwise-coupled variable network.
struct CoupledNetwork {
    /// Per-variable grid vectors: all diagonal factors multiplied together.
    site_factors: Vec<Vec<f64>>,
    /// Coupling matrices keyed by (lower, higher) variable index; entry
    /// layout is row = lower variable's grid index.
    couplings: HashMap<(usize, usize), Vec<f64>>,
}

/// Leg names follow the builder convention: `x{i}.s` joins variable i's
/// value vector to its sharing hub, `x{i}.c{j}` joins hub i to the (i, j)
/// coupling matrix, and `x{i}.b{t}` are hub-internal chain bonds.
fn parse_variable(leg: &str) -> Option<usize> {
    let rest = leg.strip_prefix('x')?;
    let dot = rest.find('.')?;
    rest[..dot].parse().ok()
}

fn parse_coupled_network(tn: &TensorNetwork) -> Result<CoupledNetwork> {
    let mut n_vars = 0usize;
    for t in tn.tensors() {
        for leg in t.legs() {
            let i = parse_variable(&leg.name).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "leg `{}` does not follow the coupled-network naming convention",
                    leg.name
                ))
            })?;
            n_vars = n_vars.max(i + 1);
        }
    }
    let mut dims = vec![0usize; n_vars];
    for t in tn.tensors() {
        for leg in t.legs() {
            let i = parse_variable(&leg.name).unwrap();
            if dims[i] == 0 {
                dims[i] = leg.dim;
            } else if dims[i] != leg.dim {
                return Err(Error::DimensionMismatch(format!(
                    "variable {i} appears with grid sizes {} and {}",
                    dims[i], leg.dim
                )));
            }
        }
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidArgument(
            "variable indices must be contiguous from 0".into(),
        ));
    }

    let mut site_factors: Vec<Vec<f64>> = dims.iter().map(|&d| vec![1.0; d]).collect();
    let mut couplings = HashMap::new();
    for t in tn.tensors() {
        let vars: Vec<usize> = t
            .legs()
            .iter()
            .map(|l| parse_variable(&l.name).unwrap())
            .collect();
        let first = vars[0];
        if vars.iter().all(|&v| v == first) {
            // Diagonal factor for one variable: every leg indexes the same
            // grid, so only the full diagonal may be populated.
            let g = dims[first];
            let arity = t.legs().len();
            let mut mult = 0usize;
            let mut acc = 1usize;
            for _ in 0..arity {
                mult += acc;
                acc *= g;
            }
            for (flat, &v) in t.data().iter().enumerate() {
                if v != 0.0 && arity > 1 && flat % mult != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "tensor on variable {first} has off-diagonal entries"
                    )));
                }
            }
            for p in 0..g {
                site_factors[first][p] *= t.data()[p * mult];
            }
        } else if vars.len() == 2 && vars[0] != vars[1] {
            let (a, b) = (vars[0], vars[1]);
            let (lo, hi) = (a.min(b), a.max(b));
            // Store row-major with rows indexed by the lower variable.
            let (gl, gh) = (dims[lo], dims[hi]);
            let mut m = vec![0.0; gl * gh];
            for p in 0..gl {
                for q in 0..gh {
                    let (r, c) = if a == lo { (p, q) } else { (q, p) };
                    m[p * gh + q] = t.data()[r * t.legs()[1].dim + c];
                }
            }
            if couplings.insert((lo, hi), m).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate coupling between variables {lo} and {hi}"
                )));
            }
        } else {
            return Err(Error::InvalidArgument(
                "tensors must touch one variable (diagonal) or two (coupling)".into(),
            ));
        }
    }
    Ok(CoupledNetwork { site_factors, couplings })
}

/// Contracts a pairwise-coupled variable network (banded-Gaussian leg
/// convention) by sweeping variables in ascending order. Each step sums out
/// one variable, carrying its grid index to later coupling partners through
/// a temporary carrier bond, then recompresses the remaining chain.
pub fn boundary_contract_banded(
    tn: &TensorNetwork,
    trunc: &TruncationSpec,
) -> Result<ContractionReport> {
    let parsed = parse_coupled_network(tn)?;
    let n = parsed.site_factors.len();
    let dims: Vec<usize> = parsed.site_factors.iter().map(|u| u.len()).collect();

    // Start from the all-ones product state over the variables.
    let mut chain: Vec<RowSite> = dims
        .iter()
        .map(|&g| RowSite::new(1, g, 1, vec![1.0; g]).unwrap())
        .collect();
    let mut log_acc = tn.log_scale();
    let mut sign = tn.sign();
    let mut max_bond = 1usize;
    let mut discarded = 0.0;
    if sign == 0 {
        return Ok(ContractionReport {
            value_log: f64::NEG_INFINITY,
            value_sign: 0,
            max_bond_reached: 1,
            cumulative_discarded_weight: 0.0,
        });
    }

    for v in 0..n {
        let head = chain.remove(0);
        debug_assert_eq!(head.left, 1);
        let g = dims[v];
        // Carrier matrix over (grid value of v, right bond of the head).
        let mut carrier = vec![0.0; g * head.right];
        for c in 0..g {
            for r in 0..head.right {
                carrier[c * head.right + r] = parsed.site_factors[v][c] * head.at(0, c, r);
            }
        }
        let partners: Vec<usize> = (v + 1..n)
            .filter(|&b| parsed.couplings.contains_key(&(v, b)))
            .collect();

        if partners.is_empty() {
            // Sum the carrier out immediately and fold into the next site.
            let mut folded = vec![0.0f64; head.right];
            for c in 0..g {
                for r in 0..head.right {
                    folded[r] += carrier[c * head.right + r];
                }
            }
            if chain.is_empty() {
                debug_assert_eq!(folded.len(), 1);
                let x = folded[0];
                if x == 0.0 {
                    return Ok(ContractionReport {
                        value_log: f64::NEG_INFINITY,
                        value_sign: 0,
                        max_bond_reached: max_bond,
                        cumulative_discarded_weight: discarded,
                    });
                }
                if x < 0.0 {
                    sign = -sign;
                }
                log_acc += x.abs().ln();
            } else {
                let next = &chain[0];
                let merged =
                    linalg::matmul(&folded, &next.data, 1, next.left, next.grid * next.right);
                chain[0] = RowSite::new(1, next.grid, next.right, merged)?;
            }
        } else {
            let j_last = *partners.last().unwrap();
            // Extend sites v+1 .. j_last with the carrier bond; apply the
            // coupling matrix at coupled sites; close the carrier at j_last.
            for b in v + 1..=j_last {
                let idx = b - (v + 1);
                let s = &chain[idx];
                let k = parsed.couplings.get(&(v, b));
                let keep_carrier = b < j_last;
                let (l2, r2) = (
                    g * s.left,
                    if keep_carrier { g * s.right } else { s.right },
                );
                let mut out = vec![0.0; l2 * s.grid * r2];
                for c in 0..g {
                    for l in 0..s.left {
                        for p in 0..s.grid {
                            let factor = match k {
                                Some(m) => m[c * s.grid + p],
                                None => 1.0,
                            };
                            if factor == 0.0 {
                                continue;
                            }
                            for r in 0..s.right {
                                let val = factor * s.at(l, p, r);
                                let rr = if keep_carrier { c * s.right + r } else { r };
                                out[(((c * s.left + l) * s.grid) + p) * r2 + rr] = val;
                            }
                        }
                    }
                }
                chain[idx] = RowSite::new(l2, s.grid, r2, out)?;
            }
            max_bond = max_bond.max(chain.iter().map(|s| s.left.max(s.right)).max().unwrap());
            // Fold the carrier into the head of the extended chain.
            let next = &chain[0];
            let merged = linalg::matmul(
                &carrier,
                &next.data,
                1,
                next.left,
                next.grid * next.right,
            );
            chain[0] = RowSite::new(1, next.grid, next.right, merged)?;

            let mut mps = BoundaryMps::from_sites(std::mem::take(&mut chain))?;
            let stats = mps.compress_with_stats(trunc)?;
            max_bond = max_bond.max(stats.max_bond);
            discarded += stats.discarded;
            log_acc += mps.log_scale;
            chain = mps.sites;
        }

        // Keep magnitudes tame between steps.
        if let Some(first) = chain.first_mut() {
            let m = first.data.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if m.is_finite() && m > 0.0 {
                for x in &mut first.data {
                    *x /= m;
                }
                log_acc += m.ln();
            }
        }
    }

    Ok(ContractionReport {
        value_log: log_acc,
        value_sign: sign,
        max_bond_reached: max_bond,
        cumulative_discarded_weight: discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::tensor::Leg;
    use approx::assert_abs_diff_eq;

    fn random_site(rng: &mut SplitMix64, l: usize, g: usize, r: usize) -> RowSite {
        let data = (0..l * g * r).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        RowSite::new(l, g, r, data).unwrap()
    }

    fn random_mps(seed: u64, bonds: &[usize], g: usize) -> BoundaryMps {
        // bonds has n-1 entries for an n-site chain.
        let mut rng = SplitMix64::new(seed);
        let n = bonds.len() + 1;
        let mut sites = Vec::new();
        for j in 0..n {
            let l = if j == 0 { 1 } else { bonds[j - 1] };
            let r = if j == n - 1 { 1 } else { bonds[j] };
            sites.push(random_site(&mut rng, l, g, r));
        }
        BoundaryMps::from_sites(sites).unwrap()
    }

    fn dense_values(mps: &BoundaryMps) -> Vec<f64> {
        mps.dense().unwrap().data().to_vec()
    }

    #[test]
    fn compress_at_large_chi_preserves_dense_tensor() {
        let mut mps = random_mps(7, &[3, 4, 3], 2);
        let before = dense_values(&mps);
        let d = mps.compress(&TruncationSpec::rank(64)).unwrap();
        assert!(d < 1e-12, "lossless compression discarded {d}");
        let after = dense_values(&mps);
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn compress_caps_bonds_at_chi() {
        let mut mps = random_mps(11, &[6, 6, 6, 6], 3);
        mps.compress(&TruncationSpec::rank(2)).unwrap();
        assert!(mps.bond_dims().iter().all(|&b| b <= 2));
    }

    #[test]
    fn compress_detects_padded_low_rank() {
        // A rank-2 chain padded with zero rows to bond 5 must compress back
        // to bond <= 2 without losing anything.
        let base = random_mps(3, &[2, 2], 2);
        let mut padded_sites = Vec::new();
        for (j, s) in base.sites.iter().enumerate() {
            let l = if j == 0 { 1 } else { 5 };
            let r = if j == base.sites.len() - 1 { 1 } else { 5 };
            let mut data = vec![0.0; l * s.grid * r];
            for a in 0..s.left {
                for p in 0..s.grid {
                    for b in 0..s.right {
                        data[(a * s.grid + p) * r + b] = s.at(a, p, b);
                    }
                }
            }
            padded_sites.push(RowSite::new(l, s.grid, r, data).unwrap());
        }
        let mut padded = BoundaryMps::from_sites(padded_sites).unwrap();
        let before = dense_values(&base);
        let d = padded.compress(&TruncationSpec::new(16, 1e-14).unwrap()).unwrap();
        assert!(d < 1e-10);
        assert!(padded.bond_dims().iter().all(|&b| b <= 2), "{:?}", padded.bond_dims());
        let after = dense_values(&padded);
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-11);
        }
    }

    #[test]
    fn compress_truncation_loses_little_on_decaying_spectrum() {
        // Rank-2 chain a (x) b (x) c + eps d (x) e (x) f truncated to bond 1
        // must lose only the eps branch.
        let eps = 0.05;
        let g = 3;
        let mut rng = SplitMix64::new(17);
        let mut vecs = Vec::new();
        for _ in 0..6 {
            let v: Vec<f64> = (0..g).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            vecs.push(v);
        }
        let (a, b, c, d, e, f) = (&vecs[0], &vecs[1], &vecs[2], &vecs[3], &vecs[4], &vecs[5]);
        let mut s0 = vec![0.0; g * 2];
        let mut s1 = vec![0.0; 2 * g * 2];
        let mut s2 = vec![0.0; 2 * g];
        for p in 0..g {
            s0[p * 2] = a[p];
            s0[p * 2 + 1] = eps * d[p];
            s1[p * 2] = b[p]; // (l=0, p, r=0)
            s1[(g + p) * 2 + 1] = e[p]; // (l=1, p, r=1)
            s2[p] = c[p]; // (l=0, p)
            s2[g + p] = f[p]; // (l=1, p)
        }
        let mut mps = BoundaryMps::from_sites(vec![
            RowSite::new(1, g, 2, s0).unwrap(),
            RowSite::new(2, g, 2, s1).unwrap(),
            RowSite::new(2, g, 1, s2).unwrap(),
        ])
        .unwrap();
        let before = dense_values(&mps);
        let disc = mps.compress(&TruncationSpec::rank(1)).unwrap();
        let after = dense_values(&mps);
        let norm: f64 = before.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err: f64 = before
            .iter()
            .zip(&after)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!(mps.bond_dims().iter().all(|&bd| bd == 1));
        assert!(err / norm < 5.0 * eps, "relative error {} too large", err / norm);
        assert!(disc > 0.0, "expected a nonzero discarded weight");
    }

    /// Brute-force contraction of a row structure: sum over every grid
    /// assignment of the product over rows of the row's matrix chain.
    fn brute_force_rows(structure: &RowStructure) -> f64 {
        let n = structure.n_cols();
        let grids: Vec<usize> = (0..n).map(|j| structure.rows()[0][j].grid).collect();
        let total: usize = grids.iter().product();
        let mut sum = 0.0;
        for flat in 0..total {
            let mut rem = flat;
            let mut assign = vec![0usize; n];
            for j in (0..n).rev() {
                assign[j] = rem % grids[j];
                rem /= grids[j];
            }
            let mut prod = 1.0;
            for row in structure.rows() {
                let mut acc = vec![1.0f64];
                for (j, site) in row.iter().enumerate() {
                    let mut out = vec![0.0; site.right];
                    for l in 0..site.left {
                        for r in 0..site.right {
                            out[r] += acc[l] * site.at(l, assign[j], r);
                        }
                    }
                    acc = out;
                }
                prod *= acc[0];
            }
            sum += prod;
        }
        sum
    }

    fn random_structure(seed: u64, k: usize, n: usize, g: usize, bond: usize) -> RowStructure {
        let mut rng = SplitMix64::new(seed);
        let rows = (0..k)
            .map(|_| {
                (0..n)
                    .map(|j| {
                        let l = if j == 0 { 1 } else { bond };
                        let r = if j == n - 1 { 1 } else { bond };
                        random_site(&mut rng, l, g, r)
                    })
                    .collect()
            })
            .collect();
        RowStructure::new(rows).unwrap()
    }

    #[test]
    fn rows_contraction_matches_brute_force_untruncated() {
        for (seed, k, n, g) in [(1u64, 1usize, 4usize, 3usize), (2, 2, 3, 2), (3, 3, 3, 2)] {
            let s = random_structure(seed, k, n, g, 2);
            let want = brute_force_rows(&s);
            let got = boundary_contract_rows(&s, &TruncationSpec::rank(256)).unwrap();
            let val = got.value_sign as f64 * got.value_log.exp();
            assert_abs_diff_eq!(val, want, epsilon = 1e-10 * want.abs().max(1.0));
            assert!(got.cumulative_discarded_weight < 1e-12);
        }
    }

    #[test]
    fn rows_contraction_bond_growth_is_tracked() {
        // Three rows of bond 2: the exact closed chain reaches 2^3 = 8.
        let s = random_structure(9, 3, 4, 2, 2);
        let r = boundary_contract_rows(&s, &TruncationSpec::rank(256)).unwrap();
        assert_eq!(r.max_bond_reached, 8);
    }

    #[test]
    fn rows_truncation_reports_discarded_weight() {
        let s = random_structure(13, 4, 5, 3, 2);
        let exact = boundary_contract_rows(&s, &TruncationSpec::rank(256)).unwrap();
        let rough = boundary_contract_rows(&s, &TruncationSpec::rank(2)).unwrap();
        assert!(rough.cumulative_discarded_weight > 1e-8);
        assert!(rough.max_bond_reached < exact.max_bond_reached);
    }

    #[test]
    fn single_row_needs_no_compression() {
        let s = random_structure(21, 1, 5, 3, 2);
        let want = brute_force_rows(&s);
        let got = boundary_contract_rows(&s, &TruncationSpec::rank(1)).unwrap();
        let val = got.value_sign as f64 * got.value_log.exp();
        assert_abs_diff_eq!(val, want, epsilon = 1e-11 * want.abs().max(1.0));
        assert_eq!(got.cumulative_discarded_weight, 0.0);
    }

    /// Hand-built coupled network following the leg convention: values u_i
    /// on each variable, couplings K on chosen pairs.
    fn coupled_tn(u: &[Vec<f64>], k: &[((usize, usize), Vec<f64>)]) -> TensorNetwork {
        let mut tn = TensorNetwork::new();
        for (i, ui) in u.iter().enumerate() {
            let g = ui.len();
            // Split u_i into a value vector and a weight-diagonal so the
            // parser exercises the multi-factor path.
            let coupled: Vec<usize> = k
                .iter()
                .filter_map(|((a, b), _)| {
                    if *a == i {
                        Some(*b)
                    } else if *b == i {
                        Some(*a)
                    } else {
                        None
                    }
                })
                .collect();
            if coupled.is_empty() {
                tn.add_tensor(
                    Tensor::new(vec![Leg::new(format!("x{i}.s"), g)], ui.clone()).unwrap(),
                )
                .unwrap();
                tn.add_tensor(
                    Tensor::new(vec![Leg::new(format!("x{i}.s"), g)], vec![1.0; g]).unwrap(),
                )
                .unwrap();
            } else {
                tn.add_tensor(
                    Tensor::new(vec![Leg::new(format!("x{i}.s"), g)], ui.clone()).unwrap(),
                )
                .unwrap();
                // Diagonal hub chain: s-leg plus one leg per partner.
                let mut legs = vec![format!("x{i}.s")];
                for j in &coupled {
                    legs.push(format!("x{i}.c{j}"));
                }
                let arity = legs.len();
                let mut t = Tensor::zeros(
                    legs.iter().map(|n| Leg::new(n.clone(), g)).collect(),
                )
                .unwrap();
                let mut mult = 0usize;
                let mut acc = 1usize;
                for _ in 0..arity {
                    mult += acc;
                    acc *= g;
                }
                for p in 0..g {
                    t.data_mut()[p * mult] = 1.0;
                }
                tn.add_tensor(t).unwrap();
            }
        }
        for ((a, b), m) in k {
            let (ga, gb) = (u[*a].len(), u[*b].len());
            tn.add_tensor(
                Tensor::new(
                    vec![
                        Leg::new(format!("x{a}.c{b}"), ga),
                        Leg::new(format!("x{b}.c{a}"), gb),
                    ],
                    m.clone(),
                )
                .unwrap(),
            )
            .unwrap();
        }
        tn
    }

    fn brute_force_coupled(u: &[Vec<f64>], k: &[((usize, usize), Vec<f64>)]) -> f64 {
        let dims: Vec<usize> = u.iter().map(|v| v.len()).collect();
        let total: usize = dims.iter().product();
        let mut sum = 0.0;
        for flat in 0..total {
            let mut rem = flat;
            let mut x = vec![0usize; dims.len()];
            for j in (0..dims.len()).rev() {
                x[j] = rem % dims[j];
                rem /= dims[j];
            }
            let mut prod = 1.0;
            for (i, ui) in u.iter().enumerate() {
                prod *= ui[x[i]];
            }
            for ((a, b), m) in k {
                prod *= m[x[*a] * dims[*b] + x[*b]];
            }
            sum += prod;
        }
        sum
    }

    #[test]
    fn banded_contraction_matches_brute_force() {
        let mut rng = SplitMix64::new(99);
        let n = 5;
        let g = 3;
        let u: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..g).map(|_| rng.uniform_in(0.2, 1.5)).collect())
            .collect();
        let mut k = Vec::new();
        for i in 0..n - 1 {
            let m: Vec<f64> = (0..g * g).map(|_| rng.uniform_in(0.5, 1.5)).collect();
            k.push(((i, i + 1), m));
        }
        // One distance-2 coupling exercises the gap pass-through.
        let m: Vec<f64> = (0..g * g).map(|_| rng.uniform_in(0.5, 1.5)).collect();
        k.push(((1, 3), m));

        let tn = coupled_tn(&u, &k);
        let want = brute_force_coupled(&u, &k);
        let got = boundary_contract_banded(&tn, &TruncationSpec::rank(128)).unwrap();
        let val = got.value_sign as f64 * got.value_log.exp();
        assert_abs_diff_eq!(val, want, epsilon = 1e-10 * want.abs());
    }

    #[test]
    fn uncoupled_network_never_grows_bonds() {
        let u: Vec<Vec<f64>> = vec![
            vec![0.5, 1.0, 0.75],
            vec![0.25, 0.3, 0.9],
            vec![1.1, 0.6, 0.2],
        ];
        let tn = coupled_tn(&u, &[]);
        let got = boundary_contract_banded(&tn, &TruncationSpec::rank(64)).unwrap();
        assert_eq!(got.max_bond_reached, 1);
        let want: f64 = u.iter().map(|v| v.iter().sum::<f64>()).product();
        let val = got.value_sign as f64 * got.value_log.exp();
        assert_abs_diff_eq!(val, want, epsilon = 1e-12 * want.abs());
    }

    #[test]
    fn nearest_neighbor_couplings_need_no_bond_growth() {
        // The carrier opens and closes on the same site for distance-1
        // couplings, so even chi = 1 is exact.
        let mut rng = SplitMix64::new(5);
        let n = 5;
        let g = 3;
        let u: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..g).map(|_| rng.uniform_in(0.5, 1.0)).collect())
            .collect();
        let mut k = Vec::new();
        for i in 0..n - 1 {
            let m: Vec<f64> = (0..g * g).map(|_| rng.uniform_in(0.5, 1.5)).collect();
            k.push(((i, i + 1), m));
        }
        let tn = coupled_tn(&u, &k);
        let want = brute_force_coupled(&u, &k);
        let got = boundary_contract_banded(&tn, &TruncationSpec::rank(1)).unwrap();
        let val = got.value_sign as f64 * got.value_log.exp();
        assert_abs_diff_eq!(val, want, epsilon = 1e-11 * want.abs());
        assert!(got.cumulative_discarded_weight < 1e-13);
        assert_eq!(got.max_bond_reached, g);
    }

    #[test]
    fn banded_truncation_still_close_on_weak_coupling() {
        // Distance-2 couplings make carriers cross bonds; when the coupling
        // is a small perturbation of a constant, chi = 2 keeps the error at
        // second order in the perturbation.
        let eps = 0.05;
        let mut rng = SplitMix64::new(6);
        let n = 6;
        let g = 3;
        let u: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..g).map(|_| rng.uniform_in(0.5, 1.0)).collect())
            .collect();
        let mut k = Vec::new();
        for i in 0..n - 2 {
            let m: Vec<f64> = (0..g * g)
                .map(|_| 1.0 + eps * rng.uniform_in(-1.0, 1.0))
                .collect();
            k.push(((i, i + 2), m));
        }
        let tn = coupled_tn(&u, &k);
        let want = brute_force_coupled(&u, &k);

        let exact = boundary_contract_banded(&tn, &TruncationSpec::rank(64)).unwrap();
        let val_exact = exact.value_sign as f64 * exact.value_log.exp();
        assert_abs_diff_eq!(val_exact, want, epsilon = 1e-10 * want.abs());
        assert!(exact.max_bond_reached > 1, "carriers should cross bonds");

        let rough = boundary_contract_banded(&tn, &TruncationSpec::rank(2)).unwrap();
        let val_rough = rough.value_sign as f64 * rough.value_log.exp();
        let rel = ((val_rough - want) / want).abs();
        assert!(rel < 10.0 * eps * eps, "chi=2 error {rel} too large");
    }

    #[test]
    fn rejects_malformed_leg_names() {
        let mut tn = TensorNetwork::new();
        tn.add_tensor(Tensor::new(vec![Leg::new("y0", 2)], vec![1.0, 1.0]).unwrap())
            .unwrap();
        assert!(boundary_contract_banded(&tn, &TruncationSpec::rank(4)).is_err());
    }

    #[test]
    fn rejects_off_diagonal_hub() {
        let mut tn = TensorNetwork::new();
        let t = Tensor::from_legs(
            &[("x0.s", 2), ("x0.b0", 2)],
            vec![1.0, 0.5, 0.0, 1.0],
        )
        .unwrap();
        tn.add_tensor(t).unwrap();
        assert!(boundary_contract_banded(&tn, &TruncationSpec::rank(4)).is_err());
    }
}
