//! Product-of-sums integrand family: f(x) = prod_i sum_j q_ji(x_j), carried
//! either as a row structure of rank-2 transfer matrices for boundary
//! contraction, or as a full tensor network of function sites joined by COPY
//! chains. Specialized constructors cover the replicated-row power family,
//! independent rows on a [lambda, 1] value range, perturbed near-power rows,
//! and a smooth sinusoid family on a Gauss-Legendre rule.

use crate::boundary::{RowSite, RowStructure};
use crate::circuit::{copy_tensor, gauss_legendre, uniform_rule, QuadratureRule};
use crate::network::TensorNetwork;
use crate::rng::SplitMix64;
use crate::tensor::Tensor;
use crate::{Error, Result};

/// A factor-sum polynomial integrand held as grid samples: `q[i][j]` is the
/// length-G value table of term j inside factor i, tabulated on the nodes of
/// `rule`. The integrand is f(x) = prod_{i<k} sum_{j<n} q[i][j](x_j) and the
/// target value is the full tensor-grid quadrature sum of f.
#[derive(Clone, Debug)]
pub struct PolynomialSpec {
    n_vars: usize,
    n_factors: usize,
    q: Vec<Vec<Vec<f64>>>,
    rule: QuadratureRule,
}

/// Perturbation and value-range parameters shared by the random family
/// constructors.
#[derive(Clone, Copy, Debug)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec { delta: 0.0, lambda: 0.0, seed: 0 }
    }
}

impl PolynomialSpec {
    pub fn new(q: Vec<Vec<Vec<f64>>>, rule: QuadratureRule) -> Result<Self> {
        let n_factors = q.len();
        if n_factors == 0 {
            return Err(Error::InvalidArgument("need at least one factor".into()));
        }
        let n_vars = q[0].len();
        if n_vars == 0 {
            return Err(Error::InvalidArgument("need at least one variable".into()));
        }
        let g = rule.len();
        for row in &q {
            if row.len() != n_vars {
                return Err(Error::DimensionMismatch(format!(
                    "factor has {} variable tables, expected {n_vars}",
                    row.len()
                )));
            }
            for table in row {
                if table.len() != g {
                    return Err(Error::DimensionMismatch(format!(
                        "value table has {} entries for a {g}-point rule",
                        table.len()
                    )));
                }
            }
        }
        Ok(PolynomialSpec { n_vars, n_factors, q, rule })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_factors(&self) -> usize {
        self.n_factors
    }

    pub fn grid_size(&self) -> usize {
        self.rule.len()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Value table of term j inside factor i.
    pub fn values(&self, factor: usize, var: usize) -> &[f64] {
        &self.q[factor][var]
    }

    /// True when every factor carries the same value tables, the premise of
    /// both the moment recursion and the exact funnel projectors.
    pub fn has_identical_factors(&self) -> bool {
        self.q.iter().all(|row| *row == self.q[0])
    }

    /// Evaluate f at a grid multi-index (one grid cell per variable).
    pub fn value_at(&self, indices: &[usize]) -> Result<f64> {
        if indices.len() != self.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "{} indices for {} variables",
                indices.len(),
                self.n_vars
            )));
        }
        let mut f = 1.0;
        for row in &self.q {
            let mut s = 0.0;
            for (j, &p) in indices.iter().enumerate() {
                s += row[j][p];
            }
            f *= s;
        }
        Ok(f)
    }
}

fn check_shape(n: usize, k: usize, g: usize) -> Result<()> {
    if n == 0 || k == 0 || g == 0 {
        return Err(Error::InvalidArgument(
            "variable count, factor count, and grid size must be positive".into(),
        ));
    }
    Ok(())
}

/// Power-law family: one random value row (uniform in [-1, 1]) replicated
/// across all k factors, so f = (sum_j q_j(x_j))^k. Uses the G-cell midpoint
/// rule on [0, 1].
pub fn make_power_polynomial(n: usize, k: usize, g: usize, seed: u64) -> Result<PolynomialSpec> {
    check_shape(n, k, g)?;
    let mut rng = SplitMix64::substream(seed, 0);
    let row: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..g).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
        .collect();
    PolynomialSpec::new(vec![row; k], uniform_rule(g, (0.0, 1.0))?)
}

/// General family: k independent value rows, entries uniform in [lambda, 1].
pub fn make_polynomial(
    n: usize,
    k: usize,
    g: usize,
    lambda: f64,
    seed: u64,
) -> Result<PolynomialSpec> {
    check_shape(n, k, g)?;
    if !(lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "value range lower bound {lambda} exceeds 1"
        )));
    }
    let mut rng = SplitMix64::substream(seed, 0);
    let q: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|_| {
            (0..n)
                .map(|_| (0..g).map(|_| rng.uniform_in(lambda, 1.0)).collect())
                .collect()
        })
        .collect();
    PolynomialSpec::new(q, uniform_rule(g, (0.0, 1.0))?)
}

/// Near-power family: factor 0 is the unperturbed base row; factors i > 0 add
/// delta times fresh uniform [-1, 1] noise. At delta = 0 the output is
/// bit-identical to `make_power_polynomial` with the same seed.
pub fn make_perturbed_polynomial(
    n: usize,
    k: usize,
    g: usize,
    delta: f64,
    seed: u64,
) -> Result<PolynomialSpec> {
    check_shape(n, k, g)?;
    let mut base_rng = SplitMix64::substream(seed, 0);
    let base: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..g).map(|_| base_rng.uniform_in(-1.0, 1.0)).collect())
        .collect();
    let mut noise = SplitMix64::substream(seed, 1);
    let mut q = Vec::with_capacity(k);
    q.push(base.clone());
    for _ in 1..k {
        let row: Vec<Vec<f64>> = base
            .iter()
            .map(|table| {
                table
                    .iter()
                    .map(|&v| v + delta * noise.uniform_in(-1.0, 1.0))
                    .collect()
            })
            .collect();
        q.push(row);
    }
    PolynomialSpec::new(q, uniform_rule(g, (0.0, 1.0))?)
}

/// Smooth family: q_ji(x) = sin(2 pi (x + a_ji)) + c with random phases a_ji
/// uniform in [0, 1], tabulated on the order-G Gauss-Legendre rule on [0, 1].
pub fn make_sin_polynomial(
    n: usize,
    k: usize,
    g: usize,
    c: f64,
    seed: u64,
) -> Result<PolynomialSpec> {
    Ok(make_sin_polynomial_with_phases(n, k, g, c, seed)?.0)
}

/// `make_sin_polynomial` plus the drawn phase table `a[i][j]`, for callers
/// that must evaluate the integrand off-grid.
pub fn make_sin_polynomial_with_phases(
    n: usize,
    k: usize,
    g: usize,
    c: f64,
    seed: u64,
) -> Result<(PolynomialSpec, Vec<Vec<f64>>)> {
    check_shape(n, k, g)?;
    let rule = gauss_legendre(g, (0.0, 1.0))?;
    let mut rng = SplitMix64::substream(seed, 0);
    let mut phases = Vec::with_capacity(k);
    let mut q = Vec::with_capacity(k);
    for _ in 0..k {
        let row_phases: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let row: Vec<Vec<f64>> = row_phases
            .iter()
            .map(|&a| rule.sample(|x| sin_term(x, a, c)))
            .collect();
        phases.push(row_phases);
        q.push(row);
    }
    Ok((PolynomialSpec::new(q, rule)?, phases))
}

/// One smooth term: sin(2 pi (x + a)) + c.
pub fn sin_term(x: f64, a: f64, c: f64) -> f64 {
    (2.0 * std::f64::consts::PI * (x + a)).sin() + c
}

/// Transfer-matrix row structure for boundary contraction. Each factor row is
/// a chain of [[1, q], [0, 1]] matrices over the grid leg, with the boundary
/// vectors [1, 0] and [0, 1]^T folded into the end columns, and the
/// quadrature weights multiplied into the bottom row.
pub fn build_polynomial_tn(spec: &PolynomialSpec) -> Result<RowStructure> {
    let n = spec.n_vars;
    let g = spec.grid_size();
    let weights = spec.rule.weights();
    let mut rows = Vec::with_capacity(spec.n_factors);
    for (i, row) in spec.q.iter().enumerate() {
        let weighted = i == spec.n_factors - 1;
        let mut sites = Vec::with_capacity(n);
        for (j, table) in row.iter().enumerate() {
            let left = if j == 0 { 1 } else { 2 };
            let right = if j == n - 1 { 1 } else { 2 };
            let mut data = vec![0.0; left * g * right];
            for (p, &q) in table.iter().enumerate() {
                let w = if weighted { weights[p] } else { 1.0 };
                match (left, right) {
                    // Interior transfer matrix [[1, q], [0, 1]].
                    (2, 2) => {
                        data[(0 * g + p) * 2 + 0] = w;
                        data[(0 * g + p) * 2 + 1] = w * q;
                        data[(1 * g + p) * 2 + 1] = w;
                    }
                    // First column folded with [1, 0]: row vector [1, q].
                    (1, 2) => {
                        data[p * 2] = w;
                        data[p * 2 + 1] = w * q;
                    }
                    // Last column folded with [0, 1]^T: column vector [q, 1].
                    (2, 1) => {
                        data[0 * g + p] = w * q;
                        data[1 * g + p] = w;
                    }
                    // Single-column row: scalar q.
                    _ => data[p] = w * q,
                }
            }
            sites.push(RowSite::new(left, g, right, data)?);
        }
        rows.push(sites);
    }
    RowStructure::new(rows)
}

fn transfer_site_tensor(
    table: &[f64],
    legs: (Option<String>, String, Option<String>),
) -> Result<Tensor> {
    let g = table.len();
    let (left, grid, right) = legs;
    let mut named: Vec<(&str, usize)> = Vec::new();
    if let Some(l) = &left {
        named.push((l, 2));
    }
    named.push((&grid, g));
    if let Some(r) = &right {
        named.push((r, 2));
    }
    let l = if left.is_some() { 2 } else { 1 };
    let r = if right.is_some() { 2 } else { 1 };
    let mut data = vec![0.0; l * g * r];
    for (p, &q) in table.iter().enumerate() {
        match (l, r) {
            (2, 2) => {
                data[(0 * g + p) * 2 + 0] = 1.0;
                data[(0 * g + p) * 2 + 1] = q;
                data[(1 * g + p) * 2 + 1] = 1.0;
            }
            (1, 2) => {
                data[p * 2] = 1.0;
                data[p * 2 + 1] = q;
            }
            (2, 1) => {
                data[0 * g + p] = q;
                data[1 * g + p] = 1.0;
            }
            _ => data[p] = q,
        }
    }
    Tensor::new(
        named
            .iter()
            .map(|(n, d)| crate::tensor::Leg::new(*n, *d))
            .collect(),
        data,
    )
}

/// Add one column's grid-sharing apparatus to `tn`: a COPY chain joining the
/// k site grid legs plus a weight leg, and the weight vector closing it.
fn add_column_copy(
    tn: &mut TensorNetwork,
    col: usize,
    k: usize,
    rule: &QuadratureRule,
) -> Result<()> {
    let g = rule.len();
    let mut legs: Vec<String> = (1..=k).map(|i| format!("g{i}.{col}")).collect();
    legs.push(format!("gw.{col}"));
    if legs.len() == 1 {
        // Single factor: the grid leg pair is just the weight vector itself,
        // renamed onto the site's grid leg.
        let w = Tensor::from_legs(&[(&legs[0], g)], rule.weights().to_vec())?;
        tn.add_tensor(w)?;
        return Ok(());
    }
    if legs.len() <= 3 {
        let refs: Vec<&str> = legs.iter().map(|s| s.as_str()).collect();
        tn.add_tensor(copy_tensor(g, &refs)?)?;
    } else {
        // Chain of arity-3 COPY pieces with internal bonds.
        let mut carried = legs[0].clone();
        for t in 0..legs.len() - 2 {
            let last = t == legs.len() - 3;
            let next = if last {
                legs[legs.len() - 1].clone()
            } else {
                format!("gb{t}.{col}")
            };
            tn.add_tensor(copy_tensor(g, &[&carried, &legs[t + 1], &next])?)?;
            carried = next;
        }
    }
    let wname = format!("gw.{col}");
    let w = Tensor::from_legs(&[(&wname, g)], rule.weights().to_vec())?;
    tn.add_tensor(w)?;
    Ok(())
}

/// Full tensor-network form of the integrand: one transfer site per (factor,
/// variable), per-column COPY chains sharing the grid variable, and weight
/// vectors closing each column. Contracting the network exactly yields the
/// same value as the row structure.
pub fn build_polynomial_network(spec: &PolynomialSpec) -> Result<TensorNetwork> {
    let n = spec.n_vars;
    let mut tn = TensorNetwork::new();
    for (i0, row) in spec.q.iter().enumerate() {
        let i = i0 + 1;
        for (j, table) in row.iter().enumerate() {
            let left = if j == 0 { None } else { Some(format!("h{i}.{}", j - 1)) };
            let right = if j == n - 1 { None } else { Some(format!("h{i}.{j}")) };
            tn.add_tensor(transfer_site_tensor(table, (left, format!("g{i}.{j}"), right))?)?;
        }
    }
    for j in 0..n {
        add_column_copy(&mut tn, j, spec.n_factors, spec.rule())?;
    }
    Ok(tn)
}

/// Exact funnel projectors for cut j of a k-factor replicated-row network.
/// P_L (dims i x 2 x (i+1)) extends the running-power bond [1, s, .., s^{i-1}]
/// by factor row i; P_R (dims (i+1) x 2 x i) is its right-side binomial
/// mirror. All entries are 0 or 1. Requires 2 <= i <= k.
pub fn exact_projectors(i: usize, j: usize, k: usize) -> Result<(Tensor, Tensor)> {
    if i < 2 || i > k {
        return Err(Error::InvalidArgument(format!(
            "projector row {i} outside 2..={k}"
        )));
    }
    let small_l = format!("fl{}.{j}", i - 1);
    let row_l = format!("hl{i}.{j}");
    let big_l = format!("fl{i}.{j}");
    let mut pl = vec![0.0; i * 2 * (i + 1)];
    for a in 0..i {
        // Pass-through on the lower row state.
        pl[(a * 2 + 0) * (i + 1) + a] = 1.0;
    }
    // Top rung: combine the highest running power with the row's q slot.
    pl[((i - 1) * 2 + 1) * (i + 1) + i] = 1.0;
    let p_l = Tensor::from_legs(&[(&small_l, i), (&row_l, 2), (&big_l, i + 1)], pl)?;

    let big_r = if i == k {
        format!("fl{k}.{j}")
    } else {
        format!("fr{i}.{j}")
    };
    let row_r = format!("hr{i}.{j}");
    let small_r = format!("fr{}.{j}", i - 1);
    let mut pr = vec![0.0; (i + 1) * 2 * i];
    for a in 0..i {
        for b in 0..2 {
            // Binomial accumulation: output slot a + row slot b feed input a+b.
            pr[((a + b) * 2 + b) * i + a] = 1.0;
        }
    }
    let p_r = Tensor::from_legs(&[(&big_r, i + 1), (&row_r, 2), (&small_r, i)], pr)?;
    Ok((p_l, p_r))
}

/// Full-network variant with the exact funnel inserted at every internal cut:
/// each factor row's horizontal bond is severed at each cut, the left stumps
/// feed the P_L chain, and the right stumps are regenerated by the P_R chain.
/// Requires identical factor rows (the funnel identity is specific to them).
pub fn build_projected_network(spec: &PolynomialSpec) -> Result<TensorNetwork> {
    if spec.n_factors < 2 {
        return Err(Error::InvalidArgument(
            "projected form needs at least two factors".into(),
        ));
    }
    if !spec.has_identical_factors() {
        return Err(Error::InvalidArgument(
            "funnel projectors require identical factor rows".into(),
        ));
    }
    let n = spec.n_vars;
    let k = spec.n_factors;
    let mut tn = TensorNetwork::new();
    for (i0, row) in spec.q.iter().enumerate() {
        let i = i0 + 1;
        for (j, table) in row.iter().enumerate() {
            // At cut j the row-1 stumps are the funnel chain endpoints; rows
            // i >= 2 feed the projector row legs.
            let left = if j == 0 {
                None
            } else if i == 1 {
                Some(format!("fr1.{}", j - 1))
            } else {
                Some(format!("hr{i}.{}", j - 1))
            };
            let right = if j == n - 1 {
                None
            } else if i == 1 {
                Some(format!("fl1.{j}"))
            } else {
                Some(format!("hl{i}.{j}"))
            };
            tn.add_tensor(transfer_site_tensor(table, (left, format!("g{i}.{j}"), right))?)?;
        }
    }
    for j in 0..n {
        add_column_copy(&mut tn, j, k, spec.rule())?;
    }
    for j in 0..n.saturating_sub(1) {
        for i in 2..=k {
            let (p_l, p_r) = exact_projectors(i, j, k)?;
            tn.add_tensor(p_l)?;
            tn.add_tensor(p_r)?;
        }
    }
    Ok(tn)
}

fn pascal_binomials(k: usize) -> Result<Vec<Vec<f64>>> {
    if k > 64 {
        return Err(Error::InvalidArgument(format!(
            "binomial table capped at order 64, got {k}"
        )));
    }
    let mut c = vec![vec![0.0; k + 1]; k + 1];
    for m in 0..=k {
        c[m][0] = 1.0;
        for t in 1..=m {
            c[m][t] = c[m - 1][t - 1] + if t <= m - 1 { c[m - 1][t] } else { 0.0 };
        }
    }
    Ok(c)
}

/// Closed-form value of a replicated-row spec by moment recursion:
/// I_j^m = sum_t C(m, t) I_{j-1}^t S_j^{m-t} with per-variable power moments
/// S_j^m = sum_p w_p q_j[p]^m. O(N k^2) time, independent of any contraction.
pub fn recursion_integral(spec: &PolynomialSpec) -> Result<f64> {
    if !spec.has_identical_factors() {
        return Err(Error::InvalidArgument(
            "moment recursion requires identical factor rows".into(),
        ));
    }
    let k = spec.n_factors;
    let weights = spec.rule().weights();
    let binom = pascal_binomials(k)?;
    // acc[m] integrates the m-th power of the running sum over the variables
    // absorbed so far; over zero variables the running sum is 0, so only the
    // zeroth power survives.
    let mut acc = vec![0.0; k + 1];
    acc[0] = 1.0;
    for j in 0..spec.n_vars {
        let table = spec.values(0, j);
        let mut moments = vec![0.0; k + 1];
        for (p, &q) in table.iter().enumerate() {
            let mut pow = weights[p];
            for m in 0..=k {
                moments[m] += pow;
                pow *= q;
            }
        }
        let mut next = vec![0.0; k + 1];
        for m in 0..=k {
            let mut s = 0.0;
            for t in 0..=m {
                s += binom[m][t] * acc[t] * moments[m - t];
            }
            next[m] = s;
        }
        acc = next;
    }
    Ok(acc[k])
}
