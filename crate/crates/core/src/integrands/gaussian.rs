//! Pairwise-coupled Gaussian integrand: Z = integral of exp(-x^T A x) over
//! the [-1, 1]^N cube under a fixed quadrature rule. The tensor network has
//! one value vector per variable, a COPY hub sharing that variable's grid
//! index with every coupling it participates in, and one coupling matrix per
//! interacting pair. Quadrature weights enter symmetrically: sqrt(w) into the
//! value vector and sqrt(w) into the hub's first diagonal piece.

use crate::circuit::QuadratureRule;
use crate::network::TensorNetwork;
use crate::rng::SplitMix64;
use crate::tensor::{Leg, Tensor};
use crate::{Error, Result};

/// Quadratic-form integrand spec. `a` is the N x N coefficient matrix in
/// row-major order; only A + A^T affects the value. `band_width` is the
/// declared band: when present, entries beyond it must vanish exactly.
#[derive(Clone, Debug)]
pub struct GaussianSpec {
    n_vars: usize,
    band_width: Option<usize>,
    a: Vec<f64>,
    rule: QuadratureRule,
}

impl GaussianSpec {
    pub fn new(
        a: Vec<f64>,
        n_vars: usize,
        band_width: Option<usize>,
        rule: QuadratureRule,
    ) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidArgument("need at least one variable".into()));
        }
        if a.len() != n_vars * n_vars {
            return Err(Error::DimensionMismatch(format!(
                "coefficient matrix has {} entries for {n_vars} variables",
                a.len()
            )));
        }
        if let Some(w) = band_width {
            for i in 0..n_vars {
                for j in 0..n_vars {
                    let dist = i.abs_diff(j);
                    if dist > w && a[i * n_vars + j] != 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "entry ({i}, {j}) is outside the declared band of width {w}"
                        )));
                    }
                }
            }
        }
        Ok(GaussianSpec { n_vars, band_width, a, rule })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn band_width(&self) -> Option<usize> {
        self.band_width
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n_vars + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn grid_size(&self) -> usize {
        self.rule.len()
    }

    /// Symmetric coupling strength between distinct variables i and j.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coefficient(i, j) + self.coefficient(j, i)
    }

    /// exp(-x^T A x) at a grid multi-index.
    pub fn value_at(&self, indices: &[usize]) -> Result<f64> {
        if indices.len() != self.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "{} indices for {} variables",
                indices.len(),
                self.n_vars
            )));
        }
        let nodes = self.rule.nodes();
        let mut form = 0.0;
        for i in 0..self.n_vars {
            for j in 0..self.n_vars {
                form += self.coefficient(i, j) * nodes[indices[i]] * nodes[indices[j]];
            }
        }
        Ok((-form).exp())
    }

    /// The spec with A replaced by its symmetric part; the value is invariant.
    pub fn symmetrized(&self) -> GaussianSpec {
        let n = self.n_vars;
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] = 0.5 * (self.a[i * n + j] + self.a[j * n + i]);
            }
        }
        GaussianSpec {
            n_vars: n,
            band_width: self.band_width,
            a: s,
            rule: self.rule.clone(),
        }
    }
}

/// Random coefficient matrix with a uniform [-1, 1] band of width `w` and
/// out-of-band entries scaled down to `delta` times uniform [-1, 1]. At
/// delta = 0 the matrix is exactly banded and the spec records the band.
pub fn make_banded_a(
    n: usize,
    w: usize,
    g: usize,
    delta: f64,
    seed: u64,
) -> Result<GaussianSpec> {
    if n == 0 || g == 0 {
        return Err(Error::InvalidArgument(
            "variable count and grid size must be positive".into(),
        ));
    }
    let mut rng = SplitMix64::substream(seed, 0);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let r = rng.uniform_in(-1.0, 1.0);
            a[i * n + j] = if i.abs_diff(j) <= w { r } else { delta * r };
        }
    }
    let band = if delta == 0.0 { Some(w) } else { None };
    GaussianSpec::new(a, n, band, crate::circuit::gauss_legendre(g, (-1.0, 1.0))?)
}

/// Diagonal COPY chain over `legs` (all of grid size g), with `first_diag`
/// multiplied into the first piece. Arity 1 gives a bare vector, arity 2 a
/// diagonal matrix, higher arities a chain of arity-3 pieces joined by
/// `bond_prefix{t}` legs.
fn diagonal_chain(
    g: usize,
    legs: &[String],
    first_diag: &[f64],
    bond_prefix: &str,
) -> Result<Vec<Tensor>> {
    let piece = |names: &[&str], diag: &[f64]| -> Result<Tensor> {
        let mut mult = 0usize;
        let mut acc = 1usize;
        for _ in 0..names.len() {
            mult += acc;
            acc *= g;
        }
        let total: usize = g.pow(names.len() as u32);
        let mut data = vec![0.0; total];
        for p in 0..g {
            data[p * mult] = diag[p];
        }
        Tensor::new(names.iter().map(|n| Leg::new(*n, g)).collect(), data)
    };
    let ones = vec![1.0; g];
    match legs.len() {
        0 => Err(Error::InvalidArgument("hub needs at least one leg".into())),
        1 => Ok(vec![piece(&[legs[0].as_str()], first_diag)?]),
        2 => Ok(vec![piece(&[legs[0].as_str(), legs[1].as_str()], first_diag)?]),
        3 => Ok(vec![piece(
            &[legs[0].as_str(), legs[1].as_str(), legs[2].as_str()],
            first_diag,
        )?]),
        m => {
            let mut out = Vec::with_capacity(m - 2);
            let mut carried = legs[0].clone();
            for t in 0..m - 2 {
                let last = t == m - 3;
                let next = if last {
                    legs[m - 1].clone()
                } else {
                    format!("{bond_prefix}{t}")
                };
                let diag = if t == 0 { first_diag } else { &ones };
                out.push(piece(&[&carried, &legs[t + 1], &next], diag)?);
                carried = next;
            }
            Ok(out)
        }
    }
}

/// Tensor network for Z: per-variable value vectors sqrt(w) exp(-A_ii x^2),
/// sqrt(w)-weighted COPY hubs, and exp(-c_ij x y) coupling matrices for each
/// pair with nonzero symmetric coupling. Legs follow the `x{i}.s` /
/// `x{i}.c{j}` / `x{i}.b{t}` convention consumed by the banded contractor.
pub fn build_gaussian_tn(spec: &GaussianSpec) -> Result<TensorNetwork> {
    let n = spec.n_vars;
    let g = spec.grid_size();
    let nodes = spec.rule.nodes();
    let weights = spec.rule.weights();
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidArgument(
            "weight split requires nonnegative quadrature weights".into(),
        ));
    }
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut tn = TensorNetwork::new();
    for i in 0..n {
        let aii = spec.coefficient(i, i);
        let site: Vec<f64> = (0..g)
            .map(|p| sqrt_w[p] * (-aii * nodes[p] * nodes[p]).exp())
            .collect();
        let sname = format!("x{i}.s");
        tn.add_tensor(Tensor::from_legs(&[(&sname, g)], site)?)?;
        let mut hub_legs = vec![sname];
        for j in 0..n {
            if j != i && spec.coupling(i, j) != 0.0 {
                hub_legs.push(format!("x{i}.c{j}"));
            }
        }
        for piece in diagonal_chain(g, &hub_legs, &sqrt_w, &format!("x{i}.b"))? {
            tn.add_tensor(piece)?;
        }
        for j in i + 1..n {
            let c = spec.coupling(i, j);
            if c != 0.0 {
                let mut data = vec![0.0; g * g];
                for p in 0..g {
                    for q in 0..g {
                        data[p * g + q] = (-c * nodes[p] * nodes[q]).exp();
                    }
                }
                let li = format!("x{i}.c{j}");
                let lj = format!("x{j}.c{i}");
                tn.add_tensor(Tensor::from_legs(&[(&li, g), (&lj, g)], data)?)?;
            }
        }
    }
    Ok(tn)
}
