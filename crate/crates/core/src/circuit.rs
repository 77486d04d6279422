//! Elementary circuit tensors and quadrature rules.
//!
//! A single-variable function enters a network as a function tensor: a grid
//! leg of dimension G (one slot per quadrature node) and, when the value
//! feeds an addition, a control leg of dimension 2 whose slice 0 is the
//! constant 1 and slice 1 holds the sampled values. Addition and
//! multiplication of function values are the 2x2x2 tensors
//!
//! * add: entry (a, b, c) = 1 iff a + b = c over the integers, so the
//!   (1, 1, *) slice is zero;
//! * mul: entry (a, b, c) = 1 iff a = b = c.
//!
//! COPY is the generalized Kronecker delta that shares one grid variable
//! among several tensors, and the modular-add tensor relates grid indices
//! z = x + y (mod G), which turns a network product into a cyclic
//! convolution. Integration over a variable contracts its grid leg with the
//! quadrature weight vector.

use crate::network::TensorNetwork;
use crate::tensor::{Leg, Tensor};
use crate::{Error, Result};

/// Nodes and weights for integrating over one interval.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates sampled values against the weights.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {}-node rule",
                samples.len(),
                self.nodes.len()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(samples)
            .map(|(w, f)| w * f)
            .sum())
    }

    /// Samples a function at the rule's nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

fn check_interval(g: usize, interval: (f64, f64)) -> Result<()> {
    if g == 0 {
        return Err(Error::InvalidArgument("rule order must be positive".into()));
    }
    if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "invalid interval [{}, {}]",
            interval.0, interval.1
        )));
    }
    Ok(())
}

/// Gauss-Legendre rule with `g` nodes on `interval`, exact for polynomials
/// of degree <= 2g - 1. Nodes are found by Newton iteration on the Legendre
/// recurrence from the Chebyshev initial guess.
pub fn gauss_legendre(g: usize, interval: (f64, f64)) -> Result<QuadratureRule> {
    check_interval(g, interval)?;
    let (lo, hi) = interval;
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let n = g as f64;
    let mut nodes = vec![0.0; g];
    let mut weights = vec![0.0; g];
    for i in 0..g.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..g {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = mid - half * z;
        nodes[g - 1 - i] = mid + half * z;
        let w = 2.0 * half / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[g - 1 - i] = w;
    }
    Ok(QuadratureRule { nodes, weights, interval })
}

/// Midpoint rule: g equal cells, node at each cell center, equal weights.
pub fn uniform_rule(g: usize, interval: (f64, f64)) -> Result<QuadratureRule> {
    check_interval(g, interval)?;
    let (lo, hi) = interval;
    let width = (hi - lo) / g as f64;
    let nodes = (0..g).map(|p| lo + (p as f64 + 0.5) * width).collect();
    let weights = vec![width; g];
    Ok(QuadratureRule { nodes, weights, interval })
}

/// Function tensor for sampled values. With a control leg the layout is
/// (grid, control) with slice 0 all ones and slice 1 the samples; without it
/// the tensor is the bare sample vector.
pub fn function_tensor(
    samples: &[f64],
    grid_leg: &str,
    control_leg: Option<&str>,
) -> Result<Tensor> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample vector".into()));
    }
    match control_leg {
        None => Tensor::new(vec![Leg::new(grid_leg, samples.len())], samples.to_vec()),
        Some(ctrl) => {
            let mut data = Vec::with_capacity(samples.len() * 2);
            for &f in samples {
                data.push(1.0);
                data.push(f);
            }
            Tensor::new(
                vec![Leg::new(grid_leg, samples.len()), Leg::new(ctrl, 2)],
                data,
            )
        }
    }
}

/// Addition tensor on control legs: entry (a, b, c) = 1 iff a + b = c as
/// integers. Fixing c = 1 leaves exactly the cross terms (0,1) and (1,0).
pub fn add_tensor(in_a: &str, in_b: &str, out: &str) -> Tensor {
    let mut data = vec![0.0; 8];
    data[0b000] = 1.0; // 0 + 0 = 0
    data[0b011] = 1.0; // 0 + 1 = 1
    data[0b101] = 1.0; // 1 + 0 = 1
    Tensor::new(
        vec![Leg::new(in_a, 2), Leg::new(in_b, 2), Leg::new(out, 2)],
        data,
    )
    .expect("static shape")
}

/// Multiplication tensor on control legs: entry (a, b, c) = 1 iff a = b = c.
pub fn mul_tensor(in_a: &str, in_b: &str, out: &str) -> Tensor {
    let mut data = vec![0.0; 8];
    data[0b000] = 1.0;
    data[0b111] = 1.0;
    Tensor::new(
        vec![Leg::new(in_a, 2), Leg::new(in_b, 2), Leg::new(out, 2)],
        data,
    )
    .expect("static shape")
}

/// COPY tensor: generalized Kronecker delta of the given dimension over
/// `legs.len()` legs (arity >= 2). Entry 1 iff all indices agree.
pub fn copy_tensor(dim: usize, legs: &[&str]) -> Result<Tensor> {
    if legs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "COPY arity must be >= 2, got {}",
            legs.len()
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("COPY dimension must be positive".into()));
    }
    let arity = legs.len();
    let mut t = Tensor::zeros(legs.iter().map(|n| Leg::new(*n, dim)).collect())?;
    // Row-major flat index of (p, p, ..., p) is p * (1 + dim + ... + dim^(arity-1)).
    let mut mult = 0usize;
    let mut acc = 1usize;
    for _ in 0..arity {
        mult += acc;
        acc *= dim;
    }
    for p in 0..dim {
        t.data_mut()[p * mult] = 1.0;
    }
    Ok(t)
}

/// CNOT tensor on control legs, laid out (in_a, in_b, out_a, out_b):
/// entry 1 iff out_a = in_a xor in_b and out_b = in_b. The first output
/// carries the parity, the second passes its input through, which is the
/// wiring that turns one shared function into f + f*g under a downstream
/// addition.
pub fn cnot_tensor(in_a: &str, in_b: &str, out_a: &str, out_b: &str) -> Tensor {
    let mut data = vec![0.0; 16];
    for a in 0..2usize {
        for b in 0..2usize {
            let oa = a ^ b;
            let ob = b;
            data[((a * 2 + b) * 2 + oa) * 2 + ob] = 1.0;
        }
    }
    Tensor::new(
        vec![
            Leg::new(in_a, 2),
            Leg::new(in_b, 2),
            Leg::new(out_a, 2),
            Leg::new(out_b, 2),
        ],
        data,
    )
    .expect("static shape")
}

/// Modular addition tensor on grid legs: entry (x, y, z) = 1 iff
/// z = x + y (mod g).
pub fn variable_add_tensor(g: usize, x: &str, y: &str, z: &str) -> Result<Tensor> {
    if g == 0 {
        return Err(Error::InvalidArgument("grid dimension must be positive".into()));
    }
    let mut t = Tensor::zeros(vec![Leg::new(x, g), Leg::new(y, g), Leg::new(z, g)])?;
    for a in 0..g {
        for b in 0..g {
            let c = (a + b) % g;
            t.data_mut()[(a * g + b) * g + c] = 1.0;
        }
    }
    Ok(t)
}

/// Contracts the quadrature weights into `leg`, integrating that variable
/// out of the tensor.
pub fn integrate_leg(t: &Tensor, leg: &str, rule: &QuadratureRule) -> Result<Tensor> {
    let dim = t.dim_of(leg)?;
    if dim != rule.len() {
        return Err(Error::DimensionMismatch(format!(
            "leg `{leg}` has dim {dim} but the rule has {} nodes",
            rule.len()
        )));
    }
    let w = Tensor::new(vec![Leg::new(leg, dim)], rule.weights().to_vec())?;
    t.contract(&w)
}

/// Network whose contraction is the cyclic convolution
/// (f * g)[y] = sum_x f[x] g[y - x mod G], built from two sample vectors and
/// one modular-add tensor; `out_leg` stays open.
pub fn convolution_network(
    f_samples: &[f64],
    g_samples: &[f64],
    out_leg: &str,
) -> Result<TensorNetwork> {
    if f_samples.len() != g_samples.len() {
        return Err(Error::DimensionMismatch(format!(
            "convolution needs equal lengths, got {} and {}",
            f_samples.len(),
            g_samples.len()
        )));
    }
    let g = f_samples.len();
    let mut tn = TensorNetwork::new();
    tn.add_tensor(function_tensor(f_samples, "conv.x", None)?)?;
    tn.add_tensor(function_tensor(g_samples, "conv.d", None)?)?;
    // z = x + d (mod G) with d the offset carried by the g samples:
    // summing over x and d with z fixed picks d = z - x, i.e. g[y - x].
    tn.add_tensor(variable_add_tensor(g, "conv.x", "conv.d", out_leg)?)?;
    Ok(tn)
}
