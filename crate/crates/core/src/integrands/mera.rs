//! Layered orthogonal-map integrand on a periodic binary tree: the integrand
//! is |f(x)|^2 where f expands a norm-one coefficient tensor built from
//! alternating two-site orthogonal mixers and column isometries, with per-site
//! basis {1, g(x)} for a leaf function normalized so that its weighted square
//! sums to the interval length and its weighted mean vanishes. Under that
//! normalization the per-site moment matrix is twice the identity and the
//! integral collapses to 2^N times the tensor norm, giving a closed-form
//! target the structured contraction must reproduce.

use crate::circuit::{gauss_legendre, QuadratureRule};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// One coarse-graining layer acting on `n` sites: `n/2` orthogonal mixers on
/// offset pairs (1,2), (3,4), ..., (n-1, 0), then `n/2` isometries mapping
/// site pairs (0,1), (2,3), ... to single parent sites. Mixers are 4x4
/// row-major orthogonal matrices; isometries are 4x2 row-major with
/// orthonormal columns.
#[derive(Clone, Debug)]
pub struct MeraLayer {
    pub mixers: Vec<Vec<f64>>,
    pub isometries: Vec<Vec<f64>>,
}

/// Full layered integrand spec. `layers[0]` acts on the `n_leaves` leaf
/// sites; each subsequent layer acts on half as many, stopping at two sites
/// covered by the unit-norm `top` vector (dim 4). `g` holds the leaf function
/// samples on `rule`'s nodes.
#[derive(Clone, Debug)]
pub struct MeraSpec {
    pub n_leaves: usize,
    pub layers: Vec<MeraLayer>,
    pub top: Vec<f64>,
    pub g: Vec<f64>,
    pub rule: QuadratureRule,
}

const ORTHO_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-10;

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let v = a[i * n + k];
            if v != 0.0 {
                for j in 0..n {
                    c[i * n + j] += v * b[k * n + j];
                }
            }
        }
    }
    c
}

fn max_abs_dev_from_identity(m: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[i * n + j] - want).abs());
        }
    }
    worst
}

impl MeraSpec {
    /// Weighted moment matrix [[sum w, sum w g], [sum w g, sum w g^2]].
    pub fn moment_matrix(&self) -> [f64; 4] {
        let w = self.rule.weights();
        let mut m = [0.0; 4];
        for (p, &gp) in self.g.iter().enumerate() {
            m[0] += w[p];
            m[1] += w[p] * gp;
            m[3] += w[p] * gp * gp;
        }
        m[2] = m[1];
        m
    }

    /// Structural and numerical invariants: power-of-two leaf count with a
    /// full layer stack, orthogonal mixers, isometric column maps, unit-norm
    /// top, and the leaf-function normalization (zero weighted mean, weighted
    /// square equal to the interval length 2).
    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "leaf count {n} is not a power of two at least 2"
            )));
        }
        let want_layers = n.trailing_zeros() as usize - 1;
        if self.layers.len() != want_layers {
            return Err(Error::InvalidArgument(format!(
                "{} layers for {n} leaves, expected {want_layers}",
                self.layers.len()
            )));
        }
        let mut sites = n;
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.mixers.len() != sites / 2 || layer.isometries.len() != sites / 2 {
                return Err(Error::InvalidArgument(format!(
                    "layer {l} has {} mixers and {} isometries for {sites} sites",
                    layer.mixers.len(),
                    layer.isometries.len()
                )));
            }
            for u in &layer.mixers {
                if u.len() != 16 {
                    return Err(Error::DimensionMismatch(
                        "mixer must be a 4x4 matrix".into(),
                    ));
                }
                let mut ut = vec![0.0; 16];
                for i in 0..4 {
                    for j in 0..4 {
                        ut[j * 4 + i] = u[i * 4 + j];
                    }
                }
                if max_abs_dev_from_identity(&mat_mul(u, &ut, 4), 4) > ORTHO_TOL {
                    return Err(Error::InvalidArgument(
                        "mixer is not orthogonal".into(),
                    ));
                }
            }
            for v in &layer.isometries {
                if v.len() != 8 {
                    return Err(Error::DimensionMismatch(
                        "isometry must be a 4x2 matrix".into(),
                    ));
                }
                // V^T V = I_2.
                let mut vtv = [0.0; 4];
                for c in 0..2 {
                    for c2 in 0..2 {
                        for r in 0..4 {
                            vtv[c * 2 + c2] += v[r * 2 + c] * v[r * 2 + c2];
                        }
                    }
                }
                if max_abs_dev_from_identity(&vtv, 2) > ORTHO_TOL {
                    return Err(Error::InvalidArgument(
                        "isometry columns are not orthonormal".into(),
                    ));
                }
            }
            sites /= 2;
        }
        if self.top.len() != 4 {
            return Err(Error::DimensionMismatch("top vector must have dim 4".into()));
        }
        let norm: f64 = self.top.iter().map(|v| v * v).sum();
        if (norm - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidArgument("top vector is not unit norm".into()));
        }
        if self.g.len() != self.rule.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} leaf samples for a {}-point rule",
                self.g.len(),
                self.rule.len()
            )));
        }
        let m = self.moment_matrix();
        if (m[1]).abs() > MOMENT_TOL {
            return Err(Error::InvalidArgument(format!(
                "leaf function has weighted mean {}, expected 0",
                m[1]
            )));
        }
        if (m[3] - 2.0).abs() > MOMENT_TOL {
            return Err(Error::InvalidArgument(format!(
                "leaf function has weighted square {}, expected 2",
                m[3]
            )));
        }
        Ok(())
    }
}

/// Random spec: Haar-like orthogonal mixers and isometries from
/// Gram-Schmidt on seeded Gaussian draws, a random unit top vector, and a
/// leaf function built from degree-1..3 Legendre polynomials (so its weighted
/// mean vanishes exactly under the Gauss rule) rescaled to weighted square 2.
/// Requires `g >= 4` grid points so the square is integrated exactly.
pub fn make_random_mera(n_leaves: usize, g: usize, seed: u64) -> Result<MeraSpec> {
    if n_leaves < 2 || !n_leaves.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "leaf count {n_leaves} is not a power of two at least 2"
        )));
    }
    if g < 4 {
        return Err(Error::InvalidArgument(
            "need at least 4 grid points to integrate the leaf square exactly".into(),
        ));
    }
    let rule = gauss_legendre(g, (-1.0, 1.0))?;
    let mut rng = SplitMix64::substream(seed, 0);

    // Modified Gram-Schmidt with a second pass; columns of Gaussian draws.
    let mut orthonormal_columns = |rows: usize, cols: usize| -> Vec<f64> {
        loop {
            let mut m: Vec<f64> = (0..rows * cols).map(|_| rng.normal()).collect();
            let mut ok = true;
            for c in 0..cols {
                for _pass in 0..2 {
                    for prev in 0..c {
                        let mut dot = 0.0;
                        for r in 0..rows {
                            dot += m[r * cols + c] * m[r * cols + prev];
                        }
                        for r in 0..rows {
                            m[r * cols + c] -= dot * m[r * cols + prev];
                        }
                    }
                }
                let norm: f64 = (0..rows).map(|r| m[r * cols + c].powi(2)).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    ok = false;
                    break;
                }
                for r in 0..rows {
                    m[r * cols + c] /= norm;
                }
            }
            if ok {
                return m;
            }
        }
    };

    let mut layers = Vec::new();
    let mut sites = n_leaves;
    while sites > 2 {
        let mixers = (0..sites / 2).map(|_| orthonormal_columns(4, 4)).collect();
        let isometries = (0..sites / 2).map(|_| orthonormal_columns(4, 2)).collect();
        layers.push(MeraLayer { mixers, isometries });
        sites /= 2;
    }

    let mut top: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
    let norm: f64 = top.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut top {
        *v /= norm;
    }

    // Leaf function: random combination of P_1, P_2, P_3, rescaled so the
    // weighted square is exactly 2 (the weighted mean is zero by symmetry of
    // Legendre polynomials under the exact rule).
    let samples = loop {
        let c: Vec<f64> = (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let raw = rule.sample(|x| {
            c[0] * x + c[1] * (1.5 * x * x - 0.5) + c[2] * (2.5 * x * x * x - 1.5 * x)
        });
        let s2: f64 = raw
            .iter()
            .zip(rule.weights())
            .map(|(v, w)| w * v * v)
            .sum();
        if s2 > 1e-3 {
            let scale = (2.0 / s2).sqrt();
            break raw.into_iter().map(|v| v * scale).collect::<Vec<f64>>();
        }
    };

    Ok(MeraSpec { n_leaves, layers, top, g: samples, rule })
}

fn kron2(a: &[f64; 4], b: &[f64; 4]) -> [f64; 16] {
    let mut k = [0.0; 16];
    for ia in 0..2 {
        for ib in 0..2 {
            for ja in 0..2 {
                for jb in 0..2 {
                    k[(ia * 2 + ib) * 4 + (ja * 2 + jb)] = a[ia * 2 + ja] * b[ib * 2 + jb];
                }
            }
        }
    }
    k
}

/// U^T K U for 4x4 row-major matrices.
fn sandwich4(u: &[f64], k: &[f64; 16]) -> [f64; 16] {
    let mut ku = [0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for t in 0..4 {
                s += k[i * 4 + t] * u[t * 4 + j];
            }
            ku[i * 4 + j] = s;
        }
    }
    let mut out = [0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for t in 0..4 {
                s += u[t * 4 + i] * ku[t * 4 + j];
            }
            out[i * 4 + j] = s;
        }
    }
    out
}

/// Partial traces of a pair operator J over the second and first site.
fn trace_out_second(j: &[f64; 16]) -> [f64; 4] {
    let mut a = [0.0; 4];
    for ia in 0..2 {
        for ja in 0..2 {
            for b in 0..2 {
                a[ia * 2 + ja] += j[(ia * 2 + b) * 4 + (ja * 2 + b)];
            }
        }
    }
    a
}

fn trace_out_first(j: &[f64; 16]) -> [f64; 4] {
    let mut b = [0.0; 4];
    for ib in 0..2 {
        for jb in 0..2 {
            for a in 0..2 {
                b[ib * 2 + jb] += j[(a * 2 + ib) * 4 + (a * 2 + jb)];
            }
        }
    }
    b
}

/// V^T K V for a 4x2 isometry and a 4x4 pair operator.
fn isometry_sandwich(v: &[f64], k: &[f64; 16]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for c in 0..2 {
        for c2 in 0..2 {
            let mut s = 0.0;
            for r in 0..4 {
                for r2 in 0..4 {
                    s += v[r * 2 + c] * k[r * 4 + r2] * v[r2 * 2 + c2];
                }
            }
            out[c * 2 + c2] = s;
        }
    }
    out
}

/// Structured evaluation of the integral of |f|^2: per-site moment matrices
/// are pushed through the layer stack, splitting each mixed pair operator
/// back into single-site factors (exact whenever the pair operator is a
/// product, which the leaf normalization guarantees), then closed by the top
/// vector. Validates the spec first and rejects invariant violations.
pub fn build_mera_integrand(spec: &MeraSpec) -> Result<f64> {
    spec.validate()?;
    let m = spec.moment_matrix();
    let mut ops: Vec<[f64; 4]> = vec![m; spec.n_leaves];
    for layer in &spec.layers {
        let n = ops.len();
        for (d, u) in layer.mixers.iter().enumerate() {
            let a = (2 * d + 1) % n;
            let b = (2 * d + 2) % n;
            let j = sandwich4(u, &kron2(&ops[a], &ops[b]));
            let tr = j[0] + j[5] + j[10] + j[15];
            if tr.abs() < 1e-12 {
                return Err(Error::Numeric(
                    "pair operator trace vanished during mixer split".into(),
                ));
            }
            let ja = trace_out_second(&j);
            let jb = trace_out_first(&j);
            ops[a] = [ja[0] / 2.0, ja[1] / 2.0, ja[2] / 2.0, ja[3] / 2.0];
            ops[b] = [
                2.0 * jb[0] / tr,
                2.0 * jb[1] / tr,
                2.0 * jb[2] / tr,
                2.0 * jb[3] / tr,
            ];
        }
        let mut next = Vec::with_capacity(n / 2);
        for (s, v) in layer.isometries.iter().enumerate() {
            next.push(isometry_sandwich(v, &kron2(&ops[2 * s], &ops[2 * s + 1])));
        }
        ops = next;
    }
    let k = kron2(&ops[0], &ops[1]);
    let t = &spec.top;
    let mut total = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            total += t[r] * k[r * 4 + c] * t[c];
        }
    }
    Ok(total)
}

fn apply_pair_gate(state: &[f64], m: usize, p: usize, q: usize, u: &[f64]) -> Vec<f64> {
    let dim = 1usize << m;
    let bp = m - 1 - p;
    let bq = m - 1 - q;
    let mut out = vec![0.0; dim];
    for idx in 0..dim {
        let s = state[idx];
        if s == 0.0 {
            continue;
        }
        let col = ((idx >> bp) & 1) * 2 + ((idx >> bq) & 1);
        let base = idx & !(1usize << bp) & !(1usize << bq);
        for a2 in 0..2usize {
            for b2 in 0..2usize {
                let v = u[(a2 * 2 + b2) * 4 + col];
                if v != 0.0 {
                    out[base | (a2 << bp) | (b2 << bq)] += v * s;
                }
            }
        }
    }
    out
}

/// Dense coefficient tensor of f, laid out with leaf 0 as the most
/// significant bit. Built top-down through the layer stack; only feasible for
/// small leaf counts.
pub fn amplitudes(spec: &MeraSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.n_leaves > 16 {
        return Err(Error::InvalidArgument(format!(
            "dense expansion of {} leaves is too large",
            spec.n_leaves
        )));
    }
    let mut state = spec.top.clone();
    let mut sites = 2usize;
    for layer in spec.layers.iter().rev() {
        // Isometry expansion: each parent site becomes a child pair.
        let doubled = sites * 2;
        let mut next = vec![0.0; 1usize << doubled];
        for (jdx, slot) in next.iter_mut().enumerate() {
            for (idx, &amp) in state.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let mut prod = amp;
                for s in 0..sites {
                    let parent = (idx >> (sites - 1 - s)) & 1;
                    let child0 = (jdx >> (doubled - 1 - 2 * s)) & 1;
                    let child1 = (jdx >> (doubled - 1 - (2 * s + 1))) & 1;
                    prod *= layer.isometries[s][(child0 * 2 + child1) * 2 + parent];
                    if prod == 0.0 {
                        break;
                    }
                }
                *slot += prod;
            }
        }
        state = next;
        sites = doubled;
        for (d, u) in layer.mixers.iter().enumerate() {
            let p = (2 * d + 1) % sites;
            let q = (2 * d + 2) % sites;
            state = apply_pair_gate(&state, sites, p, q, u);
        }
    }
    Ok(state)
}

/// Squared norm of the coefficient tensor via the dense route; equals 1 for
/// any valid spec since every map in the stack preserves norm.
pub fn trace_naive(spec: &MeraSpec) -> Result<f64> {
    Ok(amplitudes(spec)?.iter().map(|v| v * v).sum())
}

/// Integral of |f|^2 via the dense coefficient tensor and per-site moment
/// matrices; an independent reference for the structured route.
pub fn integrate_naive(spec: &MeraSpec) -> Result<f64> {
    let amps = amplitudes(spec)?;
    let m = spec.moment_matrix();
    let n = spec.n_leaves;
    let mut cur = amps.clone();
    for s in 0..n {
        let bit = n - 1 - s;
        let mut next = vec![0.0; cur.len()];
        for (idx, &v) in cur.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let a = (idx >> bit) & 1;
            let base = idx & !(1usize << bit);
            for a2 in 0..2usize {
                next[base | (a2 << bit)] += m[a2 * 2 + a] * v;
            }
        }
        cur = next;
    }
    Ok(amps.iter().zip(&cur).map(|(x, y)| x * y).sum())
}

/// f(x) at a grid multi-index given the precomputed dense coefficients.
pub fn value_at(spec: &MeraSpec, amps: &[f64], indices: &[usize]) -> Result<f64> {
    if indices.len() != spec.n_leaves {
        return Err(Error::DimensionMismatch(format!(
            "{} indices for {} leaves",
            indices.len(),
            spec.n_leaves
        )));
    }
    let n = spec.n_leaves;
    let mut f = 0.0;
    for (idx, &amp) in amps.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let mut prod = amp;
        for s in 0..n {
            if (idx >> (n - 1 - s)) & 1 == 1 {
                prod *= spec.g[indices[s]];
            }
        }
        f += prod;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn partial_traces_invert_kron() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.5, -1.0, 2.0, 0.25];
        let k = kron2(&a, &b);
        let ta = trace_out_second(&k);
        let tb = trace_out_first(&k);
        let tr_b = b[0] + b[3];
        let tr_a = a[0] + a[3];
        for i in 0..4 {
            assert_relative_eq!(ta[i], a[i] * tr_b, max_relative = 1e-14);
            assert_relative_eq!(tb[i], b[i] * tr_a, max_relative = 1e-14);
        }
    }

    #[test]
    fn swap_mixer_exchanges_factors() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.5, -1.0, 2.0, 0.25];
        let mut swap = vec![0.0; 16];
        swap[0 * 4 + 0] = 1.0;
        swap[1 * 4 + 2] = 1.0;
        swap[2 * 4 + 1] = 1.0;
        swap[3 * 4 + 3] = 1.0;
        let j = sandwich4(&swap, &kron2(&a, &b));
        let want = kron2(&b, &a);
        for i in 0..16 {
            assert_relative_eq!(j[i], want[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn moment_matrix_is_twice_identity() {
        let spec = make_random_mera(4, 6, 0).unwrap();
        let m = spec.moment_matrix();
        assert_relative_eq!(m[0], 2.0, max_relative = 1e-13);
        assert!(m[1].abs() < 1e-13);
        assert_relative_eq!(m[3], 2.0, max_relative = 1e-13);
    }

    #[test]
    fn smallest_tree_integrates_to_four() {
        for seed in 0..5 {
            let spec = make_random_mera(2, 5, seed).unwrap();
            let got = build_mera_integrand(&spec).unwrap();
            assert_relative_eq!(got, 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn structured_matches_naive_and_closed_form() {
        for (n, seed) in [(4usize, 1u64), (8, 2), (8, 3)] {
            let spec = make_random_mera(n, 5, seed).unwrap();
            let structured = build_mera_integrand(&spec).unwrap();
            let naive = integrate_naive(&spec).unwrap();
            let want = (2.0f64).powi(n as i32);
            assert_relative_eq!(structured, want, max_relative = 1e-11);
            assert_relative_eq!(structured, naive, max_relative = 1e-11);
        }
    }

    #[test]
    fn coefficient_tensor_has_unit_norm() {
        for n in [2usize, 4, 8] {
            let spec = make_random_mera(n, 4, 7).unwrap();
            assert_relative_eq!(trace_naive(&spec).unwrap(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn dense_value_reproduces_small_case() {
        // N = 2: f = sum_{ab} top[ab] g^a(x_0) g^b(x_1); spot-check against a
        // direct expansion at a few grid corners.
        let spec = make_random_mera(2, 4, 11).unwrap();
        let amps = amplitudes(&spec).unwrap();
        for (p, q) in [(0usize, 0usize), (1, 3), (3, 2)] {
            let g = &spec.g;
            let want = spec.top[0] + spec.top[1] * g[q] + spec.top[2] * g[p]
                + spec.top[3] * g[p] * g[q];
            let got = value_at(&spec, &amps, &[p, q]).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn broken_normalization_is_rejected() {
        let mut spec = make_random_mera(4, 5, 13).unwrap();
        for v in &mut spec.g {
            *v *= 1.2;
        }
        assert!(spec.validate().is_err());
        assert!(build_mera_integrand(&spec).is_err());
    }

    #[test]
    fn broken_orthogonality_is_rejected() {
        let mut spec = make_random_mera(4, 5, 17).unwrap();
        spec.layers[0].mixers[0][0] += 1e-6;
        assert!(build_mera_integrand(&spec).is_err());
        let mut spec2 = make_random_mera(4, 5, 17).unwrap();
        spec2.layers[0].isometries[1][3] += 1e-6;
        assert!(build_mera_integrand(&spec2).is_err());
        let mut spec3 = make_random_mera(4, 5, 17).unwrap();
        spec3.top[2] += 1e-6;
        assert!(build_mera_integrand(&spec3).is_err());
    }

    #[test]
    fn leaf_count_must_be_power_of_two() {
        assert!(make_random_mera(3, 5, 0).is_err());
        assert!(make_random_mera(0, 5, 0).is_err());
        assert!(make_random_mera(1, 5, 0).is_err());
    }

    #[test]
    fn layer_count_is_validated() {
        let mut spec = make_random_mera(8, 5, 19).unwrap();
        spec.layers.pop();
        assert!(spec.validate().is_err());
    }
}
