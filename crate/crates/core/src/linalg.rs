//! Internal dense linear algebra on row-major buffers.
//!
//! Thin wrappers around nalgebra that keep the rest of the crate free of
//! matrix-layout concerns. All functions take and return row-major data.

use crate::tensor::TruncationSpec;
use crate::{Error, Result};
use nalgebra::DMatrix;

pub fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let ma = DMatrix::from_row_slice(m, k, a);
    let mb = DMatrix::from_row_slice(k, n, b);
    let prod = ma * mb;
    to_row_major(&prod)
}

fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = m[(r, c)];
        }
    }
    out
}

/// Result of a truncated SVD: `u` is rows x kept, `vt` kept x cols, both
/// row-major; `sigma` holds the kept singular values in descending order.
pub struct TruncatedSvd {
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub vt: Vec<f64>,
    pub kept: usize,
    pub discarded_weight: f64,
}

/// Full SVD followed by truncation per `spec`. Ties between equal singular
/// values break toward the lower original column index so degenerate spectra
/// truncate deterministically. An all-zero matrix yields a single zero
/// singular triplet and zero discarded weight.
pub fn svd_truncated(
    data: &[f64],
    rows: usize,
    cols: usize,
    spec: &TruncationSpec,
) -> Result<TruncatedSvd> {
    debug_assert_eq!(data.len(), rows * cols);
    let m = DMatrix::from_row_slice(rows, cols, data);
    let svd = m
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let sig = &svd.singular_values;

    let mut order: Vec<usize> = (0..sig.len()).collect();
    order.sort_by(|&a, &b| {
        sig[b]
            .partial_cmp(&sig[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let total_sq: f64 = sig.iter().map(|s| s * s).sum();
    let sigma_max = sig[order[0]];
    let mut kept = 0usize;
    for &idx in order.iter().take(spec.max_chi) {
        // A zero singular value carries nothing; keeping it only pads the
        // bond. The kept >= 1 floor below still guarantees a valid factor.
        if sig[idx] <= 0.0 || (sigma_max > 0.0 && sig[idx] < spec.cutoff * sigma_max) {
            break;
        }
        kept += 1;
    }
    kept = kept.max(1);

    let dropped_sq: f64 = order[kept..].iter().map(|&i| sig[i] * sig[i]).sum();
    let discarded_weight = if total_sq > 0.0 {
        (dropped_sq / total_sq).sqrt()
    } else {
        0.0
    };

    let mut u_out = vec![0.0; rows * kept];
    let mut vt_out = vec![0.0; kept * cols];
    let mut sigma = Vec::with_capacity(kept);
    for (j, &idx) in order[..kept].iter().enumerate() {
        sigma.push(sig[idx]);
        for r in 0..rows {
            u_out[r * kept + j] = u[(r, idx)];
        }
        for c in 0..cols {
            vt_out[j * cols + c] = vt[(idx, c)];
        }
    }

    Ok(TruncatedSvd {
        u: u_out,
        sigma,
        vt: vt_out,
        kept,
        discarded_weight,
    })
}

/// Thin QR: returns (q, r) with q rows x k and r k x cols, k = min(rows, cols),
/// both row-major.
pub fn qr_thin(data: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(data.len(), rows * cols);
    let m = DMatrix::from_row_slice(rows, cols, data);
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    (to_row_major(&q), to_row_major(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = crate::rng::SplitMix64::new(21);
        let (m, k, n) = (4, 5, 3);
        let a: Vec<f64> = (0..m * k).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..k * n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let got = matmul(&a, &b, m, k, n);
        for i in 0..m {
            for j in 0..n {
                let mut want = 0.0;
                for l in 0..k {
                    want += a[i * k + l] * b[l * n + j];
                }
                assert_abs_diff_eq!(got[i * n + j], want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn qr_reconstructs_and_q_is_orthonormal() {
        let mut rng = crate::rng::SplitMix64::new(22);
        let (rows, cols) = (6, 4);
        let a: Vec<f64> = (0..rows * cols).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let (q, r) = qr_thin(&a, rows, cols);
        let k = rows.min(cols);
        let back = matmul(&q, &r, rows, k, cols);
        for (g, w) in back.iter().zip(&a) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
        // q^T q = I
        for i in 0..k {
            for j in 0..k {
                let mut dot = 0.0;
                for row in 0..rows {
                    dot += q[row * k + i] * q[row * k + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn svd_sigma_descending_and_reconstructs() {
        let mut rng = crate::rng::SplitMix64::new(23);
        let (rows, cols) = (5, 7);
        let a: Vec<f64> = (0..rows * cols).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let f = svd_truncated(&a, rows, cols, &TruncationSpec::rank(16)).unwrap();
        assert_eq!(f.kept, 5);
        for w in f.sigma.windows(2) {
            assert!(w[0] >= w[1]);
        }
        // u * diag(sigma) * vt == a
        let mut usv = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let mut acc = 0.0;
                for l in 0..f.kept {
                    acc += f.u[i * f.kept + l] * f.sigma[l] * f.vt[l * cols + j];
                }
                usv[i * cols + j] = acc;
            }
        }
        for (g, w) in usv.iter().zip(&a) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }
}
