//! One-sided Jacobi SVD.
//!
//! Columns of the input are repeatedly rotated in pairs until they are
//! mutually orthogonal; their norms are then the singular values. The
//! rotations are accumulated into `V`. Chosen over bidiagonalization for its
//! simplicity and high relative accuracy; all matrices in this workspace are
//! tall and narrow, for which column sweeps are cheap.

use ndarray::{Array1, Array2};

use crate::error::{Result, SvdError};

const MAX_SWEEPS: usize = 60;
/// Pair (p, q) counts as orthogonal when |a_p . a_q| <= ORTHO_TOL * |a_p| * |a_q|.
const ORTHO_TOL: f64 = 1e-14;

/// Thin SVD of an n x m matrix with n >= m: returns (U [n x m], sigma [m], V [m x m])
/// with sigma descending and the sign of each U column fixed so that its
/// largest-magnitude entry is positive.
pub(crate) fn jacobi_svd_tall(a: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (n, m) = a.dim();
    debug_assert!(n >= m && m >= 1);

    // Work with columns stored contiguously: w[j] is column j of `a`.
    let mut w: Vec<Vec<f64>> = (0..m).map(|j| a.column(j).to_vec()).collect();
    // v[j] is column j of the accumulated V, also stored contiguously.
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        // columns whose norm is negligible against the largest are numerical
        // zeros; rotating them against each other never converges
        let max_norm_sq = w.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);
        let negligible = max_norm_sq * (f64::EPSILON * n.max(m) as f64).powi(2);
        let mut rotated = 0usize;
        for p in 0..m - 1 {
            for q in p + 1..m {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (&w[p], &w[q]);
                    let mut aa = 0.0;
                    let mut bb = 0.0;
                    let mut ab = 0.0;
                    for i in 0..n {
                        aa += wp[i] * wp[i];
                        bb += wq[i] * wq[i];
                        ab += wp[i] * wq[i];
                    }
                    (aa, bb, ab)
                };
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let limit = ORTHO_TOL * (alpha * beta).sqrt();
                if gamma.abs() <= limit || limit == 0.0 {
                    continue;
                }
                rotated += 1;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                let (head, tail) = w.split_at_mut(q);
                rotate(&mut head[p], &mut tail[0], c, s);
                let (head, tail) = v.split_at_mut(q);
                rotate(&mut head[p], &mut tail[0], c, s);
            }
        }
        if rotated == 0 {
            converged = true;
            break;
        }
    }
    if !converged && m > 1 {
        return Err(SvdError::NumericalFailure { iterations: sweeps });
    }

    // Singular values are the column norms; order them descending.
    let mut norms: Vec<f64> = w.iter().map(|col| norm(col)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let sigma_max = norms[order[0]];
    let cutoff = sigma_max * f64::EPSILON * n.max(m) as f64;

    let mut u_mat = Array2::zeros((n, m));
    let mut v_mat = Array2::zeros((m, m));
    let mut sigma = Array1::zeros(m);
    let mut deficient = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if norms[j] <= cutoff {
            norms[j] = 0.0;
            deficient.push(k);
        } else {
            for i in 0..n {
                u_mat[[i, k]] = w[j][i] / norms[j];
            }
        }
        sigma[k] = norms[j];
        for i in 0..m {
            v_mat[[i, k]] = v[j][i];
        }
    }
    if !deficient.is_empty() {
        complete_basis(&mut u_mat, &deficient);
    }
    fix_signs(&mut u_mat, &mut v_mat);
    Ok((u_mat, sigma, v_mat))
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yp) = (*x, *y);
        *x = c * xp - s * yp;
        *y = s * xp + c * yp;
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Fill the listed columns of `u` with an orthonormal completion built from
/// standard basis vectors, so that rank-deficient inputs still yield a fully
/// orthonormal U.
fn complete_basis(u: &mut Array2<f64>, columns: &[usize]) {
    let (n, m) = u.dim();
    let mut fill = columns.iter();
    let mut next = fill.next();
    for e in 0..n {
        let Some(&col) = next else { break };
        // candidate = e_e minus its projection on every existing column
        let mut cand = vec![0.0; n];
        cand[e] = 1.0;
        for j in 0..m {
            if columns.contains(&j) && j >= col {
                continue;
            }
            let proj: f64 = (0..n).map(|i| u[[i, j]] * cand[i]).sum();
            for i in 0..n {
                cand[i] -= proj * u[[i, j]];
            }
        }
        let nrm = norm(&cand);
        if nrm > 1e-3 {
            for i in 0..n {
                u[[i, col]] = cand[i] / nrm;
            }
            next = fill.next();
        }
    }
    debug_assert!(next.is_none(), "failed to complete orthonormal basis");
}

/// Deterministic sign convention: make the largest-magnitude entry of each U
/// column positive, negating the paired V column to keep the product intact.
fn fix_signs(u: &mut Array2<f64>, v: &mut Array2<f64>) {
    let (n, r) = u.dim();
    let mv = v.nrows();
    for j in 0..r {
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for i in 0..n {
            let a = u[[i, j]].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if u[[best, j]] < 0.0 {
            for i in 0..n {
                u[[i, j]] = -u[[i, j]];
            }
            for i in 0..mv {
                v[[i, j]] = -v[[i, j]];
            }
        }
    }
}
