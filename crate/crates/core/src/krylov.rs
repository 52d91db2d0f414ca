//! Matrix-free Krylov solvers over plain `f64` slices.

use crate::error::{MhdError, Result};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for a symmetric positive (semi-)definite operator.
///
/// Stops when `‖r‖ ≤ rtol·‖b‖`; returns the iteration count.
pub fn pcg(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precond: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> Result<usize> {
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let ax = apply(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if norm(&r) <= rtol * bnorm {
        return Ok(0);
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(MhdError::LinearSolver {
                solver: "pcg",
                iterations: it,
                residual: norm(&r) / bnorm,
            });
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = norm(&r);
        if rn <= rtol * bnorm {
            return Ok(it);
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(MhdError::LinearSolver {
        solver: "pcg",
        iterations: max_iter,
        residual: norm(&r) / bnorm,
    })
}

/// Restarted GMRES with right preconditioning, `A M⁻¹ y = b`, `x = M⁻¹ y`.
///
/// Stops when the true residual satisfies `‖b - Ax‖ ≤ rtol·‖b‖`; returns total inner iterations.
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precond: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut total = 0;
    loop {
        let ax = apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta <= rtol * bnorm {
            return Ok(total);
        }
        if total >= max_iter {
            return Err(MhdError::LinearSolver {
                solver: "gmres",
                iterations: total,
                residual: beta / bnorm,
            });
        }
        let m = restart.min(max_iter - total).max(1);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let zk = precond(&v[k]);
            let mut w = apply(&zk);
            z.push(zk);
            // modified Gram-Schmidt, twice for stability
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    h[i][k] += hij;
                    for (wj, vj) in w.iter_mut().zip(vi) {
                        *wj -= hij * vj;
                    }
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() <= 0.5 * rtol * bnorm || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / wn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * z[j][i];
            }
        }
        if k_used == 0 {
            return Err(MhdError::LinearSolver {
                solver: "gmres",
                iterations: total,
                residual: beta / bnorm,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64], shift: f64, skew: f64) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                (2.0 + shift) * x[i] - l - r + skew * (r - l)
            })
            .collect()
    }

    #[test]
    fn pcg_solves_spd_system() {
        let n = 50;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = tridiag(&xs, 0.1, 0.0);
        let mut x = vec![0.0; n];
        pcg(
            |v| tridiag(v, 0.1, 0.0),
            |r| r.to_vec(),
            &b,
            &mut x,
            1e-13,
            500,
        )
        .unwrap();
        let err = x
            .iter()
            .zip(&xs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-10);
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let n = 60;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.2).cos()).collect();
        let b = tridiag(&xs, 0.5, 0.7);
        let mut x = vec![0.0; n];
        gmres(
            |v| tridiag(v, 0.5, 0.7),
            |r| r.to_vec(),
            &b,
            &mut x,
            1e-12,
            20,
            2000,
        )
        .unwrap();
        let err = x
            .iter()
            .zip(&xs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![1.0; 4];
        assert_eq!(
            pcg(|v| v.to_vec(), |r| r.to_vec(), &[0.0; 4], &mut x, 1e-12, 10).unwrap(),
            0
        );
        assert!(x.iter().all(|v| *v == 0.0));
    }
}
