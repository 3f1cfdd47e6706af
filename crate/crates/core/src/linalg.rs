//! Dense solvers for the small systems that arise in LM steps and OLS fits.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Matrix;
use crate::math;

/// Solves `A x = b` for symmetric positive definite `A` (row-major `n x n`).
/// Returns `None` if `A` is not numerically positive definite.
pub fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub rank: usize,
}

/// Relative pivot threshold below which a column counts as dependent.
pub const RANK_TOL: f64 = 1e-9;

/// Minimum-residual solution of `A x ~ b` via Householder QR with column
/// pivoting. Columns are normalised first; columns that fall below the rank
/// threshold (including all-zero columns) get coefficient zero.
pub fn lstsq(a: &Matrix, b: &[f64]) -> LeastSquares {
    let (n, p) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| a.column(j)).collect();
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| math::sqrt(c.iter().map(|v| v * v).sum::<f64>()))
        .collect();
    for (c, &s) in cols.iter_mut().zip(&scale) {
        if s > 0.0 {
            c.iter_mut().for_each(|v| *v /= s);
        }
    }
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut rdiag = vec![0.0; p];
    let mut rank = 0;
    let steps = n.min(p);
    for k in 0..steps {
        // pivot: largest remaining sub-column norm
        let norm_below = |c: &Vec<f64>| c[k..].iter().map(|v| v * v).sum::<f64>();
        let (best, best_norm) = (k..p)
            .map(|j| (j, norm_below(&cols[j])))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let nrm = math::sqrt(best_norm.max(0.0));
        if !(nrm > RANK_TOL) {
            break;
        }
        cols.swap(k, best);
        perm.swap(k, best);
        let x0 = cols[k][k];
        let alpha = if x0 >= 0.0 { -nrm } else { nrm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        if vtv > 0.0 {
            for c in cols.iter_mut().skip(k + 1) {
                let dot: f64 = v.iter().zip(&c[k..]).map(|(a, b)| a * b).sum();
                let f = 2.0 * dot / vtv;
                c[k..].iter_mut().zip(&v).for_each(|(ci, vi)| *ci -= f * vi);
            }
            let dot: f64 = v.iter().zip(&rhs[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vtv;
            rhs[k..]
                .iter_mut()
                .zip(&v)
                .for_each(|(ri, vi)| *ri -= f * vi);
        }
        rdiag[k] = alpha;
        rank += 1;
    }
    // back substitution on the leading rank x rank block
    let mut z = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = rhs[i];
        for j in i + 1..rank {
            s -= cols[j][i] * z[j];
        }
        z[i] = s / rdiag[i];
    }
    let mut coef = vec![0.0; p];
    for i in 0..rank {
        let j = perm[i];
        coef[j] = if scale[j] > 0.0 { z[i] / scale[j] } else { 0.0 };
    }
    LeastSquares { coef, rank }
}
