//! Levenberg-Marquardt tuning of tree parameters (memetic, Lamarckian).

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Matrix;
use crate::expr::Expr;
use crate::linalg;
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub gradient_tol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 10,
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.1,
            gradient_tol: 1e-8,
        }
    }
}

impl LmConfig {
    pub fn with_iterations(max_iterations: usize) -> Self {
        LmConfig {
            max_iterations,
            ..Self::default()
        }
    }
}

// rejected steps tried per iteration before giving up
const MAX_STEP_ATTEMPTS: usize = 12;

fn finite(v: &[f64]) -> bool {
    v.iter().all(|t| t.is_finite())
}

/// Jacobian column `d pred / d theta_j`, symbolic with a forward-difference
/// fallback when the symbolic column is not finite.
fn jacobian_column(e: &Expr, theta: &[f64], j: usize, x: &Matrix, pred: &[f64]) -> Vec<f64> {
    let col = e.param_gradient(j).eval(x);
    if finite(&col) {
        return col;
    }
    let h = 1e-7 * theta[j].abs().max(1.0);
    let mut shifted = theta.to_vec();
    shifted[j] += h;
    let Ok(e2) = e.with_params(&shifted) else {
        return vec![0.0; pred.len()];
    };
    e2.eval(x)
        .iter()
        .zip(pred)
        .map(|(a, b)| {
            let d = (a - b) / h;
            if d.is_finite() {
                d
            } else {
                0.0
            }
        })
        .collect()
}

/// Minimises `||eval(e | theta, x) - y||^2` over the parameters of `e`,
/// starting from the parameters stored in the tree. Only improving steps are
/// accepted, so the returned tree never has a larger training SSE than `e`.
/// The tree shape is preserved; only parameter values change.
pub fn optimize(e: &Expr, cfg: &LmConfig, x: &Matrix, y: &[f64]) -> Expr {
    let p = e.param_count();
    if p == 0 || cfg.max_iterations == 0 {
        return e.clone();
    }
    let mut theta = e.params();
    let mut current = e.clone();
    let mut pred = current.eval(x);
    if !finite(&pred) {
        return e.clone();
    }
    let mut sse = stats::sse(&pred, y);
    let mut lambda = cfg.initial_damping;
    let n = pred.len();

    for _ in 0..cfg.max_iterations {
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|j| jacobian_column(&current, &theta, j, x, &pred))
            .collect();
        let resid: Vec<f64> = pred.iter().zip(y).map(|(a, b)| a - b).collect();
        let grad: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().zip(&resid).map(|(a, b)| a * b).sum())
            .collect();
        if grad.iter().all(|g| g.abs() < cfg.gradient_tol) {
            break;
        }
        let mut jtj = vec![0.0; p * p];
        for a in 0..p {
            for b in a..p {
                let v: f64 = (0..n).map(|i| cols[a][i] * cols[b][i]).sum();
                jtj[a * p + b] = v;
                jtj[b * p + a] = v;
            }
        }
        let mut accepted = false;
        for _ in 0..MAX_STEP_ATTEMPTS {
            let mut m = jtj.clone();
            for d in 0..p {
                m[d * p + d] += lambda * jtj[d * p + d].max(1e-12);
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(delta) = linalg::cholesky_solve(&m, p, &rhs) else {
                lambda *= cfg.damping_up;
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
            let Ok(cand) = e.with_params(&trial) else {
                break;
            };
            let cand_pred = cand.eval(x);
            let cand_sse = stats::sse(&cand_pred, y);
            if cand_sse.is_finite() && cand_sse < sse {
                theta = trial;
                current = cand;
                pred = cand_pred;
                sse = cand_sse;
                lambda = (lambda * cfg.damping_down).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= cfg.damping_up;
        }
        if !accepted {
            break;
        }
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::UnaryFn;

    fn xs(n: usize, lo: f64, hi: f64) -> Matrix {
        let rows: Vec<[f64; 1]> = (0..n)
            .map(|i| [lo + (hi - lo) * i as f64 / (n - 1) as f64])
            .collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn linear_parameter() {
        let x = xs(20, -1.0, 2.0);
        let y: Vec<f64> = x.column(0).iter().map(|v| 3.0 * v).collect();
        let e = Expr::mul(Expr::param(1.0), Expr::var(0));
        let out = optimize(&e, &LmConfig::default(), &x, &y);
        assert!((out.params()[0] - 3.0).abs() < 1e-6, "{out}");
    }

    #[test]
    fn zero_iterations_is_identity() {
        let x = xs(5, 0.0, 1.0);
        let e = Expr::mul(Expr::param(1.0), Expr::var(0));
        assert_eq!(
            optimize(&e, &LmConfig::with_iterations(0), &x, &[1.0; 5]),
            e
        );
    }

    #[test]
    fn exponential_recovery() {
        let x = xs(50, 0.0, 4.0);
        let y: Vec<f64> = x
            .column(0)
            .iter()
            .map(|v| crate::math::exp(0.5 * v))
            .collect();
        let e = Expr::unary(UnaryFn::Exp, Expr::mul(Expr::param(0.1), Expr::var(0)));
        let out = optimize(&e, &LmConfig::with_iterations(100), &x, &y);
        assert!((out.params()[0] - 0.5).abs() < 1e-4, "{out}");
    }

    #[test]
    fn non_finite_start_is_left_alone() {
        let x = xs(5, -1.0, 1.0);
        let e = Expr::unary(UnaryFn::Log, Expr::mul(Expr::param(1.0), Expr::var(0)));
        assert_eq!(optimize(&e, &LmConfig::default(), &x, &[0.0; 5]), e);
    }
}
