//! Soft-margin SVM dual solved by sequential minimal optimization with
//! maximal-violating-pair working-set selection.
//!
//! Minimises `½ αᵀQα − Σα` subject to `yᵀα = 0`, `0 ≤ α ≤ C`, with
//! `Q_ij = y_i y_j K_ij`.

use super::kernel::Gram;
use crate::error::{QsepError, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ y_i α_i K(x_i, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Final maximal KKT violation `m(α) − M(α)`.
    pub violation: f64,
}

pub fn solve_dual(gram: &Gram, y: &[i8], c: f64, tol: f64) -> Result<DualSolution> {
    let n = y.len();
    if gram.len() != n {
        return Err(QsepError::invalid("kernel matrix and label sizes differ"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(QsepError::invalid(format!("C must be > 0, got {c}")));
    }
    if !(tol > 0.0) {
        return Err(QsepError::invalid("tol must be > 0"));
    }
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let mut alpha = vec![0.0; n];
    // Gradient of the dual objective, Qα − e.
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;
    let mut violation;

    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let mut i_sel = usize::MAX;
        let mut j_sel = usize::MAX;
        for t in 0..n {
            let v = -yf[t] * grad[t];
            let up = if yf[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            let low = if yf[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if up && v > gmax {
                gmax = v;
                i_sel = t;
            }
            if low && v < gmin {
                gmin = v;
                j_sel = t;
            }
        }
        violation = gmax - gmin;
        if i_sel == usize::MAX || j_sel == usize::MAX || violation < tol || iterations >= max_iter {
            break;
        }
        iterations += 1;
        let (i, j) = (i_sel, j_sel);
        let kii = gram.get(i, i);
        let kjj = gram.get(j, j);
        let kij = gram.get(i, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kii + kjj - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let dai = (alpha[i] - old_i) * yf[i];
        let daj = (alpha[j] - old_j) * yf[j];
        let (row_i, row_j) = (gram.row(i), gram.row(j));
        for t in 0..n {
            grad[t] += yf[t] * (row_i[t] * dai + row_j[t] * daj);
        }
    }

    Ok(DualSolution {
        rho: compute_rho(&alpha, &grad, &yf, c),
        alpha,
        iterations,
        violation,
    })
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::kernel::KernelSpec;

    #[test]
    fn two_points_give_symmetric_solution() {
        let x = vec![vec![-1.0], vec![1.0]];
        let g = Gram::new(&KernelSpec::Polynomial { degree: 1, coef0: 0.0 }, &x);
        let sol = solve_dual(&g, &[-1, 1], 10.0, 1e-6).unwrap();
        // Hard margin: w = 1, α = ½ on both points, zero bias.
        assert!((sol.alpha[0] - 0.5).abs() < 1e-9);
        assert!((sol.alpha[1] - 0.5).abs() < 1e-9);
        assert!(sol.rho.abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_c() {
        let x = vec![vec![0.0], vec![1.0]];
        let g = Gram::new(&KernelSpec::Gaussian { gamma: 1.0 }, &x);
        assert!(solve_dual(&g, &[-1, 1], 0.0, 1e-3).is_err());
    }
}
