//! Sequential minimal optimization for the two kernel machines:
//!
//! * C-SVC:  min ½ αᵀQα − Σα   s.t. yᵀα = 0, 0 ≤ α ≤ C
//! * one-class ν-SVM:  min ½ αᵀKα   s.t. Σα = 1, 0 ≤ α ≤ 1/(νn)
//!
//! with `Q_ij = y_i y_j k(x_i, x_j)`. Each iteration updates the maximal
//! violating pair (first-order working-set selection, ties to the lower
//! index) until the KKT gap drops below the tolerance.

use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{Error, Result};

/// Denominator floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    /// KKT gap at which the solver stops.
    pub tol: f64,
    /// Iteration cap; 0 picks `max(10^7, 100 n)`.
    pub max_iter: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            tol: 1e-3,
            max_iter: 0,
        }
    }
}

pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub violation: f64,
}

/// Minimizes `½ αᵀQα + pᵀα` subject to `yᵀα = const` and
/// `0 ≤ α_i ≤ upper`, starting from the feasible `alpha`.
pub(crate) fn solve(
    gram: &[Vec<f64>],
    y: &[f64],
    p: &[f64],
    upper: f64,
    mut alpha: Vec<f64>,
    params: SmoParams,
) -> Result<DualSolution> {
    let n = y.len();
    let max_iter = if params.max_iter == 0 {
        (100 * n).max(10_000_000)
    } else {
        params.max_iter
    };
    let q = |i: usize, j: usize| y[i] * y[j] * gram[i][j];

    // G = Qα + p
    let mut grad: Vec<f64> = p.to_vec();
    for (j, &a) in alpha.iter().enumerate() {
        if a != 0.0 {
            for (i, g) in grad.iter_mut().enumerate() {
                *g += q(i, j) * a;
            }
        }
    }

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < upper) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < upper);

    let mut iterations = 0;
    let violation = loop {
        // i maximizes -y G over I_up; j maximizes y G over I_low.
        let (mut gmax, mut gmax2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let (mut wi, mut wj) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if in_up(alpha[t], y[t]) && -yg > gmax {
                gmax = -yg;
                wi = t;
            }
            if in_low(alpha[t], y[t]) && yg > gmax2 {
                gmax2 = yg;
                wj = t;
            }
        }
        let gap = gmax + gmax2;
        if wi == usize::MAX || wj == usize::MAX || gap < params.tol {
            break gap.max(0.0);
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                iterations,
                violation: gap,
            });
        }
        iterations += 1;

        let (i, j) = (wi, wj);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (upper, upper);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
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
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += q(i, k) * di + q(j, k) * dj;
        }
    };

    // Offset: mean of y G over free variables, else the midpoint of the
    // feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper {
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
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        match (ub.is_finite(), lb.is_finite()) {
            (true, true) => (ub + lb) / 2.0,
            (true, false) => ub,
            (false, true) => lb,
            (false, false) => 0.0,
        }
    };

    Ok(DualSolution {
        alpha,
        rho,
        iterations,
        violation,
    })
}

/// Binary kernel SVM. The decision value is positive for the `+1` class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` per support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    pub iterations: usize,
    pub kkt_violation: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// Dual objective `Σα − ½ ΣΣ α_i α_j y_i y_j k(x_i, x_j)` (to be
    /// maximized).
    pub fn dual_objective(&self) -> f64 {
        let linear: f64 = self.dual_coef.iter().map(|a| a.abs()).sum();
        let mut quad = 0.0;
        for (i, si) in self.support_vectors.iter().enumerate() {
            for (j, sj) in self.support_vectors.iter().enumerate() {
                quad += self.dual_coef[i] * self.dual_coef[j] * self.kernel.eval(si, sj);
            }
        }
        linear - 0.5 * quad
    }

    /// Box constraints and the equality constraint, within `eps`.
    pub fn check_dual_feasibility(&self, eps: f64) -> Result<()> {
        for (i, a) in self.dual_coef.iter().enumerate() {
            if a.abs() > self.c + eps {
                return Err(Error::data(format!("α[{i}] = {} exceeds C = {}", a.abs(), self.c)));
            }
        }
        let sum: f64 = self.dual_coef.iter().sum();
        if sum.abs() > eps {
            return Err(Error::data(format!("Σ α y = {sum:e}")));
        }
        Ok(())
    }
}

fn check_rows(rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::arg("rows and labels differ in length"));
    }
    let w = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != w || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::data("training rows must be finite and of equal width"));
    }
    Ok(())
}

/// Trains a C-SVC on labels in {−1, +1}.
pub fn smo_train(
    rows: &[Vec<f64>],
    labels: &[f64],
    kernel: Kernel,
    c: f64,
    params: SmoParams,
) -> Result<SvmModel> {
    check_rows(rows, labels.len())?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::arg(format!("C must be positive, got {c}")));
    }
    if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
        return Err(Error::arg("SVM labels must be +1 or -1"));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(Error::data("SVM training needs at least one example of each class"));
    }
    let gram = kernel.gram(rows);
    let p = vec![-1.0; rows.len()];
    let sol = solve(&gram, labels, &p, c, vec![0.0; rows.len()], params)?;
    let (mut support_vectors, mut dual_coef) = (Vec::new(), Vec::new());
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(rows[i].clone());
            dual_coef.push(a * labels[i]);
        }
    }
    Ok(SvmModel {
        support_vectors,
        dual_coef,
        bias: -sol.rho,
        kernel,
        c,
        iterations: sol.iterations,
        kkt_violation: sol.violation,
    })
}

/// One-class ν-SVM with an RBF kernel. Non-negative decision values mark
/// inliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneClassSvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub kernel: Kernel,
    pub nu: f64,
    pub train_size: usize,
    pub iterations: usize,
    pub kkt_violation: f64,
}

impl OneClassSvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alpha)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            - self.rho
    }

    pub fn upper_bound(&self) -> f64 {
        1.0 / (self.nu * self.train_size as f64)
    }

    pub fn check_dual_feasibility(&self, eps: f64) -> Result<()> {
        let ub = self.upper_bound();
        if let Some(a) = self.alpha.iter().find(|&&a| a < -eps || a > ub + eps) {
            return Err(Error::data(format!("α = {a} outside [0, {ub}]")));
        }
        let sum: f64 = self.alpha.iter().sum();
        if (sum - 1.0).abs() > eps {
            return Err(Error::data(format!("Σ α = {sum}")));
        }
        Ok(())
    }
}

pub fn ocsvm_train(
    rows: &[Vec<f64>],
    nu: f64,
    gamma: f64,
    params: SmoParams,
) -> Result<OneClassSvmModel> {
    let n = rows.len();
    check_rows(rows, n)?;
    if n < 2 {
        return Err(Error::data("one-class SVM needs at least 2 rows"));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::arg(format!("ν must lie in (0, 1], got {nu}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::arg(format!("γ must be positive, got {gamma}")));
    }
    let kernel = Kernel::Rbf { gamma };
    let upper = 1.0 / (nu * n as f64);
    // Feasible start: the first ⌊νn⌋ variables at the bound, the remainder
    // of the unit mass on the next one.
    let full = ((nu * n as f64).floor() as usize).min(n);
    let mut alpha = vec![0.0; n];
    for a in alpha.iter_mut().take(full) {
        *a = upper;
    }
    if full < n {
        alpha[full] = (1.0 - full as f64 * upper).max(0.0);
    }
    let gram = kernel.gram(rows);
    let y = vec![1.0; n];
    let sol = solve(&gram, &y, &vec![0.0; n], upper, alpha, params)?;
    let (mut support_vectors, mut coef) = (Vec::new(), Vec::new());
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(rows[i].clone());
            coef.push(a);
        }
    }
    Ok(OneClassSvmModel {
        support_vectors,
        alpha: coef,
        rho: sol.rho,
        kernel,
        nu,
        train_size: n,
        iterations: sol.iterations,
        kkt_violation: sol.violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn linear_like() -> Kernel {
        Kernel::Polynomial {
            degree: 1,
            coef0: 0.0,
            scale: 1.0,
        }
    }

    #[test]
    fn two_point_symmetry() {
        let m = smo_train(&[vec![-1.0], vec![1.0]], &[-1.0, 1.0], linear_like(), 10.0, SmoParams::default())
            .unwrap();
        assert_eq!(m.support_vectors.len(), 2);
        assert!((m.dual_coef[0] + m.dual_coef[1]).abs() < 1e-12);
        assert!((m.dual_coef[0].abs() - 0.5).abs() < 1e-9);
        assert!(m.decision(&[0.0]).abs() < 1e-9);
        assert!(m.decision(&[0.3]) > 0.0 && m.decision(&[-0.3]) < 0.0);
    }

    #[test]
    fn xor_is_separated_by_rbf() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let m = smo_train(&rows, &y, Kernel::Rbf { gamma: 1.0 }, 1e3, SmoParams::default()).unwrap();
        for (r, &l) in rows.iter().zip(&y) {
            assert!(m.decision(r) * l > 0.0);
        }
        m.check_dual_feasibility(1e-8).unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(smo_train(&rows, &[1.0, 1.0], linear_like(), 1.0, SmoParams::default()).is_err());
        assert!(smo_train(&rows, &[1.0, 0.0], linear_like(), 1.0, SmoParams::default()).is_err());
        assert!(smo_train(&rows, &[1.0, -1.0], linear_like(), 0.0, SmoParams::default()).is_err());
        assert!(ocsvm_train(&rows[..1], 0.5, 0.1, SmoParams::default()).is_err());
        assert!(ocsvm_train(&rows, 0.0, 0.1, SmoParams::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let mut r = crate::rng::stream(9, "smo-test", 0);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| StandardNormal.sample(&mut r)).collect())
            .collect();
        let y: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let err = smo_train(&rows, &y, Kernel::Rbf { gamma: 0.5 }, 10.0, SmoParams { tol: 1e-9, max_iter: 3 });
        assert!(matches!(err, Err(Error::NonConvergence { iterations: 3, .. })));
    }

    #[test]
    fn nu_one_makes_every_point_a_support_vector() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.1, (i % 3) as f64]).collect();
        let m = ocsvm_train(&rows, 1.0, 0.05, SmoParams::default()).unwrap();
        assert_eq!(m.alpha.len(), 12);
        assert!(m.alpha.iter().all(|&a| (a - 1.0 / 12.0).abs() < 1e-15));
        m.check_dual_feasibility(1e-8).unwrap();
    }

    #[test]
    fn duplicated_point_is_an_inlier() {
        let rows = vec![vec![0.3, -1.2, 2.0]; 10];
        let m = ocsvm_train(&rows, 0.5, 0.05, SmoParams::default()).unwrap();
        assert!(m.decision(&rows[0]) >= -1e-12);
        m.check_dual_feasibility(1e-8).unwrap();
    }
}
