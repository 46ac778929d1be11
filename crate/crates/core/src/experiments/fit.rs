//! Least-squares fits of sub-threshold failure rates.
//!
//! The two-term model is
//! `P = A * ((p_bulk / t_bulk)^(L/2) + (p_bound / t_bound)^(L/2))`,
//! fitted to `ln P` with each point weighted by the binomial error of its
//! log. The scaling fit checks the `L/2` exponent on a single family.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PfailEstimate;

/// Above this the normal equations lose most of their digits.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} points with failures, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("need at least {needed} distinct distances, got {got}")]
    TooFewDistances { needed: usize, got: usize },
    #[error("fit is ill-conditioned (condition number {condition:.3e}, singular values {singular_values:?})")]
    IllConditioned { condition: f64, singular_values: Vec<f64> },
    #[error("fit did not converge after {0} iterations")]
    NoConvergence(usize),
}

/// One observation for the two-term model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub p_bulk: f64,
    pub p_bound: f64,
    pub distance: usize,
    pub estimate: PfailEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleModelFit {
    pub amplitude: f64,
    pub p_bulk_th: Option<f64>,
    pub p_bound_th: Option<f64>,
    /// Standard errors of `ln t_bulk` and `ln t_bound`.
    pub sigma_ln_bulk: Option<f64>,
    pub sigma_ln_bound: Option<f64>,
    /// Weighted residuals, in the sample order that survived filtering.
    pub residuals: Vec<f64>,
    pub chi2_per_dof: f64,
    pub condition: f64,
}

impl SimpleModelFit {
    /// Whether the boundary threshold exceeds the bulk threshold; `None`
    /// unless both terms were fitted.
    pub fn boundary_above_bulk(&self) -> Option<bool> {
        Some(self.p_bound_th? > self.p_bulk_th?)
    }
}

fn distinct_distances(samples: impl Iterator<Item = usize>) -> usize {
    let mut d: Vec<usize> = samples.collect();
    d.sort_unstable();
    d.dedup();
    d.len()
}

/// Condition number from the singular values of `j`.
fn condition(j: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let sv = j.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    (cond, sv.iter().copied().collect())
}

fn check_condition(j: &DMatrix<f64>) -> Result<f64, FitError> {
    let (cond, singular_values) = condition(j);
    if cond > MAX_CONDITION {
        return Err(FitError::IllConditioned {
            condition: cond,
            singular_values,
        });
    }
    Ok(cond)
}

struct Problem {
    half_l: Vec<f64>,
    ln_bulk: Vec<Option<f64>>,
    ln_bound: Vec<Option<f64>>,
    y: Vec<f64>,
    w: Vec<f64>,
    use_bulk: bool,
    use_bound: bool,
}

impl Problem {
    fn n_params(&self) -> usize {
        1 + usize::from(self.use_bulk) + usize::from(self.use_bound)
    }

    /// Weighted residuals and Jacobian at `theta = (ln A, [ln t_bulk], [ln t_bound])`.
    fn eval(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.y.len();
        let k = self.n_params();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, k);
        let t_bulk = self.use_bulk.then(|| theta[1]);
        let t_bound = self.use_bound.then(|| theta[k - 1]);
        for i in 0..n {
            let h = self.half_l[i];
            let a = match (self.ln_bulk[i], t_bulk) {
                (Some(x), Some(t)) => Some(h * (x - t)),
                _ => None,
            };
            let b = match (self.ln_bound[i], t_bound) {
                (Some(x), Some(t)) => Some(h * (x - t)),
                _ => None,
            };
            // log-sum-exp of the active terms
            let m = a.into_iter().chain(b).fold(f64::NEG_INFINITY, f64::max);
            let ea = a.map_or(0.0, |a| (a - m).exp());
            let eb = b.map_or(0.0, |b| (b - m).exp());
            let s = ea + eb;
            let model = theta[0] + m + s.ln();
            r[i] = self.w[i] * (self.y[i] - model);
            j[(i, 0)] = -self.w[i];
            if self.use_bulk {
                j[(i, 1)] = self.w[i] * h * ea / s;
            }
            if self.use_bound {
                j[(i, k - 1)] = self.w[i] * h * eb / s;
            }
        }
        (r, j)
    }
}

/// Levenberg-Marquardt fit of the two-term model. A term whose rate is zero
/// in every sample is left out and its threshold reported as `None`.
pub fn fit_simple_model(samples: &[FitSample]) -> Result<SimpleModelFit, FitError> {
    let kept: Vec<&FitSample> = samples
        .iter()
        .filter(|s| s.estimate.failures > 0 && s.estimate.failures < s.estimate.shots)
        .filter(|s| s.p_bulk > 0.0 || s.p_bound > 0.0)
        .collect();
    let ln = |x: f64| (x > 0.0).then(|| x.ln());
    let problem = Problem {
        half_l: kept.iter().map(|s| s.distance as f64 / 2.0).collect(),
        ln_bulk: kept.iter().map(|s| ln(s.p_bulk)).collect(),
        ln_bound: kept.iter().map(|s| ln(s.p_bound)).collect(),
        y: kept.iter().map(|s| s.estimate.p_fail.ln()).collect(),
        w: kept.iter().map(|s| 1.0 / s.estimate.log_sigma()).collect(),
        use_bulk: kept.iter().any(|s| s.p_bulk > 0.0),
        use_bound: kept.iter().any(|s| s.p_bound > 0.0),
    };
    let k = problem.n_params();
    if kept.len() <= k {
        return Err(FitError::TooFewPoints {
            needed: k + 1,
            got: kept.len(),
        });
    }
    let distances = distinct_distances(kept.iter().map(|s| s.distance));
    if distances < 2 {
        return Err(FitError::TooFewDistances { needed: 2, got: distances });
    }

    // Start each threshold a little above the largest rate seen.
    let mut theta = vec![0.0; k];
    if problem.use_bulk {
        theta[1] = problem.ln_bulk.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) + 0.5;
    }
    if problem.use_bound {
        theta[k - 1] = problem.ln_bound.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) + 0.5;
    }
    theta[0] = {
        let (r, _) = problem.eval(&theta);
        let wsum: f64 = problem.w.iter().map(|w| w * w).sum();
        r.iter().zip(&problem.w).map(|(r, w)| r * w).sum::<f64>() / wsum
    };

    const MAX_ITER: usize = 500;
    let mut lambda = 1e-3;
    let (mut r, mut j) = problem.eval(&theta);
    let mut cost = r.norm_squared();
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut a = jtj.clone();
        for d in 0..k {
            a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
        }
        let Some(step) = a.lu().solve(&(-&g)) else {
            lambda *= 10.0;
            continue;
        };
        let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let (tr, tj) = problem.eval(&trial);
        let trial_cost = tr.norm_squared();
        if trial_cost.is_finite() && trial_cost <= cost {
            let improvement = cost - trial_cost;
            theta = trial;
            r = tr;
            j = tj;
            cost = trial_cost;
            lambda = (lambda / 3.0).max(1e-12);
            if improvement <= 1e-12 * (1.0 + cost) && step.norm() < 1e-9 {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(FitError::NoConvergence(MAX_ITER));
    }
    let cond = check_condition(&j)?;
    let dof = (kept.len() - k) as f64;
    let chi2_per_dof = cost / dof;
    let cov = (j.transpose() * &j)
        .try_inverse()
        .ok_or(FitError::IllConditioned {
            condition: f64::INFINITY,
            singular_values: vec![],
        })?
        * chi2_per_dof.max(1.0);
    let sigma = |i: usize| cov[(i, i)].sqrt();
    Ok(SimpleModelFit {
        amplitude: theta[0].exp(),
        p_bulk_th: problem.use_bulk.then(|| theta[1].exp()),
        p_bound_th: problem.use_bound.then(|| theta[k - 1].exp()),
        sigma_ln_bulk: problem.use_bulk.then(|| sigma(1)),
        sigma_ln_bound: problem.use_bound.then(|| sigma(k - 1)),
        residuals: r.iter().map(|x| -x).collect(),
        chi2_per_dof,
        condition: cond,
    })
}

/// Single-family fit `ln P = a + d ln p + L (b ln p + c)`.
///
/// Under `P ~ (p / p_th)^(kappa L / 2)` the exponent multiplier is
/// `kappa = 2b`, which should be 1, and `p_th = exp(-c / b)`. The free `d`
/// absorbs the odd-distance offset `(L + 1) / 2` and prefactor slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kappa: f64,
    pub sigma_kappa: f64,
    pub threshold: f64,
    pub coefficients: [f64; 4],
    pub chi2_per_dof: f64,
    pub condition: f64,
}

/// Weighted linear least squares via SVD on `(p, L, estimate)` samples.
pub fn fit_scaling(samples: &[(f64, usize, PfailEstimate)]) -> Result<ScalingFit, FitError> {
    let kept: Vec<_> = samples
        .iter()
        .filter(|(p, _, e)| *p > 0.0 && e.failures > 0 && e.failures < e.shots)
        .collect();
    if kept.len() <= 4 {
        return Err(FitError::TooFewPoints {
            needed: 5,
            got: kept.len(),
        });
    }
    let distances = distinct_distances(kept.iter().map(|s| s.1));
    if distances < 3 {
        return Err(FitError::TooFewDistances { needed: 3, got: distances });
    }
    let n = kept.len();
    let mut a = DMatrix::zeros(n, 4);
    let mut y = DVector::zeros(n);
    for (i, (p, l, e)) in kept.iter().enumerate() {
        let w = 1.0 / e.log_sigma();
        let (lp, l) = (p.ln(), *l as f64);
        a[(i, 0)] = w;
        a[(i, 1)] = w * lp;
        a[(i, 2)] = w * l * lp;
        a[(i, 3)] = w * l;
        y[i] = w * e.p_fail.ln();
    }
    let cond = check_condition(&a)?;
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&y, 1e-14)
        .map_err(|_| FitError::IllConditioned {
            condition: cond,
            singular_values: vec![],
        })?;
    let resid = &a * &x - &y;
    let dof = (n - 4) as f64;
    let chi2_per_dof = resid.norm_squared() / dof;
    let cov = (a.transpose() * &a)
        .try_inverse()
        .ok_or(FitError::IllConditioned {
            condition: cond,
            singular_values: vec![],
        })?
        * chi2_per_dof.max(1.0);
    let (b, c) = (x[2], x[3]);
    Ok(ScalingFit {
        kappa: 2.0 * b,
        sigma_kappa: 2.0 * cov[(2, 2)].sqrt(),
        threshold: (-c / b).exp(),
        coefficients: [x[0], x[1], x[2], x[3]],
        chi2_per_dof,
        condition: cond,
    })
}
