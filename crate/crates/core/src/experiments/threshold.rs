//! Threshold location from finite-size crossings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{run_sweep, ExperimentError, NoiseModel, PfailEstimate, ShotBudget, SweepResult};
use crate::decoder::Weighting;
use crate::noise::ErrorRates;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: PfailEstimate,
}

/// Failure rate against a sweep parameter at one distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub distance: usize,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ThresholdError {
    #[error("need at least 3 distinct distances, got {0}")]
    TooFewDistances(usize),
    #[error("sweep values must be positive, got {0}")]
    NonPositiveX(f64),
    #[error("curves for L={small} and L={large} do not cross inside the swept range")]
    NoCrossing {
        small: usize,
        large: usize,
        curves: Vec<Curve>,
    },
    #[error("eps_cx = {0} is outside [0, 3%/7]")]
    OutOfDomain(f64),
}

/// Crossing of one adjacent pair of distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub small: usize,
    pub large: usize,
    pub x: f64,
    /// Propagated statistical error on `x`.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub family: String,
    pub value: f64,
    /// `spread + statistical`.
    pub uncertainty: f64,
    /// Half the range of the pairwise crossings.
    pub spread: f64,
    /// Statistical error of the mean crossing.
    pub statistical: f64,
    pub crossings: Vec<PairCrossing>,
}

/// Crossing of two curves, interpolating `ln p_fail` linearly in `ln x`
/// between the bracketing points. Only points where both curves saw at
/// least one failure are used.
fn pair_crossing(small: &Curve, large: &Curve) -> Option<PairCrossing> {
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for a in &small.points {
        let Some(b) = large.points.iter().find(|b| b.x == a.x) else {
            continue;
        };
        if a.estimate.failures == 0 || b.estimate.failures == 0 {
            continue;
        }
        let d = b.estimate.p_fail.ln() - a.estimate.p_fail.ln();
        let var = a.estimate.log_sigma().powi(2) + b.estimate.log_sigma().powi(2);
        rows.push((a.x, d, var));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows.windows(2).find_map(|w| {
        let [(x0, d0, v0), (x1, d1, v1)] = [w[0], w[1]];
        if !(d0 < 0.0 && d1 >= 0.0) {
            return None;
        }
        let (u0, u1) = (x0.ln(), x1.ln());
        let gap = d0 - d1;
        let u = u0 + (u1 - u0) * d0 / gap;
        let du0 = (u1 - u0) * -d1 / (gap * gap);
        let du1 = (u1 - u0) * d0 / (gap * gap);
        let x = u.exp();
        Some(PairCrossing {
            small: small.distance,
            large: large.distance,
            x,
            sigma: x * (du0 * du0 * v0 + du1 * du1 * v1).sqrt(),
        })
    })
}

/// Mean crossing of adjacent-distance curves. Curves are ordered by
/// distance; below threshold the larger distance fails less, so a crossing
/// is where `ln P_large - ln P_small` turns from negative to non-negative.
pub fn find_threshold(curves: &[Curve], family: &str) -> Result<ThresholdEstimate, ThresholdError> {
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.distance);
    sorted.dedup_by_key(|c| c.distance);
    if sorted.len() < 3 {
        return Err(ThresholdError::TooFewDistances(sorted.len()));
    }
    for c in &sorted {
        if let Some(p) = c.points.iter().find(|p| p.x.is_nan() || p.x <= 0.0) {
            return Err(ThresholdError::NonPositiveX(p.x));
        }
    }
    let mut crossings = Vec::new();
    for w in sorted.windows(2) {
        match pair_crossing(w[0], w[1]) {
            Some(c) => crossings.push(c),
            None => {
                return Err(ThresholdError::NoCrossing {
                    small: w[0].distance,
                    large: w[1].distance,
                    curves: curves.to_vec(),
                })
            }
        }
    }
    let n = crossings.len() as f64;
    let value = crossings.iter().map(|c| c.x).sum::<f64>() / n;
    let lo = crossings.iter().map(|c| c.x).fold(f64::INFINITY, f64::min);
    let hi = crossings.iter().map(|c| c.x).fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / 2.0;
    let statistical = crossings.iter().map(|c| c.sigma * c.sigma).sum::<f64>().sqrt() / n;
    Ok(ThresholdEstimate {
        family: family.to_string(),
        value,
        uncertainty: spread + statistical,
        spread,
        statistical,
        crossings,
    })
}

/// A line `base + t * direction` through the error-rate space, swept over
/// the values in `grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    #[serde(default = "ErrorRates::zero")]
    pub base: ErrorRates,
    pub direction: ErrorRates,
    pub grid: Vec<f64>,
}

impl Ray {
    /// `eps_bell = ratio * eps_ryd`, `eps_m = eps_ryd`, parametrised by `eps_ryd`.
    pub fn bell_ratio(ratio: f64, grid: Vec<f64>) -> Self {
        Self {
            base: ErrorRates::zero(),
            direction: ErrorRates::new(1.0, ratio, 1.0),
            grid,
        }
    }

    /// Fixed `eps_ryd = eps_m`, parametrised by `eps_bell`.
    pub fn bell_only(eps_ryd: f64, grid: Vec<f64>) -> Self {
        Self {
            base: ErrorRates::new(eps_ryd, 0.0, eps_ryd),
            direction: ErrorRates::new(0.0, 1.0, 0.0),
            grid,
        }
    }

    pub fn at(&self, t: f64) -> ErrorRates {
        ErrorRates::new(
            self.base.eps_cx + t * self.direction.eps_cx,
            self.base.eps_bell + t * self.direction.eps_bell,
            self.base.eps_m + t * self.direction.eps_m,
        )
    }

    /// Inverts [`Ray::at`] for rates known to lie on the ray.
    pub fn parameter(&self, eps: &ErrorRates) -> f64 {
        let d = &self.direction;
        let (num, den) = [
            (eps.eps_cx - self.base.eps_cx, d.eps_cx),
            (eps.eps_bell - self.base.eps_bell, d.eps_bell),
            (eps.eps_m - self.base.eps_m, d.eps_m),
        ]
        .into_iter()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
        num / den
    }
}

/// Result of sweeping one ray; a missing crossing is reported, not raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayOutcome {
    pub ray: Ray,
    pub sweep: SweepResult,
    pub threshold: Option<ThresholdEstimate>,
    /// Rates at the threshold.
    pub point: Option<ErrorRates>,
    pub error: Option<String>,
}

/// Sweeps each ray and locates its threshold, tracing the boundary of the
/// below-threshold region.
pub fn threshold_curve_2d(
    model: NoiseModel,
    rays: &[Ray],
    distances: &[usize],
    weighting: Weighting,
    budget: ShotBudget,
    seed: u64,
) -> Result<Vec<RayOutcome>, ExperimentError> {
    let mut out = Vec::with_capacity(rays.len());
    for ray in rays {
        let grid: Vec<ErrorRates> = ray.grid.iter().map(|&t| ray.at(t)).collect();
        let sweep = run_sweep(model, &grid, distances, weighting, budget, seed)?;
        let curves = sweep.curves(|row| ray.parameter(&row.spec.eps));
        let (threshold, point, error) = match find_threshold(&curves, model.name()) {
            Ok(t) => {
                let point = ray.at(t.value);
                (Some(t), Some(point), None)
            }
            Err(e) => (None, None, Some(e.to_string())),
        };
        out.push(RayOutcome {
            ray: ray.clone(),
            sweep,
            threshold,
            point,
            error,
        });
    }
    Ok(out)
}

/// Bell error on the line `3% = 1.5 eps_bell + 7 eps_cx`.
pub fn small_modules_line(eps_cx: f64) -> Result<f64, ThresholdError> {
    let max = 0.03 / 7.0;
    if !(0.0..=max * (1.0 + 1e-12)).contains(&eps_cx) {
        return Err(ThresholdError::OutOfDomain(eps_cx));
    }
    Ok(((0.03 - 7.0 * eps_cx) / 1.5).max(0.0))
}
