//! Monte Carlo estimation of logical failure rates, threshold location and
//! model fitting.

pub mod fit;
pub mod threshold;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{DecodeError, MatchingGraph, SparseBlossom, Weighting};
use crate::geometry::{CodeLayout, GeometryError};
use crate::noise::{CoefficientMode, ErrorRates, FlipRates, NoiseError, NoiseFamily, RatesByRegion};
use crate::sampler::{Sampler, SamplerError, ShotScratch};

pub use fit::{fit_scaling, fit_simple_model, FitError, FitSample, ScalingFit, SimpleModelFit};
pub use threshold::{
    find_threshold, small_modules_line, threshold_curve_2d, Curve, CurvePoint, Ray, RayOutcome,
    ThresholdError, ThresholdEstimate,
};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("shot count must be at least 1")]
    NoShots,
}

/// How a point's physical error rates turn into flip rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NoiseModel {
    Family {
        family: NoiseFamily,
        #[serde(default)]
        mode: CoefficientMode,
    },
    /// `p = q = eps_cx` on every site; the other rates are ignored.
    UniformPq,
}

impl NoiseModel {
    pub fn family(family: NoiseFamily) -> Self {
        NoiseModel::Family {
            family,
            mode: CoefficientMode::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Family { family, .. } => family.name(),
            NoiseModel::UniformPq => "uniform_pq",
        }
    }

    pub fn uses_seam(&self) -> bool {
        matches!(self, NoiseModel::Family { family, .. } if family.uses_seam())
    }

    pub fn rates(&self, eps: &ErrorRates) -> Result<RatesByRegion, NoiseError> {
        match *self {
            NoiseModel::Family { family, mode } => family.rates(eps, mode),
            NoiseModel::UniformPq => {
                let rates = RatesByRegion::uniform(FlipRates::uniform(eps.eps_cx));
                rates.validate()?;
                Ok(rates)
            }
        }
    }
}

/// One simulation point: noise, distance and decoder options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub model: NoiseModel,
    pub eps: ErrorRates,
    pub distance: usize,
    /// Noisy rounds; `None` means `distance`.
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub weighting: Weighting,
}

impl PointSpec {
    pub fn new(model: NoiseModel, eps: ErrorRates, distance: usize) -> Self {
        Self {
            model,
            eps,
            distance,
            rounds: None,
            weighting: Weighting::default(),
        }
    }

    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or(self.distance)
    }

    pub fn layout(&self) -> Result<CodeLayout, GeometryError> {
        let seam = self
            .model
            .uses_seam()
            .then(|| CodeLayout::central_seam_column(self.distance))
            .flatten();
        CodeLayout::new(self.distance, seam)
    }
}

/// Sampler and matching graph for one point, shared read-only by workers.
#[derive(Debug, Clone)]
pub struct PreparedPoint {
    pub layout: CodeLayout,
    pub sampler: Sampler,
    pub graph: MatchingGraph,
}

impl PreparedPoint {
    pub fn new(spec: &PointSpec) -> Result<Self, ExperimentError> {
        let layout = spec.layout()?;
        let rates = spec.model.rates(&spec.eps)?;
        let sampler = Sampler::new(&layout, spec.rounds(), &rates)?;
        let graph = MatchingGraph::new(&layout, spec.rounds(), &rates, spec.weighting)?;
        Ok(Self { layout, sampler, graph })
    }

    /// Failures among shots `start..end`.
    pub fn count_failures(&self, seed: u64, start: u64, end: u64) -> Result<u64, DecodeError> {
        const CHUNK: u64 = 256;
        let chunks: Vec<(u64, u64)> = (start..end)
            .step_by(CHUNK as usize)
            .map(|s| (s, (s + CHUNK).min(end)))
            .collect();
        chunks
            .into_par_iter()
            .map(|(s, e)| {
                let mut matcher = SparseBlossom::new(&self.graph);
                let mut scratch = ShotScratch::default();
                let mut defects = Vec::new();
                let mut failures = 0;
                for shot in s..e {
                    let flip = self.sampler.sample_into(seed, shot, &mut scratch, &mut defects);
                    let outcome = matcher.decode(&defects)?;
                    failures += u64::from(outcome.predicted_flip != flip);
                }
                Ok(failures)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    }
}

/// Binomial failure estimate with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfailEstimate {
    pub shots: u64,
    pub failures: u64,
    pub p_fail: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl PfailEstimate {
    pub fn from_counts(failures: u64, shots: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(failures, shots, Z95);
        Self {
            shots,
            failures,
            p_fail: failures as f64 / shots as f64,
            ci_lo,
            ci_hi,
        }
    }

    /// Standard error of `ln p_fail` (delta method); infinite with no failures.
    pub fn log_sigma(&self) -> f64 {
        if self.failures == 0 {
            return f64::INFINITY;
        }
        ((1.0 - self.p_fail) / self.failures as f64).sqrt()
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Rounding can leave the endpoint a hair inside 0 or 1.
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Failure rate over shots `0..shots`. The result depends only on the spec,
/// seed and shot count, never on thread scheduling.
pub fn estimate_pfail(spec: &PointSpec, shots: u64, seed: u64) -> Result<PfailEstimate, ExperimentError> {
    if shots == 0 {
        return Err(ExperimentError::NoShots);
    }
    let point = PreparedPoint::new(spec)?;
    let failures = point.count_failures(seed, 0, shots)?;
    Ok(PfailEstimate::from_counts(failures, shots))
}

/// Shot budget for [`estimate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotBudget {
    pub min_shots: u64,
    pub max_shots: u64,
    /// Stop once the interval half-width is at most this fraction of `p_fail`.
    pub target_relative_halfwidth: f64,
}

impl ShotBudget {
    pub fn fixed(shots: u64) -> Self {
        Self {
            min_shots: shots,
            max_shots: shots,
            target_relative_halfwidth: 0.0,
        }
    }
}

impl Default for ShotBudget {
    fn default() -> Self {
        Self {
            min_shots: 10_000,
            max_shots: 200_000,
            target_relative_halfwidth: 0.1,
        }
    }
}

/// Doubles the shot count from `min_shots` until the relative interval
/// target or `max_shots` is reached. Shots are always `0..n`, so a larger
/// budget extends rather than replaces a smaller one.
pub fn estimate_adaptive(spec: &PointSpec, budget: ShotBudget, seed: u64) -> Result<PfailEstimate, ExperimentError> {
    if budget.min_shots == 0 || budget.max_shots == 0 {
        return Err(ExperimentError::NoShots);
    }
    let point = PreparedPoint::new(spec)?;
    let mut shots = budget.min_shots.min(budget.max_shots);
    let mut failures = point.count_failures(seed, 0, shots)?;
    loop {
        let est = PfailEstimate::from_counts(failures, shots);
        let half = (est.ci_hi - est.ci_lo) / 2.0;
        if shots >= budget.max_shots || (est.failures > 0 && half <= budget.target_relative_halfwidth * est.p_fail) {
            return Ok(est);
        }
        let next = (shots * 2).min(budget.max_shots);
        failures += point.count_failures(seed, shots, next)?;
        shots = next;
    }
}

/// One row of a sweep: a point and its estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub spec: PointSpec,
    pub estimate: PfailEstimate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Splits rows into one curve per distance, with `x` read from each row.
    pub fn curves(&self, x: impl Fn(&SweepRow) -> f64) -> Vec<Curve> {
        let mut distances: Vec<usize> = self.rows.iter().map(|r| r.spec.distance).collect();
        distances.sort_unstable();
        distances.dedup();
        distances
            .into_iter()
            .map(|l| Curve {
                distance: l,
                points: self
                    .rows
                    .iter()
                    .filter(|r| r.spec.distance == l)
                    .map(|r| CurvePoint { x: x(r), estimate: r.estimate })
                    .collect(),
            })
            .collect()
    }
}

/// Runs every `(eps, L)` combination with the same seed. Sharing the seed
/// couples the points: at a fixed shot, raising a rate only adds faults.
pub fn run_sweep(
    model: NoiseModel,
    eps_grid: &[ErrorRates],
    distances: &[usize],
    weighting: Weighting,
    budget: ShotBudget,
    seed: u64,
) -> Result<SweepResult, ExperimentError> {
    let mut rows = Vec::with_capacity(eps_grid.len() * distances.len());
    for &distance in distances {
        for eps in eps_grid {
            let spec = PointSpec {
                weighting,
                ..PointSpec::new(model, *eps, distance)
            };
            let estimate = estimate_adaptive(&spec, budget, seed)?;
            log::debug!(
                "{} L={distance} eps_cx={} eps_bell={}: {}/{}",
                model.name(),
                eps.eps_cx,
                eps.eps_bell,
                estimate.failures,
                estimate.shots
            );
            rows.push(SweepRow { spec, estimate });
        }
    }
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (500, 100_000)] {
            let (lo, hi) = wilson_interval(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{k}/{n}");
        }
        // Textbook value: 0 of 10 gives an upper limit of z^2 / (n + z^2).
        let (_, hi) = wilson_interval(0, 10, Z95);
        assert!((hi - Z95 * Z95 / (10.0 + Z95 * Z95)).abs() < 1e-12);
    }

    #[test]
    fn zero_rates_never_fail() {
        let spec = PointSpec::new(NoiseModel::family(NoiseFamily::Bulk), ErrorRates::new(0.0, 0.0, 0.0), 5);
        let est = estimate_pfail(&spec, 500, 1).unwrap();
        assert_eq!(est.failures, 0);
        assert_eq!(est.p_fail, 0.0);
    }

    #[test]
    fn adaptive_stops_at_target() {
        let spec = PointSpec::new(NoiseModel::UniformPq, ErrorRates::new(0.05, 0.0, 0.0), 3);
        let budget = ShotBudget {
            min_shots: 100,
            max_shots: 100_000,
            target_relative_halfwidth: 0.2,
        };
        let est = estimate_adaptive(&spec, budget, 3).unwrap();
        assert!((est.ci_hi - est.ci_lo) / 2.0 <= 0.2 * est.p_fail);
        assert!(est.shots < 100_000);
        // The first `n` shots of a larger run are the `n`-shot run.
        let prefix = estimate_pfail(&spec, est.shots, 3).unwrap();
        assert_eq!(prefix.failures, est.failures);
    }
}
