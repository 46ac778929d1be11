//! Parameter files for each subcommand.
//!
//! Every file is JSON. Unknown fields are rejected and `schema_version`,
//! when present, must match the version this build writes.

use std::path::Path;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use seamqec_core::decoder::Weighting;
use seamqec_core::experiments::{NoiseModel, PointSpec, Ray, ShotBudget};
use seamqec_core::noise::{ErrorRates, NoiseFamily};
use seamqec_core::rates::{DesignKind, InterconnectDesign, RateOptions};
use seamqec_core::report::SCHEMA_VERSION;
use seamqec_core::units::Time;

use crate::CliError;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_distances() -> Vec<usize> {
    vec![5, 7, 9, 11]
}

fn threshold_budget() -> ShotBudget {
    ShotBudget::fixed(50_000)
}

fn all_designs() -> Vec<InterconnectDesign> {
    DesignKind::ALL.iter().map(|&k| InterconnectDesign::preset(k)).collect()
}

fn default_ns() -> Vec<f64> {
    vec![1.0, 160.0]
}

fn code_distance() -> usize {
    20
}

fn tau_dec() -> Time {
    Time::s(2.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub model: NoiseModel,
    pub rays: Vec<Ray>,
    #[serde(default = "default_distances")]
    pub distances: Vec<usize>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default = "threshold_budget")]
    pub budget: ShotBudget,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub model: NoiseModel,
    pub eps_grid: Vec<ErrorRates>,
    #[serde(default = "default_distances")]
    pub distances: Vec<usize>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub budget: ShotBudget,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "all_designs")]
    pub designs: Vec<InterconnectDesign>,
    /// Communication qubits per design.
    #[serde(default = "default_ns")]
    pub n: Vec<f64>,
    #[serde(default = "code_distance")]
    pub distance: usize,
    #[serde(default = "tau_dec")]
    pub tau_dec: Time,
    #[serde(default)]
    pub options: RateOptions,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            designs: all_designs(),
            n: default_ns(),
            distance: code_distance(),
            tau_dec: tau_dec(),
            options: RateOptions::default(),
        }
    }
}

fn max_n() -> f64 {
    1e4
}

fn per_decade() -> usize {
    20
}

fn reference_cycle() -> Time {
    Time::ms(2.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Config {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "all_designs")]
    pub designs: Vec<InterconnectDesign>,
    #[serde(default = "max_n")]
    pub max_n: f64,
    #[serde(default = "per_decade")]
    pub per_decade: usize,
    /// Distance and cycle time of the reference rate line.
    #[serde(default = "code_distance")]
    pub distance: usize,
    #[serde(default = "reference_cycle")]
    pub reference_cycle: Time,
    #[serde(default)]
    pub options: RateOptions,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            designs: all_designs(),
            max_n: max_n(),
            per_decade: per_decade(),
            distance: code_distance(),
            reference_cycle: reference_cycle(),
            options: RateOptions::default(),
        }
    }
}

fn default_point() -> PointSpec {
    PointSpec::new(
        NoiseModel::family(NoiseFamily::Combined),
        ErrorRates::new(0.01, 0.08, 0.01),
        5,
    )
}

fn check_shots() -> u64 {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeCheckConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_point")]
    pub spec: PointSpec,
    #[serde(default = "check_shots")]
    pub shots: u64,
}

impl Default for DecodeCheckConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            spec: default_point(),
            shots: check_shots(),
        }
    }
}

/// Ready-made threshold sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Bulk noise everywhere, eps_m = eps_ryd.
    Bulk,
    /// Bulk plus seam noise with eps_bell = 8 eps_ryd.
    Combined,
    /// Seam noise only, sweeping eps_bell at eps_ryd = eps_m = 0.2%.
    Boundary,
    /// Phenomenological noise with p = q.
    UniformPq,
}

fn percent(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v / 100.0).collect()
}

impl Preset {
    pub fn config(self) -> ThresholdConfig {
        let (model, ray) = match self {
            Preset::Bulk => (
                NoiseModel::family(NoiseFamily::Bulk),
                Ray::bell_ratio(0.0, percent(&[1.0, 1.1, 1.2, 1.25, 1.3, 1.35, 1.4, 1.5])),
            ),
            Preset::Combined => (
                NoiseModel::family(NoiseFamily::Combined),
                Ray::bell_ratio(8.0, percent(&[0.8, 0.9, 1.0, 1.05, 1.1, 1.15, 1.2, 1.3])),
            ),
            Preset::Boundary => (
                NoiseModel::family(NoiseFamily::Boundary),
                Ray::bell_only(0.002, percent(&[12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0, 26.0])),
            ),
            Preset::UniformPq => (
                NoiseModel::UniformPq,
                Ray::bell_ratio(0.0, percent(&[2.6, 2.7, 2.8, 2.9, 3.0, 3.1, 3.2, 3.4])),
            ),
        };
        ThresholdConfig {
            schema_version: SCHEMA_VERSION,
            model,
            rays: vec![ray],
            distances: default_distances(),
            weighting: Weighting::default(),
            budget: threshold_budget(),
        }
    }
}

/// Reads and deserialises a parameter file, naming the offending field on
/// failure.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        CliError::Config(format!("{}: {} (at `{at}`)", path.display(), e.inner()))
    })
}

fn check_version(version: u32) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version {version} is not supported; this build reads version {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

fn check_budget(budget: &ShotBudget) -> Result<(), CliError> {
    if budget.min_shots == 0 || budget.max_shots < budget.min_shots {
        return Err(CliError::Config(format!(
            "budget needs 1 <= min_shots <= max_shots, got {} and {}",
            budget.min_shots, budget.max_shots
        )));
    }
    Ok(())
}

fn check_distances(distances: &[usize], at_least: usize) -> Result<(), CliError> {
    if distances.len() < at_least {
        return Err(CliError::Config(format!(
            "need at least {at_least} distances, got {distances:?}"
        )));
    }
    if let Some(l) = distances.iter().find(|&&l| l < 2) {
        return Err(CliError::Config(format!("distance {l} is below 2")));
    }
    Ok(())
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_version(self.schema_version)?;
        check_distances(&self.distances, 3)?;
        check_budget(&self.budget)?;
        if self.rays.is_empty() {
            return Err(CliError::Config("no rays given".into()));
        }
        for (i, ray) in self.rays.iter().enumerate() {
            if ray.grid.len() < 2 {
                return Err(CliError::Config(format!("rays[{i}] needs at least 2 grid points")));
            }
        }
        Ok(())
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_version(self.schema_version)?;
        check_distances(&self.distances, 1)?;
        check_budget(&self.budget)?;
        if self.eps_grid.is_empty() {
            return Err(CliError::Config("eps_grid is empty".into()));
        }
        Ok(())
    }
}

impl RatesConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_version(self.schema_version)?;
        if let Some(n) = self.n.iter().find(|n| n.is_nan() || **n < 1.0) {
            return Err(CliError::Config(format!("N must be at least 1, got {n}")));
        }
        for d in &self.designs {
            d.validate().map_err(|e| CliError::Config(format!("{}: {e}", d.kind.name())))?;
        }
        Ok(())
    }
}

impl Fig3Config {
    pub fn validate(&self) -> Result<(), CliError> {
        check_version(self.schema_version)?;
        if self.max_n.is_nan() || self.max_n < 1.0 || self.per_decade == 0 {
            return Err(CliError::Config("max_n must be at least 1 and per_decade positive".into()));
        }
        for d in &self.designs {
            d.validate().map_err(|e| CliError::Config(format!("{}: {e}", d.kind.name())))?;
        }
        Ok(())
    }
}

impl DecodeCheckConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_version(self.schema_version)?;
        check_distances(&[self.spec.distance], 1)?;
        Ok(())
    }
}
