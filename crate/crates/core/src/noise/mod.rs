//! Physical error parameters and the per-region phenomenological flip rates
//! they induce.

pub mod pauli;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Region;
use crate::units::{Length, Speed, Time};

pub use pauli::{
    bell_pair_x_marginal, circuits, derive_flip_rates, derive_marginals,
    teleported_gate_propagation, Basis, BellQubit, CircuitError, Element, Marginals, Pauli,
    PauliCircuit,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("{preset} {which} rate evaluates to {value}, above 1")]
    Saturated {
        preset: Preset,
        which: &'static str,
        value: f64,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// The three physical error parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorRates {
    /// Local two-qubit (Rydberg) gate error, also written eps_ryd.
    #[serde(alias = "eps_ryd")]
    pub eps_cx: f64,
    pub eps_bell: f64,
    pub eps_m: f64,
}

impl ErrorRates {
    pub fn new(eps_cx: f64, eps_bell: f64, eps_m: f64) -> Self {
        Self {
            eps_cx,
            eps_bell,
            eps_m,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eps_ryd(&self) -> f64 {
        self.eps_cx
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, value) in [
            ("eps_cx", self.eps_cx),
            ("eps_bell", self.eps_bell),
            ("eps_m", self.eps_m),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::InvalidRate { name, value });
            }
        }
        Ok(())
    }
}

/// Per-cycle bit-flip probabilities: `p_data` on data qubits, `q_meas` on
/// syndrome outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlipRates {
    pub p_data: f64,
    pub q_meas: f64,
}

impl FlipRates {
    pub const ZERO: FlipRates = FlipRates {
        p_data: 0.0,
        q_meas: 0.0,
    };

    pub fn new(p_data: f64, q_meas: f64) -> Self {
        Self { p_data, q_meas }
    }

    pub fn uniform(p: f64) -> Self {
        Self::new(p, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSymbol {
    Bell,
    Cx,
    Meas,
}

impl ErrorSymbol {
    pub fn name(self) -> &'static str {
        match self {
            ErrorSymbol::Bell => "eps_bell",
            ErrorSymbol::Cx => "eps_cx",
            ErrorSymbol::Meas => "eps_m",
        }
    }
}

/// `bell * eps_bell + cx * eps_cx + meas * eps_m` with exact coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearForm {
    pub bell: Ratio<i64>,
    pub cx: Ratio<i64>,
    pub meas: Ratio<i64>,
}

impl LinearForm {
    pub fn new(bell: Ratio<i64>, cx: Ratio<i64>, meas: Ratio<i64>) -> Self {
        Self { bell, cx, meas }
    }

    pub fn zero() -> Self {
        let z = Ratio::zero();
        Self::new(z, z, z)
    }

    /// Builds a form from decimal coefficients given as `(numerator, denominator)`.
    fn frac(bell: (i64, i64), cx: (i64, i64), meas: (i64, i64)) -> Self {
        Self::new(
            Ratio::new(bell.0, bell.1),
            Ratio::new(cx.0, cx.1),
            Ratio::new(meas.0, meas.1),
        )
    }

    pub fn coefficient(&self, symbol: ErrorSymbol) -> Ratio<i64> {
        match symbol {
            ErrorSymbol::Bell => self.bell,
            ErrorSymbol::Cx => self.cx,
            ErrorSymbol::Meas => self.meas,
        }
    }

    pub fn add(&mut self, symbol: ErrorSymbol, weight: Ratio<i64>) {
        match symbol {
            ErrorSymbol::Bell => self.bell += weight,
            ErrorSymbol::Cx => self.cx += weight,
            ErrorSymbol::Meas => self.meas += weight,
        }
    }

    pub fn eval(&self, rates: &ErrorRates) -> f64 {
        let f = |r: Ratio<i64>| r.to_f64().unwrap_or(f64::NAN);
        f(self.bell) * rates.eps_bell + f(self.cx) * rates.eps_cx + f(self.meas) * rates.eps_m
    }

    /// `{symbol: "n/d"}` for the nonzero coefficients.
    pub fn to_map(&self) -> BTreeMap<&'static str, String> {
        [ErrorSymbol::Bell, ErrorSymbol::Cx, ErrorSymbol::Meas]
            .into_iter()
            .filter(|s| !self.coefficient(*s).is_zero())
            .map(|s| (s.name(), self.coefficient(s).to_string()))
            .collect()
    }

    /// Largest relative deviation `|other - self| / |self|` over symbols.
    /// A symbol present in only one of the forms counts as infinite.
    pub fn max_relative_deviation(&self, other: &LinearForm) -> f64 {
        [ErrorSymbol::Bell, ErrorSymbol::Cx, ErrorSymbol::Meas]
            .into_iter()
            .map(|s| {
                let (a, b) = (self.coefficient(s), other.coefficient(s));
                if a.is_zero() && b.is_zero() {
                    0.0
                } else if a.is_zero() {
                    f64::INFINITY
                } else {
                    ((b - a) / a).abs().to_f64().unwrap_or(f64::INFINITY)
                }
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (s, c) in [("eps_bell", self.bell), ("eps_cx", self.cx), ("eps_m", self.meas)] {
            if !c.is_zero() {
                terms.push(format!("({c}) {s}"));
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Serialize for LinearForm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_map().serialize(serializer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Bulk,
    Seam,
    /// Every two-qubit gate teleported; applied to the whole lattice.
    SmallModules,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Bulk, Preset::Seam, Preset::SmallModules];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Bulk => "bulk",
            Preset::Seam => "seam",
            Preset::SmallModules => "small_modules",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// The printed, rounded linear forms.
    #[default]
    TableRounded,
    /// Unrounded fractions from Pauli propagation through the circuits.
    ExactCounting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionPreset {
    pub region: Preset,
    pub mode: CoefficientMode,
}

impl RegionPreset {
    pub fn new(region: Preset, mode: CoefficientMode) -> Self {
        Self { region, mode }
    }
}

/// Linear forms for `p` and `q` of one preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PresetForms {
    pub p: LinearForm,
    pub q: LinearForm,
}

/// The printed per-cycle forms.
pub fn table_forms(preset: Preset) -> PresetForms {
    let f = LinearForm::frac;
    match preset {
        Preset::Bulk => PresetForms {
            p: f((0, 1), (2, 1), (0, 1)),
            q: f((0, 1), (2, 1), (1, 1)),
        },
        Preset::Seam => PresetForms {
            p: f((1, 2), (5, 2), (1, 1)),
            q: f((1, 2), (5, 2), (2, 1)),
        },
        Preset::SmallModules => PresetForms {
            p: f((1, 1), (3, 1), (2, 1)),
            q: f((2, 1), (4, 1), (5, 1)),
        },
    }
}

/// The circuits whose propagation yields each preset's `(p, q)`.
pub fn preset_circuits(preset: Preset) -> (PauliCircuit, PauliCircuit) {
    match preset {
        Preset::Bulk => (circuits::bulk_data(), circuits::bulk_syndrome()),
        Preset::Seam => (circuits::seam_data(), circuits::seam_syndrome()),
        Preset::SmallModules => (
            circuits::small_modules_data(),
            circuits::small_modules_syndrome(),
        ),
    }
}

pub fn exact_forms(preset: Preset) -> Result<PresetForms, CircuitError> {
    let (data, syndrome) = preset_circuits(preset);
    Ok(PresetForms {
        p: derive_flip_rates(&data)?,
        q: derive_flip_rates(&syndrome)?,
    })
}

pub fn forms(preset: RegionPreset) -> Result<PresetForms, CircuitError> {
    match preset.mode {
        CoefficientMode::TableRounded => Ok(table_forms(preset.region)),
        CoefficientMode::ExactCounting => exact_forms(preset.region),
    }
}

/// Evaluates a preset's flip rates at the given physical error rates.
pub fn flip_rates(rates: &ErrorRates, preset: RegionPreset) -> Result<FlipRates, NoiseError> {
    rates.validate()?;
    let forms = forms(preset)?;
    let p = forms.p.eval(rates);
    let q = forms.q.eval(rates);
    for (which, value) in [("p", p), ("q", q)] {
        if value > 1.0 {
            return Err(NoiseError::Saturated {
                preset: preset.region,
                which,
                value,
            });
        }
    }
    Ok(FlipRates::new(p, q))
}

/// Flip rates for the bulk and for the seam column. Seam data qubits use
/// `seam.p_data`; seam syndrome outcomes use `seam.q_meas`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RatesByRegion {
    pub bulk: FlipRates,
    pub seam: FlipRates,
}

impl RatesByRegion {
    pub fn new(bulk: FlipRates, seam: FlipRates) -> Self {
        Self { bulk, seam }
    }

    /// Same rates everywhere.
    pub fn uniform(rates: FlipRates) -> Self {
        Self::new(rates, rates)
    }

    pub fn data_rate(&self, region: Region) -> f64 {
        match region {
            Region::SeamData => self.seam.p_data,
            _ => self.bulk.p_data,
        }
    }

    pub fn meas_rate(&self, region: Region) -> f64 {
        match region {
            Region::SeamSyndrome => self.seam.q_meas,
            _ => self.bulk.q_meas,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, value) in [
            ("bulk.p_data", self.bulk.p_data),
            ("bulk.q_meas", self.bulk.q_meas),
            ("seam.p_data", self.seam.p_data),
            ("seam.q_meas", self.seam.q_meas),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::InvalidRate { name, value });
            }
        }
        Ok(())
    }
}

/// Which noise sources are switched on for a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// Bulk preset everywhere, including the seam column.
    Bulk,
    /// Bulk preset off the seam, seam preset on it.
    Combined,
    /// Seam preset on the seam column, noiseless elsewhere.
    Boundary,
    /// Small-modules preset on every site.
    SmallModules,
}

impl NoiseFamily {
    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Bulk => "bulk",
            NoiseFamily::Combined => "combined",
            NoiseFamily::Boundary => "boundary",
            NoiseFamily::SmallModules => "small_modules",
        }
    }

    pub fn uses_seam(self) -> bool {
        matches!(self, NoiseFamily::Combined | NoiseFamily::Boundary)
    }

    pub fn rates(self, eps: &ErrorRates, mode: CoefficientMode) -> Result<RatesByRegion, NoiseError> {
        let of = |p| flip_rates(eps, RegionPreset::new(p, mode));
        Ok(match self {
            NoiseFamily::Bulk => RatesByRegion::uniform(of(Preset::Bulk)?),
            NoiseFamily::Combined => RatesByRegion::new(of(Preset::Bulk)?, of(Preset::Seam)?),
            NoiseFamily::Boundary => RatesByRegion::new(FlipRates::ZERO, of(Preset::Seam)?),
            NoiseFamily::SmallModules => RatesByRegion::uniform(of(Preset::SmallModules)?),
        })
    }
}

/// Transport time across a supermodule and the Bell-pair error it implies
/// under exponential decoherence, `1 - exp(-t / tau_dec)`.
pub fn supermodule_bell_error(separation: Length, speed: Speed, tau_dec: Time) -> (Time, f64) {
    let time = speed.travel_time(separation);
    let eps = -(-time.ratio(tau_dec)).exp_m1();
    (time, eps)
}
