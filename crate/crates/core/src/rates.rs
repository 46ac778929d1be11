//! Bell-pair generation rates and the error-correction timings they imply
//! for three interconnect designs: free-space lens collection, one large
//! cavity, and an array of micro-cavities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{Length, LengthUnit, Rate, Time, TimeUnit};

/// Decoherence budget `T / tau_dec` used as the reference requirement.
pub const DECOHERENCE_BUDGET: f64 = 1e-3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RateError {
    #[error("need at least one communication qubit, got {0}")]
    NoQubits(f64),
    #[error("code distance must be at least 2, got {0}")]
    InvalidDistance(usize),
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidEfficiency { name: &'static str, value: f64 },
    #[error("unknown design {0:?}")]
    UnknownDesign(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Lens,
    SingleCavity,
    CavityArray,
}

impl DesignKind {
    pub const ALL: [DesignKind; 3] = [DesignKind::Lens, DesignKind::SingleCavity, DesignKind::CavityArray];

    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Lens => "lens",
            DesignKind::SingleCavity => "single_cavity",
            DesignKind::CavityArray => "cavity_array",
        }
    }

    pub fn parse(name: &str) -> Result<Self, RateError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| RateError::UnknownDesign(name.to_string()))
    }
}

/// Cavity properties as printed; `cooperativity` and `eta_cav` are inputs,
/// not recomputed from `(g, kappa, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub length: Length,
    pub waist: Length,
    pub g_mhz: f64,
    pub kappa_mhz: f64,
    pub gamma_mhz: f64,
    pub cooperativity: f64,
    pub eta_cav: f64,
    pub tau_cav: Time,
}

/// Where the success probability per attempt comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaaSource {
    /// The rounded value quoted for the design.
    #[default]
    Printed,
    /// `0.5 * (eta_collect * eta_det)^2`.
    Efficiencies,
}

/// Which attempt-rate cap applies when the optical modes saturate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapSource {
    /// Caps from the attempt-rate table (10 and 286 per us).
    #[default]
    Table,
    /// One attempt per 100 ns per optical mode (10 and 300 per us).
    Prose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RateOptions {
    #[serde(default)]
    pub p_aa: PaaSource,
    #[serde(default)]
    pub cap: CapSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterconnectDesign {
    pub kind: DesignKind,
    pub n_cavities: u32,
    pub eta_collect: f64,
    pub eta_det: f64,
    pub printed_p_aa: f64,
    /// Time between attempts on one qubit; attempts on `N` qubits
    /// interleave, giving `N / period`.
    pub attempt_period: Time,
    pub table_cap: Option<Rate>,
    pub prose_cap: Option<Rate>,
    pub reset: Time,
    pub recool: Time,
    /// Addressing-beam switching time per optical mode.
    pub switch_floor: Time,
    pub cavity: Option<CavityParams>,
}

impl InterconnectDesign {
    pub fn lens() -> Self {
        Self {
            kind: DesignKind::Lens,
            n_cavities: 0,
            eta_collect: 0.12,
            eta_det: 0.7,
            printed_p_aa: 0.0035,
            attempt_period: Time::us(16.0),
            table_cap: None,
            prose_cap: None,
            reset: Time::us(6.0),
            recool: Time::us(10.0),
            switch_floor: Time::ns(100.0),
            cavity: None,
        }
    }

    pub fn single_cavity() -> Self {
        Self {
            kind: DesignKind::SingleCavity,
            n_cavities: 1,
            eta_collect: 0.66,
            printed_p_aa: 0.1,
            table_cap: Some(Rate::per_us(10.0)),
            prose_cap: Some(Rate::per_us(10.0)),
            cavity: Some(CavityParams {
                length: Length::new(4.0, LengthUnit::Mm),
                waist: Length::new(5.0, LengthUnit::Um),
                g_mhz: 17.0,
                kappa_mhz: 28.0,
                gamma_mhz: 6.0,
                cooperativity: 3.2,
                eta_cav: 0.66,
                tau_cav: Time::ns(5.7),
            }),
            ..Self::lens()
        }
    }

    pub fn cavity_array() -> Self {
        Self {
            kind: DesignKind::CavityArray,
            n_cavities: 30,
            eta_collect: 0.98,
            printed_p_aa: 0.24,
            attempt_period: Time::us(0.3),
            table_cap: Some(Rate::per_us(286.0)),
            prose_cap: Some(Rate::per_us(300.0)),
            // Purcell-enhanced pumping replaces the free-space reset.
            reset: Time::ns(100.0),
            cavity: Some(CavityParams {
                length: Length::new(90.0, LengthUnit::Um),
                waist: Length::new(2.5, LengthUnit::Um),
                g_mhz: 184.0,
                kappa_mhz: 404.0,
                gamma_mhz: 6.0,
                cooperativity: 56.0,
                eta_cav: 0.98,
                tau_cav: Time::ns(0.39),
            }),
            ..Self::lens()
        }
    }

    pub fn preset(kind: DesignKind) -> Self {
        match kind {
            DesignKind::Lens => Self::lens(),
            DesignKind::SingleCavity => Self::single_cavity(),
            DesignKind::CavityArray => Self::cavity_array(),
        }
    }

    pub fn validate(&self) -> Result<(), RateError> {
        for (name, value) in [
            ("eta_collect", self.eta_collect),
            ("eta_det", self.eta_det),
            ("printed_p_aa", self.printed_p_aa),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(RateError::InvalidEfficiency { name, value });
            }
        }
        Ok(())
    }

    pub fn p_aa(&self, source: PaaSource) -> f64 {
        match source {
            PaaSource::Printed => self.printed_p_aa,
            PaaSource::Efficiencies => p_aa(self.eta_collect, self.eta_det),
        }
    }

    pub fn cap(&self, source: CapSource) -> Option<Rate> {
        match source {
            CapSource::Table => self.table_cap,
            CapSource::Prose => self.prose_cap,
        }
    }

    /// Qubit count at which the uncapped rate meets the cap.
    pub fn corner(&self, source: CapSource) -> Option<f64> {
        let cap = self.cap(source)?;
        Some(cap.in_unit(self.attempt_period.unit) * self.attempt_period.value)
    }
}

/// Heralded atom-atom success probability per attempt, `0.5 (eta eta_det)^2`.
pub fn p_aa(eta_collect: f64, eta_det: f64) -> f64 {
    0.5 * (eta_collect * eta_det).powi(2)
}

/// Attempt rate with `n` communication qubits: `n / period`, capped by the
/// optical modes where the design has a cap.
pub fn attempt_rate(design: &InterconnectDesign, n: f64, cap: CapSource) -> Result<Rate, RateError> {
    if n.is_nan() || n < 1.0 {
        return Err(RateError::NoQubits(n));
    }
    let linear = design.attempt_period.inverse().scale(n).to(TimeUnit::Us);
    Ok(match design.cap(cap) {
        Some(c) => linear.min(c),
        None => linear,
    })
}

pub fn bell_rate(design: &InterconnectDesign, n: f64, options: RateOptions) -> Result<Rate, RateError> {
    design.validate()?;
    Ok(attempt_rate(design, n, options.cap)?.scale(design.p_aa(options.p_aa)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub design: DesignKind,
    pub n_comm_qubits: f64,
    pub distance: usize,
    pub p_aa: f64,
    pub attempt_rate: Rate,
    pub bell_rate: Rate,
    pub tau_bell: Time,
    /// `2L tau_bell`, the time to make the seam's Bell pairs for one cycle.
    pub cycle_time: Time,
    /// `L` cycles.
    pub logical_gate_time: Time,
    pub bell_pairs_per_cycle: usize,
    pub bell_pairs_per_gate: usize,
    pub tau_dec: Time,
    pub decoherence_ratio: f64,
    /// `decoherence_ratio <= DECOHERENCE_BUDGET`.
    pub within_budget: bool,
}

pub fn rate_point(
    design: &InterconnectDesign,
    n: f64,
    distance: usize,
    tau_dec: Time,
    options: RateOptions,
) -> Result<RatePoint, RateError> {
    if distance < 2 {
        return Err(RateError::InvalidDistance(distance));
    }
    let attempt = attempt_rate(design, n, options.cap)?;
    let p = design.p_aa(options.p_aa);
    let bell = bell_rate(design, n, options)?;
    let tau_bell = bell.period();
    let cycle_time = tau_bell.scale(2.0 * distance as f64);
    let logical_gate_time = cycle_time.scale(distance as f64);
    let decoherence_ratio = cycle_time.ratio(tau_dec);
    Ok(RatePoint {
        design: design.kind,
        n_comm_qubits: n,
        distance,
        p_aa: p,
        attempt_rate: attempt,
        bell_rate: bell,
        tau_bell,
        cycle_time,
        logical_gate_time,
        bell_pairs_per_cycle: 2 * distance,
        bell_pairs_per_gate: 2 * distance * distance,
        tau_dec,
        decoherence_ratio,
        within_budget: decoherence_ratio <= DECOHERENCE_BUDGET,
    })
}

/// Bell rate needed for cycles of length `cycle` at distance `distance`.
pub fn required_bell_rate(distance: usize, cycle: Time) -> Rate {
    cycle.inverse().scale(2.0 * distance as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub design: DesignKind,
    pub n: f64,
    pub attempt_rate_per_us: f64,
    pub bell_rate_per_us: f64,
}

/// Bell rate against communication-qubit count for each design.
pub fn fig3_curves(
    designs: &[InterconnectDesign],
    ns: &[f64],
    options: RateOptions,
) -> Result<Vec<Fig3Row>, RateError> {
    let mut rows = Vec::with_capacity(designs.len() * ns.len());
    for d in designs {
        for &n in ns {
            rows.push(Fig3Row {
                design: d.kind,
                n,
                attempt_rate_per_us: attempt_rate(d, n, options.cap)?.in_unit(TimeUnit::Us),
                bell_rate_per_us: bell_rate(d, n, options)?.in_unit(TimeUnit::Us),
            });
        }
    }
    Ok(rows)
}

/// Log-spaced qubit counts from 1 to `max`, with every integer up to 10.
pub fn fig3_grid(max: f64, per_decade: usize) -> Vec<f64> {
    let mut ns: Vec<f64> = (1..=10).map(f64::from).filter(|&n| n <= max).collect();
    let decades = max.log10();
    let steps = (decades * per_decade as f64).ceil() as usize;
    for i in 0..=steps {
        let n = 10f64.powf(i as f64 / per_decade as f64).round();
        if n > 10.0 && n <= max {
            ns.push(n);
        }
    }
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    ns
}

/// Single-qubit reference figures for the lens and single-cavity designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitReference {
    /// Mean time to a Bell pair with one lens-coupled qubit.
    pub lens_bell_time: Time,
    /// One cavity-coupled qubit attempting every `reset + recool`.
    pub cavity_rate: Rate,
    /// The rate quoted for this configuration, which includes overheads
    /// the timing model does not itemise.
    pub quoted_cavity_rate: Rate,
    /// `cavity_rate / quoted_cavity_rate - 1`.
    pub relative_gap: f64,
    /// Upper bound with no reset or cooling: one attempt per cavity lifetime.
    pub cavity_lifetime_bound: Rate,
}

pub fn single_qubit_reference_rates() -> SingleQubitReference {
    let lens = InterconnectDesign::lens();
    let cavity = InterconnectDesign::single_cavity();
    let period = lens.reset.to(TimeUnit::Us).value + lens.recool.to(TimeUnit::Us).value;
    let lens_bell_time = Time::us(period / lens.printed_p_aa).to(TimeUnit::Ms);
    let cavity_rate = Rate::per_us(cavity.printed_p_aa / period).to(TimeUnit::S);
    let quoted = Rate::new(5800.0, TimeUnit::S);
    let tau_cav = cavity.cavity.expect("cavity design").tau_cav;
    SingleQubitReference {
        lens_bell_time,
        cavity_rate,
        quoted_cavity_rate: quoted,
        relative_gap: cavity_rate.hertz() / quoted.hertz() - 1.0,
        cavity_lifetime_bound: tau_cav.inverse().scale(cavity.printed_p_aa).to(TimeUnit::S),
    }
}

/// Rounds to `digits` significant figures.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_aa_values() {
        assert!((p_aa(0.12, 0.7) - 0.003528).abs() < 1e-12);
        assert_eq!(p_aa(1.0, 1.0), 0.5);
        assert!((p_aa(0.66, 0.7) - 0.1067220).abs() < 1e-6);
        assert!((p_aa(0.98, 0.7) - 0.2352980).abs() < 1e-6);
    }

    #[test]
    fn attempt_rate_caps() {
        let single = InterconnectDesign::single_cavity();
        let r = attempt_rate(&single, 160.0, CapSource::Table).unwrap();
        assert!((r.in_unit(TimeUnit::Us) - 10.0).abs() < 1e-12);
        let r = attempt_rate(&single, 8.0, CapSource::Table).unwrap();
        assert!((r.in_unit(TimeUnit::Us) - 0.5).abs() < 1e-12);
        let array = InterconnectDesign::cavity_array();
        assert_eq!(attempt_rate(&array, 100.0, CapSource::Table).unwrap().value, 286.0);
        assert_eq!(attempt_rate(&array, 100.0, CapSource::Prose).unwrap().value, 300.0);
        let lens = InterconnectDesign::lens();
        let r = attempt_rate(&lens, 1e6, CapSource::Table).unwrap();
        assert!((r.in_unit(TimeUnit::Us) - 62_500.0).abs() < 1e-6);
        assert!(attempt_rate(&lens, 0.5, CapSource::Table).is_err());
    }

    #[test]
    fn corners() {
        assert!((InterconnectDesign::single_cavity().corner(CapSource::Table).unwrap() - 160.0).abs() < 1e-9);
        assert!((InterconnectDesign::cavity_array().corner(CapSource::Table).unwrap() - 85.8).abs() < 1e-9);
        assert_eq!(InterconnectDesign::lens().corner(CapSource::Table), None);
    }

    #[test]
    fn rate_point_identities() {
        for kind in DesignKind::ALL {
            let d = InterconnectDesign::preset(kind);
            for n in [1.0, 7.0, 85.0, 160.0, 1000.0] {
                let p = rate_point(&d, n, 20, Time::s(2.0), RateOptions::default()).unwrap();
                assert!((p.tau_bell.in_unit(p.bell_rate.per) * p.bell_rate.value - 1.0).abs() < 1e-12);
                assert!((p.cycle_time.ratio(p.tau_bell) - 40.0).abs() < 1e-9);
                assert!((p.logical_gate_time.ratio(p.cycle_time) - 20.0).abs() < 1e-9);
                assert_eq!(p.bell_pairs_per_gate, 800);
            }
        }
    }

    #[test]
    fn lens_hundred_qubits() {
        let p = rate_point(&InterconnectDesign::lens(), 100.0, 20, Time::s(2.0), RateOptions::default()).unwrap();
        // 40 Bell pairs in about 2 ms
        assert!((p.cycle_time.in_unit(TimeUnit::Ms) - 1.8286).abs() < 1e-3);
        assert!((p.decoherence_ratio - 9.14e-4).abs() < 1e-6);
        assert!(p.within_budget);
    }

    #[test]
    fn reference_rates() {
        let r = single_qubit_reference_rates();
        assert!((r.lens_bell_time.value - 4.5714).abs() < 1e-4);
        assert_eq!(r.lens_bell_time.unit, TimeUnit::Ms);
        assert!((r.cavity_rate.hertz() - 6250.0).abs() < 1e-6);
        assert!(r.relative_gap > 0.0 && r.relative_gap < 0.1);
        assert!(r.cavity_lifetime_bound.hertz() > r.cavity_rate.hertz());
    }

    #[test]
    fn required_rate_is_twenty_khz() {
        let r = required_bell_rate(20, Time::ms(2.0));
        assert!((r.hertz() - 20_000.0).abs() < 1e-9);
    }

    #[test]
    fn sig_figs() {
        assert_eq!(round_sig(13.888, 2), 14.0);
        assert_eq!(round_sig(182.857, 2), 180.0);
        assert_eq!(round_sig(0.0035280, 2), 0.0035);
        assert_eq!(round_sig(-0.0456, 1), -0.05);
    }

    #[test]
    fn fig3_grid_covers_range() {
        let ns = fig3_grid(1000.0, 20);
        assert_eq!(ns[0], 1.0);
        assert_eq!(*ns.last().unwrap(), 1000.0);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
    }
}
