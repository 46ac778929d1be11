//! CSV tables, shot dumps and run manifests.
//!
//! Every CSV starts with a header row. Columns carrying a unit say so in
//! their name (`_us`, `_per_us`); probabilities are plain fractions.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decoder::Weighting;
use crate::experiments::{small_modules_line, NoiseModel, PfailEstimate, PointSpec, RayOutcome, SweepResult, SweepRow};
use crate::noise::{CoefficientMode, ErrorRates, ErrorSymbol, NoiseFamily, PresetForms};
use crate::rates::{CapSource, Fig3Row, InterconnectDesign, RatePoint};
use crate::sampler::DetectionSet;
use crate::units::TimeUnit;

/// Bumped whenever a CSV or manifest layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// One row of a failure-rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub family: String,
    pub coefficients: String,
    pub eps_ryd: f64,
    pub eps_bell: f64,
    pub eps_m: f64,
    #[serde(rename = "L")]
    pub distance: usize,
    pub rounds: usize,
    pub weighting: String,
    pub shots: u64,
    pub failures: u64,
    pub p_fail: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

fn mode_name(mode: CoefficientMode) -> &'static str {
    match mode {
        CoefficientMode::TableRounded => "table_rounded",
        CoefficientMode::ExactCounting => "exact_counting",
    }
}

fn weighting_name(w: Weighting) -> &'static str {
    match w {
        Weighting::LogLikelihood => "log_likelihood",
        Weighting::Unweighted => "unweighted",
    }
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(row: &SweepRow) -> Self {
        let s = &row.spec;
        let coefficients = match s.model {
            NoiseModel::Family { mode, .. } => mode_name(mode),
            NoiseModel::UniformPq => "none",
        };
        Self {
            family: s.model.name().to_string(),
            coefficients: coefficients.to_string(),
            eps_ryd: s.eps.eps_cx,
            eps_bell: s.eps.eps_bell,
            eps_m: s.eps.eps_m,
            distance: s.distance,
            rounds: s.rounds(),
            weighting: weighting_name(s.weighting).to_string(),
            shots: row.estimate.shots,
            failures: row.estimate.failures,
            p_fail: row.estimate.p_fail,
            ci_lo: row.estimate.ci_lo,
            ci_hi: row.estimate.ci_hi,
        }
    }
}

impl SweepCsvRow {
    fn to_row(&self, line: usize) -> Result<SweepRow, ReportError> {
        let bad = |message: String| ReportError::Format { line, message };
        let mode = match self.coefficients.as_str() {
            "table_rounded" | "none" => CoefficientMode::TableRounded,
            "exact_counting" => CoefficientMode::ExactCounting,
            other => return Err(bad(format!("unknown coefficients {other:?}"))),
        };
        let model = match self.family.as_str() {
            "uniform_pq" => NoiseModel::UniformPq,
            "bulk" => NoiseModel::Family { family: NoiseFamily::Bulk, mode },
            "combined" => NoiseModel::Family { family: NoiseFamily::Combined, mode },
            "boundary" => NoiseModel::Family { family: NoiseFamily::Boundary, mode },
            "small_modules" => NoiseModel::Family { family: NoiseFamily::SmallModules, mode },
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        let weighting = match self.weighting.as_str() {
            "log_likelihood" => Weighting::LogLikelihood,
            "unweighted" => Weighting::Unweighted,
            other => return Err(bad(format!("unknown weighting {other:?}"))),
        };
        Ok(SweepRow {
            spec: PointSpec {
                model,
                eps: ErrorRates::new(self.eps_ryd, self.eps_bell, self.eps_m),
                distance: self.distance,
                rounds: Some(self.rounds),
                weighting,
            },
            estimate: PfailEstimate {
                shots: self.shots,
                failures: self.failures,
                p_fail: self.p_fail,
                ci_lo: self.ci_lo,
                ci_hi: self.ci_hi,
            },
        })
    }
}

/// Writes serialisable rows as CSV with a header taken from the field names.
pub fn write_table<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, sweep: &SweepResult) -> Result<(), ReportError> {
    write_table(out, sweep.rows.iter().map(SweepCsvRow::from))
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<SweepResult, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<SweepCsvRow>().enumerate() {
        rows.push(rec?.to_row(i + 2)?);
    }
    Ok(SweepResult { rows })
}

/// Threshold of one ray through the error-rate space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCsvRow {
    pub family: String,
    pub base_eps_ryd: f64,
    pub base_eps_bell: f64,
    pub dir_eps_ryd: f64,
    pub dir_eps_bell: f64,
    pub dir_eps_m: f64,
    /// Empty when no crossing was found.
    pub eps_ryd_th: Option<f64>,
    pub eps_bell_th: Option<f64>,
    pub eps_m_th: Option<f64>,
    /// Threshold and uncertainty in the ray parameter.
    pub t_th: Option<f64>,
    pub t_uncertainty: Option<f64>,
    pub status: String,
}

pub fn threshold_rows(family: &str, outcomes: &[RayOutcome]) -> Vec<ThresholdCsvRow> {
    outcomes
        .iter()
        .map(|o| ThresholdCsvRow {
            family: family.to_string(),
            base_eps_ryd: o.ray.base.eps_cx,
            base_eps_bell: o.ray.base.eps_bell,
            dir_eps_ryd: o.ray.direction.eps_cx,
            dir_eps_bell: o.ray.direction.eps_bell,
            dir_eps_m: o.ray.direction.eps_m,
            eps_ryd_th: o.point.map(|p| p.eps_cx),
            eps_bell_th: o.point.map(|p| p.eps_bell),
            eps_m_th: o.point.map(|p| p.eps_m),
            t_th: o.threshold.as_ref().map(|t| t.value),
            t_uncertainty: o.threshold.as_ref().map(|t| t.uncertainty),
            status: o.error.clone().unwrap_or_else(|| "ok".to_string()),
        })
        .collect()
}

pub fn write_threshold_csv<W: Write>(out: W, rows: &[ThresholdCsvRow]) -> Result<(), ReportError> {
    write_table(out, rows)
}

pub fn read_threshold_csv<R: Read>(input: R) -> Result<Vec<ThresholdCsvRow>, ReportError> {
    Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesCsvRow {
    pub design: String,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "L")]
    pub distance: usize,
    pub p_aa: f64,
    pub attempt_rate_per_us: f64,
    pub bell_rate_per_us: f64,
    pub tau_bell_us: f64,
    #[serde(rename = "T_us")]
    pub cycle_time_us: f64,
    pub gate_time_us: f64,
    pub decoh_ratio: f64,
}

impl From<&RatePoint> for RatesCsvRow {
    fn from(p: &RatePoint) -> Self {
        Self {
            design: p.design.name().to_string(),
            n: p.n_comm_qubits,
            distance: p.distance,
            p_aa: p.p_aa,
            attempt_rate_per_us: p.attempt_rate.in_unit(TimeUnit::Us),
            bell_rate_per_us: p.bell_rate.in_unit(TimeUnit::Us),
            tau_bell_us: p.tau_bell.in_unit(TimeUnit::Us),
            cycle_time_us: p.cycle_time.in_unit(TimeUnit::Us),
            gate_time_us: p.logical_gate_time.in_unit(TimeUnit::Us),
            decoh_ratio: p.decoherence_ratio,
        }
    }
}

pub fn write_rates_csv<W: Write>(out: W, points: &[RatePoint]) -> Result<(), ReportError> {
    write_table(out, points.iter().map(RatesCsvRow::from))
}

pub fn read_rates_csv<R: Read>(input: R) -> Result<Vec<RatesCsvRow>, ReportError> {
    Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3CsvRow {
    pub design: String,
    #[serde(rename = "N")]
    pub n: f64,
    pub attempt_rate_per_us: f64,
    pub bell_rate_per_us: f64,
    /// Bell rate needed for the reference cycle, repeated on every row.
    pub required_rate_per_us: f64,
}

pub fn write_fig3_csv<W: Write>(out: W, rows: &[Fig3Row], required_per_us: f64) -> Result<(), ReportError> {
    write_table(
        out,
        rows.iter().map(|r| Fig3CsvRow {
            design: r.design.name().to_string(),
            n: r.n,
            attempt_rate_per_us: r.attempt_rate_per_us,
            bell_rate_per_us: r.bell_rate_per_us,
            required_rate_per_us: required_per_us,
        }),
    )
}

pub fn read_fig3_csv<R: Read>(input: R) -> Result<Vec<Fig3CsvRow>, ReportError> {
    Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?)
}

/// Qubit count where a design's rate stops growing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerCsvRow {
    pub design: String,
    pub corner_n: f64,
    pub cap_per_us: f64,
}

pub fn corner_rows(designs: &[InterconnectDesign], cap: CapSource) -> Vec<CornerCsvRow> {
    designs
        .iter()
        .filter_map(|d| {
            Some(CornerCsvRow {
                design: d.kind.name().to_string(),
                corner_n: d.corner(cap)?,
                cap_per_us: d.cap(cap)?.in_unit(TimeUnit::Us),
            })
        })
        .collect()
}

pub fn write_corner_csv<W: Write>(out: W, rows: &[CornerCsvRow]) -> Result<(), ReportError> {
    write_table(out, rows)
}

/// Coefficients of one flip rate as exact fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCsvRow {
    pub preset: String,
    pub coefficients: String,
    pub quantity: String,
    pub eps_bell: String,
    pub eps_cx: String,
    pub eps_m: String,
}

pub fn noise_rows(preset: &str, mode: CoefficientMode, forms: &PresetForms) -> Vec<NoiseCsvRow> {
    [("p", &forms.p), ("q", &forms.q)]
        .into_iter()
        .map(|(quantity, form)| {
            let c = |s: ErrorSymbol| form.coefficient(s).to_string();
            NoiseCsvRow {
                preset: preset.to_string(),
                coefficients: mode_name(mode).to_string(),
                quantity: quantity.to_string(),
                eps_bell: c(ErrorSymbol::Bell),
                eps_cx: c(ErrorSymbol::Cx),
                eps_m: c(ErrorSymbol::Meas),
            }
        })
        .collect()
}

pub fn write_noise_csv<W: Write>(out: W, rows: &[NoiseCsvRow]) -> Result<(), ReportError> {
    write_table(out, rows)
}

/// A point on the small-modules threshold line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallModulesLineRow {
    pub eps_ryd: f64,
    pub eps_bell: f64,
}

/// `points` evenly spaced samples of the line across its domain.
pub fn small_modules_line_rows(points: usize) -> Vec<SmallModulesLineRow> {
    let max = 0.03 / 7.0;
    (0..points.max(2))
        .map(|i| {
            let eps_ryd = max * i as f64 / (points.max(2) - 1) as f64;
            SmallModulesLineRow {
                eps_ryd,
                eps_bell: small_modules_line(eps_ryd.min(max)).unwrap_or(0.0),
            }
        })
        .collect()
}

/// First line of a shot dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub schema_version: u32,
    pub spec: PointSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpShot {
    pub shot: u64,
    #[serde(flatten)]
    pub set: DetectionSet,
}

/// Writes a JSON-lines shot dump: a header line, then one line per shot.
pub fn write_shot_dump<W: Write>(mut out: W, header: &DumpHeader, shots: &[DumpShot]) -> Result<(), ReportError> {
    serde_json::to_writer(&mut out, header)?;
    writeln!(out)?;
    for s in shots {
        serde_json::to_writer(&mut out, s)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_shot_dump<R: BufRead>(input: R) -> Result<(DumpHeader, Vec<DumpShot>), ReportError> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(l) if l.trim().is_empty()));
    let (_, first) = lines.next().ok_or(ReportError::Format {
        line: 1,
        message: "empty shot dump".into(),
    })?;
    let header: DumpHeader = serde_json::from_str(&first?).map_err(|e| ReportError::Format {
        line: 1,
        message: format!("bad header: {e}"),
    })?;
    let mut shots = Vec::new();
    for (i, line) in lines {
        let shot = serde_json::from_str(&line?).map_err(|e| ReportError::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        shots.push(shot);
    }
    Ok((header, shots))
}

/// Hex SHA-256 of the compact JSON form of `value`. Object keys are
/// sorted, so the hash does not depend on field order.
pub fn content_hash(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(&sort_keys(value)).expect("JSON values always serialise");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn sort_keys(value: &serde_json::Value) -> serde_json::Value {
    match value {
        serde_json::Value::Object(map) => {
            let sorted: std::collections::BTreeMap<_, _> = map.iter().map(|(k, v)| (k.clone(), sort_keys(v))).collect();
            serde_json::Value::Object(sorted.into_iter().collect())
        }
        serde_json::Value::Array(items) => serde_json::Value::Array(items.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}

/// Record of one run. Timestamps live here and never in the CSV bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub workers: usize,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub summary: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SweepRow;

    #[test]
    fn sweep_round_trip() {
        let spec = PointSpec::new(NoiseModel::family(NoiseFamily::Combined), ErrorRates::new(0.01, 0.08, 0.01), 5);
        let sweep = SweepResult {
            rows: vec![SweepRow {
                spec: PointSpec { rounds: Some(5), ..spec },
                estimate: PfailEstimate::from_counts(12, 1000),
            }],
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &sweep).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "family,coefficients,eps_ryd,eps_bell,eps_m,L,rounds,weighting,shots,failures,p_fail,ci_lo,ci_hi\n"
        ));
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), sweep);
    }

    #[test]
    fn hash_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"a":1,"b":{"c":2,"d":3}}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"b":{"d":3,"c":2},"a":1}"#).unwrap();
        assert_eq!(content_hash(&a), content_hash(&b));
        assert_eq!(content_hash(&a).len(), 64);
    }

    #[test]
    fn dump_round_trip() {
        let header = DumpHeader {
            schema_version: SCHEMA_VERSION,
            spec: PointSpec::new(NoiseModel::UniformPq, ErrorRates::new(0.02, 0.0, 0.0), 3),
            seed: 9,
        };
        let shots = vec![DumpShot {
            shot: 0,
            set: DetectionSet {
                events: vec![(1, 2), (3, 2)],
                true_logical_flip: true,
            },
        }];
        let mut buf = Vec::new();
        write_shot_dump(&mut buf, &header, &shots).unwrap();
        let (h, s) = read_shot_dump(buf.as_slice()).unwrap();
        assert_eq!(h, header);
        assert_eq!(s, shots);
        assert!(read_shot_dump(&b""[..]).is_err());
    }

    #[test]
    fn small_modules_line_endpoints() {
        let rows = small_modules_line_rows(5);
        assert_eq!(rows.len(), 5);
        assert!((rows[0].eps_bell - 0.02).abs() < 1e-15);
        assert!(rows[4].eps_bell.abs() < 1e-15);
        assert!((rows[4].eps_ryd - 0.03 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn noise_rows_list_zero_coefficients() {
        let forms = crate::noise::table_forms(crate::noise::Preset::Bulk);
        let rows = noise_rows("bulk", CoefficientMode::TableRounded, &forms);
        assert_eq!(rows[0].eps_bell, "0");
        assert_eq!(rows[0].eps_cx, "2");
        assert_eq!(rows[1].eps_m, "1");
    }
}
