use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use seamqec_core::decoder::{decode_bruteforce, decode_mwpm, min_weight_dp, BRUTEFORCE_CAPACITY, DP_CAPACITY};
use seamqec_core::experiments::{run_sweep, threshold_curve_2d, PreparedPoint, ShotBudget};
use seamqec_core::noise::{exact_forms, forms, table_forms, CoefficientMode, Preset, RegionPreset};
use seamqec_core::rates::{fig3_curves, fig3_grid, rate_point, required_bell_rate, DesignKind, InterconnectDesign};
use seamqec_core::report::{
    content_hash, corner_rows, noise_rows, read_shot_dump, small_modules_line_rows, threshold_rows, write_shot_dump,
    write_table, DumpHeader, DumpShot, Fig3CsvRow, Manifest, RatesCsvRow, SweepCsvRow, SCHEMA_VERSION,
};
use seamqec_core::units::TimeUnit;

use crate::config::{self, DecodeCheckConfig, Fig3Config, RatesConfig, SweepConfig, ThresholdConfig};
use crate::{CliError, Command, Format, GlobalArgs};

/// What a finished command hands to the manifest.
pub struct Outcome {
    config: Value,
    seed: Option<u64>,
    summary: Value,
    /// Reported after the manifest is written.
    failure: Option<CliError>,
}

/// Writes tables into the output directory and remembers their names.
pub struct Output {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: PathBuf, format: Format) -> Self {
        Self {
            dir,
            format,
            written: Vec::new(),
        }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    fn table<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<(), CliError> {
        let name = format!("{stem}.{}", self.format.extension());
        let mut w = self.create(&name)?;
        match self.format {
            Format::Csv => write_table(&mut w, rows).with_context(|| format!("writing {name}"))?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, rows).with_context(|| format!("writing {name}"))?;
                writeln!(w).with_context(|| format!("writing {name}"))?;
            }
        }
        w.flush().with_context(|| format!("writing {name}"))?;
        Ok(())
    }

    pub fn manifest(
        &mut self,
        command: &str,
        outcome: Outcome,
        workers: usize,
        started_unix_s: u64,
        wall_time_s: f64,
    ) -> Result<(), CliError> {
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: content_hash(&outcome.config),
            config: outcome.config,
            seed: outcome.seed,
            workers,
            started_unix_s,
            wall_time_s,
            outputs: self.written.clone(),
            summary: outcome.summary,
        };
        let mut w = self.create("manifest.json")?;
        serde_json::to_writer_pretty(&mut w, &manifest).context("writing manifest.json")?;
        writeln!(w).context("writing manifest.json")?;
        w.flush().context("writing manifest.json")?;
        match outcome.failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn to_value<T: Serialize>(value: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(value).context("serialising configuration")?)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(rand::random);
    log::info!("seed {seed}");
    seed
}

fn load_or<T: serde::de::DeserializeOwned>(path: Option<&Path>, fallback: impl FnOnce() -> Option<T>, what: &str) -> Result<T, CliError> {
    match path {
        Some(p) => config::load(p),
        None => fallback().ok_or_else(|| CliError::Config(format!("{what} needs --config or --preset"))),
    }
}

pub fn dispatch(command: Command, global: &GlobalArgs, out: &mut Output) -> Result<Outcome, CliError> {
    let config_path = global.config.as_deref();
    match command {
        Command::Threshold { preset, shots } => {
            let mut cfg: ThresholdConfig = load_or(config_path, || preset.map(|p| p.config()), "threshold")?;
            if let Some(n) = shots {
                cfg.budget = ShotBudget::fixed(n);
            }
            cfg.validate()?;
            threshold(cfg, resolve_seed(global.seed), out)
        }
        Command::Sweep { preset, shots } => {
            let from_preset = || {
                preset.map(|p| {
                    let t = p.config();
                    SweepConfig {
                        schema_version: SCHEMA_VERSION,
                        model: t.model,
                        eps_grid: t.rays[0].grid.iter().map(|&x| t.rays[0].at(x)).collect(),
                        distances: t.distances,
                        weighting: t.weighting,
                        budget: t.budget,
                    }
                })
            };
            let mut cfg: SweepConfig = load_or(config_path, from_preset, "sweep")?;
            if let Some(n) = shots {
                cfg.budget = ShotBudget::fixed(n);
            }
            cfg.validate()?;
            sweep(cfg, resolve_seed(global.seed), out)
        }
        Command::Rates { design, distance, n, rate } => {
            let mut cfg: RatesConfig = load_or(config_path, || Some(RatesConfig::default()), "rates")?;
            if !design.is_empty() {
                cfg.designs = design
                    .iter()
                    .map(|d| DesignKind::parse(d).map(InterconnectDesign::preset))
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
            if let Some(l) = distance {
                cfg.distance = l;
            }
            if !n.is_empty() {
                cfg.n = n;
            }
            rate.apply(&mut cfg.options);
            cfg.validate()?;
            rates(cfg, out)
        }
        Command::DeriveNoise => derive_noise(out),
        Command::DecodeCheck { dump, shots, write_dump } => {
            let mut cfg: DecodeCheckConfig = load_or(config_path, || Some(DecodeCheckConfig::default()), "decode-check")?;
            if let Some(n) = shots {
                cfg.shots = n;
            }
            cfg.validate()?;
            decode_check(cfg, dump.as_deref(), write_dump, global.seed, out)
        }
        Command::Fig3 { rate } => {
            let mut cfg: Fig3Config = load_or(config_path, || Some(Fig3Config::default()), "fig3")?;
            rate.apply(&mut cfg.options);
            cfg.validate()?;
            fig3(cfg, out)
        }
    }
}

fn threshold(cfg: ThresholdConfig, seed: u64, out: &mut Output) -> Result<Outcome, CliError> {
    let outcomes = threshold_curve_2d(cfg.model, &cfg.rays, &cfg.distances, cfg.weighting, cfg.budget, seed)
        .context("running threshold sweep")?;
    let rows = threshold_rows(cfg.model.name(), &outcomes);
    let sweep: Vec<SweepCsvRow> = outcomes
        .iter()
        .flat_map(|o| o.sweep.rows.iter().map(SweepCsvRow::from))
        .collect();
    out.table("threshold", &rows)?;
    out.table("sweep", &sweep)?;
    out.table("small_modules_line", &small_modules_line_rows(31))?;

    for r in &rows {
        match r.t_th {
            Some(t) => log::info!(
                "{}: threshold at t = {t:.5} +- {:.5}",
                r.family,
                r.t_uncertainty.unwrap_or(f64::NAN)
            ),
            None => log::warn!("{}: {}", r.family, r.status),
        }
    }
    let missing: Vec<String> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.t_th.is_none())
        .map(|(i, r)| format!("ray {i}: {}", r.status))
        .collect();
    Ok(Outcome {
        config: to_value(&cfg)?,
        seed: Some(seed),
        summary: json!({ "thresholds": rows }),
        failure: (!missing.is_empty()).then(|| CliError::NoCrossing(missing.join("; "))),
    })
}

fn sweep(cfg: SweepConfig, seed: u64, out: &mut Output) -> Result<Outcome, CliError> {
    let result = run_sweep(cfg.model, &cfg.eps_grid, &cfg.distances, cfg.weighting, cfg.budget, seed)
        .context("running sweep")?;
    let rows: Vec<SweepCsvRow> = result.rows.iter().map(SweepCsvRow::from).collect();
    out.table("sweep", &rows)?;
    let shots: u64 = rows.iter().map(|r| r.shots).sum();
    Ok(Outcome {
        config: to_value(&cfg)?,
        seed: Some(seed),
        summary: json!({ "points": rows.len(), "shots": shots }),
        failure: None,
    })
}

fn rates(cfg: RatesConfig, out: &mut Output) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for design in &cfg.designs {
        for &n in &cfg.n {
            let p = rate_point(design, n, cfg.distance, cfg.tau_dec, cfg.options)
                .map_err(|e| CliError::Config(e.to_string()))?;
            rows.push(RatesCsvRow::from(&p));
        }
    }
    out.table("rates", &rows)?;
    let corners = corner_rows(&cfg.designs, cfg.options.cap);
    out.table("corners", &corners)?;
    Ok(Outcome {
        config: to_value(&cfg)?,
        seed: None,
        summary: json!({ "rows": rows.len(), "corners": corners }),
        failure: None,
    })
}

fn derive_noise(out: &mut Output) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut deviation = serde_json::Map::new();
    for preset in Preset::ALL {
        for mode in [CoefficientMode::TableRounded, CoefficientMode::ExactCounting] {
            let f = forms(RegionPreset::new(preset, mode)).context("propagating Pauli errors")?;
            rows.extend(noise_rows(preset.name(), mode, &f));
        }
        let exact = exact_forms(preset).context("propagating Pauli errors")?;
        let table = table_forms(preset);
        deviation.insert(
            preset.name().to_string(),
            json!({
                "p": exact.p.max_relative_deviation(&table.p),
                "q": exact.q.max_relative_deviation(&table.q),
            }),
        );
    }
    out.table("noise", &rows)?;
    Ok(Outcome {
        config: json!({}),
        seed: None,
        summary: json!({ "max_relative_deviation_of_printed_forms": deviation }),
        failure: None,
    })
}

#[derive(Debug, Serialize)]
struct DecodeCheckRow {
    shot: u64,
    defects: usize,
    mwpm_weight: i64,
    oracle: &'static str,
    oracle_weight: Option<i64>,
    agree: Option<bool>,
}

fn decode_check(
    cfg: DecodeCheckConfig,
    dump: Option<&Path>,
    write_dump: bool,
    seed: Option<u64>,
    out: &mut Output,
) -> Result<Outcome, CliError> {
    let (spec, seed, shots, replayed) = match dump {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let (header, shots) = read_shot_dump(BufReader::new(file))
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            (header.spec, header.seed, shots, true)
        }
        None => {
            let seed = resolve_seed(seed);
            let point = PreparedPoint::new(&cfg.spec).context("preparing point")?;
            let shots = (0..cfg.shots)
                .map(|shot| DumpShot {
                    shot,
                    set: point.sampler.sample(seed, shot),
                })
                .collect();
            (cfg.spec, seed, shots, false)
        }
    };
    let point = PreparedPoint::new(&spec).context("preparing point")?;

    let mut rows = Vec::with_capacity(shots.len());
    let mut replay_mismatches = Vec::new();
    for s in &shots {
        if replayed && point.sampler.sample(seed, s.shot) != s.set {
            replay_mismatches.push(s.shot);
        }
        let defects = s.set.detector_indices(point.layout.num_checks());
        let fast = decode_mwpm(&point.graph, &s.set).with_context(|| format!("decoding shot {}", s.shot))?;
        let (oracle, weight) = if defects.len() <= BRUTEFORCE_CAPACITY {
            ("bruteforce", Some(decode_bruteforce(&point.graph, &defects).map(|c| c.total_weight)))
        } else if defects.len() <= DP_CAPACITY {
            ("dp", Some(min_weight_dp(&point.graph, &defects)))
        } else {
            ("none", None)
        };
        let weight = weight
            .transpose()
            .with_context(|| format!("oracle on shot {}", s.shot))?;
        rows.push(DecodeCheckRow {
            shot: s.shot,
            defects: defects.len(),
            mwpm_weight: fast.total_weight,
            oracle,
            oracle_weight: weight,
            agree: weight.map(|w| w == fast.total_weight),
        });
    }
    out.table("decode_check", &rows)?;
    if write_dump && !replayed {
        let header = DumpHeader {
            schema_version: SCHEMA_VERSION,
            spec,
            seed,
        };
        let mut w = out.create("shots.jsonl")?;
        write_shot_dump(&mut w, &header, &shots).context("writing shots.jsonl")?;
    }

    let checked = rows.iter().filter(|r| r.agree.is_some()).count();
    let disagree: Vec<u64> = rows.iter().filter(|r| r.agree == Some(false)).map(|r| r.shot).collect();
    let mut problems = Vec::new();
    if !disagree.is_empty() {
        problems.push(format!("{} of {checked} checked shots differ, first shot {}", disagree.len(), disagree[0]));
    }
    if !replay_mismatches.is_empty() {
        problems.push(format!(
            "{} dumped shots do not replay from the seed, first shot {}",
            replay_mismatches.len(),
            replay_mismatches[0]
        ));
    }
    log::info!("{checked} of {} shots checked against an oracle, {} disagree", rows.len(), disagree.len());
    Ok(Outcome {
        config: json!({ "spec": spec, "shots": shots.len(), "dump": dump.map(|p| p.display().to_string()) }),
        seed: Some(seed),
        summary: json!({
            "shots": rows.len(),
            "checked": checked,
            "skipped": rows.len() - checked,
            "disagree": disagree.len(),
            "replay_mismatches": replay_mismatches.len(),
        }),
        failure: (!problems.is_empty()).then(|| CliError::OracleMismatch(problems.join("; "))),
    })
}

fn fig3(cfg: Fig3Config, out: &mut Output) -> Result<Outcome, CliError> {
    let ns = fig3_grid(cfg.max_n, cfg.per_decade);
    let curves = fig3_curves(&cfg.designs, &ns, cfg.options).map_err(|e| CliError::Config(e.to_string()))?;
    let required = required_bell_rate(cfg.distance, cfg.reference_cycle).in_unit(TimeUnit::Us);
    let rows: Vec<Fig3CsvRow> = curves
        .iter()
        .map(|r| Fig3CsvRow {
            design: r.design.name().to_string(),
            n: r.n,
            attempt_rate_per_us: r.attempt_rate_per_us,
            bell_rate_per_us: r.bell_rate_per_us,
            required_rate_per_us: required,
        })
        .collect();
    out.table("fig3", &rows)?;
    let corners = corner_rows(&cfg.designs, cfg.options.cap);
    out.table("fig3_corners", &corners)?;
    Ok(Outcome {
        config: to_value(&cfg)?,
        seed: None,
        summary: json!({ "required_rate_per_us": required, "corners": corners }),
        failure: None,
    })
}
