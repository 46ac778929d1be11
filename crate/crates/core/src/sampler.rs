//! Monte Carlo shots of the phenomenological bit-flip process.
//!
//! A shot runs `rounds` noisy cycles followed by one perfect readout. In each
//! noisy cycle every data qubit flips with its region's `p_data`, then every
//! bit-flip check is measured and its outcome flips with `q_meas`. Detection
//! events are XORs of consecutive measured syndromes, with an all-zero record
//! before the first round, so events live in rounds `1..=rounds + 1`.
//!
//! Randomness comes from ChaCha8 keyed by the seed, with the shot index as the
//! stream number. One `u64` is drawn per (round, site) in a fixed order (data
//! qubits, then checks, round by round), so a shot depends only on
//! `(seed, shot_index)` and the configuration.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::CodeLayout;
use crate::noise::{NoiseError, RatesByRegion};

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("at least one noisy round is required")]
    NoRounds,
    #[error(transparent)]
    Rates(#[from] NoiseError),
    #[error("injected {what} index {index} out of range")]
    InjectionOutOfRange { what: &'static str, index: usize },
}

/// Everything needed to reproduce one shot.
#[derive(Debug, Clone)]
pub struct ShotConfig<'a> {
    pub layout: &'a CodeLayout,
    pub rounds: usize,
    pub rates: RatesByRegion,
    pub seed: u64,
    pub shot_index: u64,
}

/// Detection events of one shot, as `(check, round)` pairs ordered by round
/// then check, plus whether the sampled errors flipped the logical reference.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DetectionSet {
    pub events: Vec<(usize, usize)>,
    pub true_logical_flip: bool,
}

impl DetectionSet {
    /// Detector indices `(round - 1) * num_checks + check`.
    pub fn detector_indices(&self, num_checks: usize) -> Vec<usize> {
        self.events
            .iter()
            .map(|&(check, round)| (round - 1) * num_checks + check)
            .collect()
    }

    pub fn from_detector_indices(indices: &[usize], num_checks: usize, flip: bool) -> Self {
        Self {
            events: indices
                .iter()
                .map(|&i| (i % num_checks, i / num_checks + 1))
                .collect(),
            true_logical_flip: flip,
        }
    }
}

/// An explicit set of faults: data flips `(round, data)` and measurement
/// flips `(round, check)`, rounds counted from 1.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorPattern {
    pub data_flips: Vec<(usize, usize)>,
    pub meas_flips: Vec<(usize, usize)>,
}

/// Reusable buffers for [`Sampler::sample_into`].
#[derive(Debug, Clone, Default)]
pub struct ShotScratch {
    syndrome: Vec<bool>,
    measured: Vec<bool>,
}

/// Precomputed per-site thresholds for one layout and rate assignment.
#[derive(Debug, Clone)]
pub struct Sampler {
    num_checks: usize,
    num_data: usize,
    rounds: usize,
    data_checks: Vec<[u32; 2]>,
    in_reference: Vec<bool>,
    data_threshold: Vec<u64>,
    meas_threshold: Vec<u64>,
}

/// `u < threshold(p)` for a uniform `u64` has probability `p` (to 2^-64).
fn threshold(p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// The data qubits whose joint parity is the logical bit-flip outcome.
pub fn logical_flip_reference(layout: &CodeLayout) -> Vec<usize> {
    layout.logical_reference().to_vec()
}

impl Sampler {
    pub fn new(layout: &CodeLayout, rounds: usize, rates: &RatesByRegion) -> Result<Self, SamplerError> {
        if rounds == 0 {
            return Err(SamplerError::NoRounds);
        }
        rates.validate()?;
        let mut in_reference = vec![false; layout.num_data()];
        for &d in layout.logical_reference() {
            in_reference[d] = true;
        }
        Ok(Self {
            num_checks: layout.num_checks(),
            num_data: layout.num_data(),
            rounds,
            data_checks: (0..layout.num_data())
                .map(|d| layout.data_checks(d).map(|c| c.map_or(NONE, |c| c as u32)))
                .collect(),
            in_reference,
            data_threshold: (0..layout.num_data())
                .map(|d| threshold(rates.data_rate(layout.data_region(d))))
                .collect(),
            meas_threshold: (0..layout.num_checks())
                .map(|c| threshold(rates.meas_rate(layout.check_region(c))))
                .collect(),
        })
    }

    pub fn from_config(config: &ShotConfig<'_>) -> Result<Self, SamplerError> {
        Self::new(config.layout, config.rounds, &config.rates)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    /// Number of detector nodes, `(rounds + 1) * num_checks`.
    pub fn num_detectors(&self) -> usize {
        (self.rounds + 1) * self.num_checks
    }

    fn rng(seed: u64, shot_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot_index);
        rng
    }

    fn flip_data(&self, d: usize, syndrome: &mut [bool]) -> bool {
        for c in self.data_checks[d] {
            if c != NONE {
                syndrome[c as usize] ^= true;
            }
        }
        self.in_reference[d]
    }

    /// Samples one shot, appending detector indices to `events` (cleared
    /// first) and returning the true logical flip.
    pub fn sample_into(
        &self,
        seed: u64,
        shot_index: u64,
        scratch: &mut ShotScratch,
        events: &mut Vec<usize>,
    ) -> bool {
        let mut rng = Self::rng(seed, shot_index);
        let nc = self.num_checks;
        scratch.syndrome.clear();
        scratch.syndrome.resize(nc, false);
        scratch.measured.clear();
        scratch.measured.resize(nc, false);
        events.clear();
        let mut flip = false;
        for round in 0..self.rounds {
            for d in 0..self.num_data {
                if rng.next_u64() < self.data_threshold[d] {
                    flip ^= self.flip_data(d, &mut scratch.syndrome);
                }
            }
            for c in 0..nc {
                let m = scratch.syndrome[c] ^ (rng.next_u64() < self.meas_threshold[c]);
                if m != scratch.measured[c] {
                    events.push(round * nc + c);
                    scratch.measured[c] = m;
                }
            }
        }
        for c in 0..nc {
            if scratch.syndrome[c] != scratch.measured[c] {
                events.push(self.rounds * nc + c);
            }
        }
        flip
    }

    pub fn sample(&self, seed: u64, shot_index: u64) -> DetectionSet {
        let mut scratch = ShotScratch::default();
        let mut events = Vec::new();
        let flip = self.sample_into(seed, shot_index, &mut scratch, &mut events);
        DetectionSet::from_detector_indices(&events, self.num_checks, flip)
    }

    /// The faults drawn for a shot, using the same stream as [`Self::sample`].
    pub fn sample_pattern(&self, seed: u64, shot_index: u64) -> ErrorPattern {
        let mut rng = Self::rng(seed, shot_index);
        let mut pattern = ErrorPattern::default();
        for round in 1..=self.rounds {
            for d in 0..self.num_data {
                if rng.next_u64() < self.data_threshold[d] {
                    pattern.data_flips.push((round, d));
                }
            }
            for c in 0..self.num_checks {
                if rng.next_u64() < self.meas_threshold[c] {
                    pattern.meas_flips.push((round, c));
                }
            }
        }
        pattern
    }

    /// Detection events produced by an explicit fault pattern. Faults in
    /// rounds outside `1..=rounds` are rejected.
    pub fn detect(&self, pattern: &ErrorPattern) -> Result<DetectionSet, SamplerError> {
        let nc = self.num_checks;
        let mut data = vec![Vec::new(); self.rounds];
        let mut meas = vec![vec![false; nc]; self.rounds];
        for &(round, d) in &pattern.data_flips {
            if d >= self.num_data || round == 0 || round > self.rounds {
                return Err(SamplerError::InjectionOutOfRange { what: "data", index: d });
            }
            data[round - 1].push(d);
        }
        for &(round, c) in &pattern.meas_flips {
            if c >= nc || round == 0 || round > self.rounds {
                return Err(SamplerError::InjectionOutOfRange { what: "check", index: c });
            }
            meas[round - 1][c] ^= true;
        }
        let mut syndrome = vec![false; nc];
        let mut previous = vec![false; nc];
        let mut flip = false;
        let mut events = Vec::new();
        for round in 0..=self.rounds {
            if round < self.rounds {
                for &d in &data[round] {
                    flip ^= self.flip_data(d, &mut syndrome);
                }
            }
            for c in 0..nc {
                let m = syndrome[c] ^ (round < self.rounds && meas[round][c]);
                if m != previous[c] {
                    events.push((c, round + 1));
                }
                previous[c] = m;
            }
        }
        Ok(DetectionSet {
            events,
            true_logical_flip: flip,
        })
    }
}

/// One-off shot; builds a [`Sampler`] each call.
pub fn sample_shot(config: &ShotConfig<'_>) -> Result<DetectionSet, SamplerError> {
    Ok(Sampler::from_config(config)?.sample(config.seed, config.shot_index))
}
