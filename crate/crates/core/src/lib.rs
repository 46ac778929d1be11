//! Surface-code simulation with a noisy seam between modules, and rate
//! models for the photonic links that supply the seam's Bell pairs.

pub mod decoder;
pub mod experiments;
pub mod geometry;
pub mod noise;
pub mod rates;
pub mod report;
pub mod sampler;
pub mod units;

pub use decoder::{decode_bruteforce_set, decode_mwpm, Correction, DecodeError, MatchingGraph, Weighting};
pub use experiments::{
    estimate_pfail, find_threshold, fit_simple_model, PfailEstimate, PointSpec, SweepResult, ThresholdEstimate,
};
pub use geometry::{CodeLayout, GeometryError, Region};
pub use noise::{CoefficientMode, ErrorRates, FlipRates, NoiseFamily, Preset, RatesByRegion, RegionPreset};
pub use rates::{rate_point, DesignKind, InterconnectDesign, RateOptions, RatePoint};
pub use sampler::{sample_shot, DetectionSet, ShotConfig};
pub use units::{Length, LengthUnit, Rate, Speed, Time, TimeUnit};
