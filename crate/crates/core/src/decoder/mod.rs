//! Matching graph construction and minimum-weight perfect matching decoding.

pub mod blossom;
pub mod bruteforce;
pub mod graph;

use serde::Serialize;
use thiserror::Error;

pub use blossom::{MatchOutcome, SparseBlossom};
pub use bruteforce::{decode_bruteforce, defect_distances, min_weight_dp, BRUTEFORCE_CAPACITY, DP_CAPACITY};
pub use graph::{Fault, GraphEdge, MatchingGraph, Weighting, WEIGHT_SCALE};

use crate::sampler::DetectionSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("mechanism {fault:?} has flip probability {probability}, which gives a non-positive weight")]
    NonDecodableWeight { probability: f64, fault: Fault },
    #[error("defect {index} is not a detector (graph has {num_nodes})")]
    DefectOutOfRange { index: usize, num_nodes: usize },
    #[error("defect {0} listed twice")]
    DuplicateDefect(usize),
    #[error("{defects} defects exceed the oracle capacity of {capacity}")]
    OracleCapacity { defects: usize, capacity: usize },
    #[error("defects cannot be perfectly matched (odd count with no reachable boundary)")]
    Unmatched,
}

/// Matched defect pairs (`None` is the boundary) and the implied logical flip.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Correction {
    pub pairs: Vec<(usize, Option<usize>)>,
    pub predicted_logical_flip: bool,
    /// Sum of the integer path weights of the pairs.
    pub total_weight: i64,
}

/// Decodes one detection set with the exact matcher.
pub fn decode_mwpm(graph: &MatchingGraph, events: &DetectionSet) -> Result<Correction, DecodeError> {
    let defects = events.detector_indices(graph.num_checks());
    let mut matcher = SparseBlossom::new(graph);
    let outcome = matcher.decode(&defects)?;
    Ok(Correction {
        pairs: matcher.pairs().collect(),
        predicted_logical_flip: outcome.predicted_flip,
        total_weight: outcome.total_weight,
    })
}

/// Exhaustive oracle on a detection set; see [`bruteforce::decode_bruteforce`].
pub fn decode_bruteforce_set(graph: &MatchingGraph, events: &DetectionSet) -> Result<Correction, DecodeError> {
    decode_bruteforce(graph, &events.detector_indices(graph.num_checks()))
}
