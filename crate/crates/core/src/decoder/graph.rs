//! Space-time matching graph for the phenomenological model.
//!
//! Detector nodes are `(round - 1) * num_checks + check` for rounds
//! `1..=rounds + 1`, plus a single virtual boundary node. A data-qubit flip in
//! round `t` is a spatial edge in layer `t` (to the boundary for qubits on the
//! top and bottom rows). A measurement flip in round `t` is a temporal edge
//! between layers `t` and `t + 1`. The final readout is perfect, so layer
//! `rounds + 1` has no spatial edges.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::DecodeError;
use crate::geometry::CodeLayout;
use crate::noise::RatesByRegion;

/// Resolution of the integer weights used by the matcher: an edge of
/// log-likelihood weight `w` becomes `2 * round(w * WEIGHT_SCALE)`.
pub const WEIGHT_SCALE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `ln((1 - r) / r)` per mechanism.
    #[default]
    LogLikelihood,
    /// Every edge weighs the same.
    Unweighted,
}

/// The fault mechanism behind an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Fault {
    Data { data: usize, round: usize },
    Measurement { check: usize, round: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphEdge {
    pub a: usize,
    /// `None` for an edge to the boundary.
    pub b: Option<usize>,
    pub probability: f64,
    pub weight: f64,
    pub int_weight: i64,
    pub fault: Fault,
    /// Whether the fault flips the logical reference parity.
    pub crosses_reference: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Adjacent {
    /// Neighbour node, or `num_nodes` for the boundary.
    pub to: u32,
    pub weight: i64,
    pub parity: bool,
    pub edge: u32,
}

#[derive(Debug, Clone)]
pub struct MatchingGraph {
    num_checks: usize,
    rounds: usize,
    weighting: Weighting,
    edges: Vec<GraphEdge>,
    adj_start: Vec<usize>,
    adj: Vec<Adjacent>,
}

fn int_weight(weight: f64) -> i64 {
    2 * ((weight * WEIGHT_SCALE).round() as i64).max(1)
}

impl MatchingGraph {
    pub fn new(
        layout: &CodeLayout,
        rounds: usize,
        rates: &RatesByRegion,
        weighting: Weighting,
    ) -> Result<Self, DecodeError> {
        let nc = layout.num_checks();
        let mut edges = Vec::new();
        let mut push = |a: usize, b: Option<usize>, r: f64, fault: Fault, crosses: bool| {
            if r <= 0.0 {
                return Ok(());
            }
            if r >= 0.5 {
                return Err(DecodeError::NonDecodableWeight { probability: r, fault });
            }
            let weight = match weighting {
                Weighting::LogLikelihood => ((1.0 - r) / r).ln(),
                Weighting::Unweighted => 1.0,
            };
            let int_weight = match weighting {
                Weighting::LogLikelihood => int_weight(weight),
                Weighting::Unweighted => 2,
            };
            edges.push(GraphEdge {
                a,
                b,
                probability: r,
                weight,
                int_weight,
                fault,
                crosses_reference: crosses,
            });
            Ok(())
        };
        let mut in_reference = vec![false; layout.num_data()];
        for &d in layout.logical_reference() {
            in_reference[d] = true;
        }
        for round in 1..=rounds {
            let layer = (round - 1) * nc;
            for d in 0..layout.num_data() {
                let r = rates.data_rate(layout.data_region(d));
                let [c0, c1] = layout.data_checks(d);
                let c0 = c0.expect("every data qubit touches a check");
                push(
                    layer + c0,
                    c1.map(|c| layer + c),
                    r,
                    Fault::Data { data: d, round },
                    in_reference[d],
                )?;
            }
            for c in 0..nc {
                let r = rates.meas_rate(layout.check_region(c));
                push(
                    layer + c,
                    Some(layer + nc + c),
                    r,
                    Fault::Measurement { check: c, round },
                    false,
                )?;
            }
        }
        let num_nodes = (rounds + 1) * nc;
        let (adj_start, adj) = build_adjacency(num_nodes, &edges);
        Ok(Self {
            num_checks: nc,
            rounds,
            weighting,
            edges,
            adj_start,
            adj,
        })
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    /// Detector nodes, excluding the boundary.
    pub fn num_nodes(&self) -> usize {
        (self.rounds + 1) * self.num_checks
    }

    /// Index used for the virtual boundary node.
    pub fn boundary(&self) -> usize {
        self.num_nodes()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn node(&self, check: usize, round: usize) -> usize {
        (round - 1) * self.num_checks + check
    }

    pub(crate) fn neighbours(&self, node: usize) -> &[Adjacent] {
        &self.adj[self.adj_start[node]..self.adj_start[node + 1]]
    }

    /// Shortest path (by integer weight) between two detectors or from a
    /// detector to the boundary, as edge indices. Paths never pass through
    /// the boundary node.
    pub fn shortest_path(&self, from: usize, to: Option<usize>) -> Option<Vec<usize>> {
        let n = self.num_nodes();
        let target = to.unwrap_or(n);
        let mut dist = vec![i64::MAX; n + 1];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n + 1];
        let mut heap = BinaryHeap::new();
        dist[from] = 0;
        heap.push(Reverse((0i64, from)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if u == target {
                break;
            }
            if u == n {
                continue;
            }
            for adj in self.neighbours(u) {
                let v = adj.to as usize;
                let nd = d + adj.weight;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = Some((u, adj.edge as usize));
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        if dist[target] == i64::MAX {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = target;
        while let Some((p, e)) = prev[cur] {
            path.push(e);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

/// CSR adjacency. Parallel edges collapse onto the lightest one (the first
/// on ties).
fn build_adjacency(num_nodes: usize, edges: &[GraphEdge]) -> (Vec<usize>, Vec<Adjacent>) {
    let mut lists: Vec<Vec<Adjacent>> = vec![Vec::new(); num_nodes];
    let mut add = |from: usize, to: u32, e: &GraphEdge, index: usize| {
        let entry = Adjacent {
            to,
            weight: e.int_weight,
            parity: e.crosses_reference,
            edge: index as u32,
        };
        match lists[from].iter_mut().find(|x| x.to == to) {
            Some(existing) if existing.weight > entry.weight => *existing = entry,
            Some(_) => {}
            None => lists[from].push(entry),
        }
    };
    for (i, e) in edges.iter().enumerate() {
        match e.b {
            Some(b) => {
                add(e.a, b as u32, e, i);
                add(b, e.a as u32, e, i);
            }
            None => add(e.a, num_nodes as u32, e, i),
        }
    }
    let mut start = Vec::with_capacity(num_nodes + 1);
    let mut adj = Vec::new();
    for list in lists {
        start.push(adj.len());
        adj.extend(list);
    }
    start.push(adj.len());
    (start, adj)
}
