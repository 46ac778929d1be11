//! Exhaustive and dynamic-programming matching oracles for small defect sets.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::graph::MatchingGraph;
use super::{Correction, DecodeError};

/// Largest defect count accepted by [`decode_bruteforce`].
pub const BRUTEFORCE_CAPACITY: usize = 12;
/// Largest defect count accepted by [`min_weight_dp`].
pub const DP_CAPACITY: usize = 22;

/// Shortest-path weight and reference parity from each defect to every other
/// defect and to the boundary. Paths never pass through the boundary.
#[derive(Debug, Clone)]
pub struct DefectDistances {
    /// `pair[i][j]`, `None` when unreachable.
    pub pair: Vec<Vec<Option<(i64, bool)>>>,
    pub boundary: Vec<Option<(i64, bool)>>,
}

pub fn defect_distances(graph: &MatchingGraph, defects: &[usize]) -> DefectDistances {
    let n = graph.num_nodes();
    let mut pair = Vec::with_capacity(defects.len());
    let mut boundary = Vec::with_capacity(defects.len());
    let mut dist = vec![i64::MAX; n + 1];
    let mut parity = vec![false; n + 1];
    for &s in defects {
        dist.iter_mut().for_each(|d| *d = i64::MAX);
        let mut heap = BinaryHeap::new();
        dist[s] = 0;
        parity[s] = false;
        heap.push(Reverse((0i64, s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] || u == n {
                continue;
            }
            for adj in graph.neighbours(u) {
                let v = adj.to as usize;
                let nd = d + adj.weight;
                if nd < dist[v] {
                    dist[v] = nd;
                    parity[v] = parity[u] ^ adj.parity;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        let at = |v: usize| (dist[v] != i64::MAX).then(|| (dist[v], parity[v]));
        pair.push(defects.iter().map(|&t| at(t)).collect());
        boundary.push(at(n));
    }
    DefectDistances { pair, boundary }
}

fn check_defects(graph: &MatchingGraph, defects: &[usize]) -> Result<(), DecodeError> {
    let n = graph.num_nodes();
    for (i, &d) in defects.iter().enumerate() {
        if d >= n {
            return Err(DecodeError::DefectOutOfRange { index: d, num_nodes: n });
        }
        if defects[..i].contains(&d) {
            return Err(DecodeError::DuplicateDefect(d));
        }
    }
    Ok(())
}

struct Search<'a> {
    dist: &'a DefectDistances,
    used: Vec<bool>,
    current: Vec<(usize, Option<usize>)>,
    best: Option<(i64, Vec<(usize, Option<usize>)>)>,
}

impl Search<'_> {
    fn run(&mut self, weight: i64) {
        // Weights are positive, so a partial pairing that already matches the
        // best total cannot improve on it, and an equal complete pairing found
        // later is lexicographically larger.
        if self.best.as_ref().is_some_and(|(w, _)| weight >= *w) {
            return;
        }
        let Some(i) = self.used.iter().position(|u| !u) else {
            self.best = Some((weight, self.current.clone()));
            return;
        };
        self.used[i] = true;
        for j in i + 1..self.used.len() {
            if self.used[j] {
                continue;
            }
            if let Some((w, _)) = self.dist.pair[i][j] {
                self.used[j] = true;
                self.current.push((i, Some(j)));
                self.run(weight + w);
                self.current.pop();
                self.used[j] = false;
            }
        }
        if let Some((w, _)) = self.dist.boundary[i] {
            self.current.push((i, None));
            self.run(weight + w);
            self.current.pop();
        }
        self.used[i] = false;
    }
}

/// Enumerates every pairing of the defects (each defect matched to another
/// or to the boundary) and returns the lightest. Among equally light
/// pairings the lexicographically first, with the boundary ordered after
/// every defect, wins.
pub fn decode_bruteforce(graph: &MatchingGraph, defects: &[usize]) -> Result<Correction, DecodeError> {
    check_defects(graph, defects)?;
    if defects.len() > BRUTEFORCE_CAPACITY {
        return Err(DecodeError::OracleCapacity {
            defects: defects.len(),
            capacity: BRUTEFORCE_CAPACITY,
        });
    }
    let dist = defect_distances(graph, defects);
    let mut search = Search {
        dist: &dist,
        used: vec![false; defects.len()],
        current: Vec::new(),
        best: None,
    };
    search.run(0);
    let (total_weight, pairs) = search.best.ok_or(DecodeError::Unmatched)?;
    let mut flip = false;
    for &(i, j) in &pairs {
        let (_, p) = match j {
            Some(j) => dist.pair[i][j].unwrap(),
            None => dist.boundary[i].unwrap(),
        };
        flip ^= p;
    }
    Ok(Correction {
        pairs: pairs
            .into_iter()
            .map(|(i, j)| (defects[i], j.map(|j| defects[j])))
            .collect(),
        predicted_logical_flip: flip,
        total_weight,
    })
}

/// Minimum matching weight by dynamic programming over defect subsets.
pub fn min_weight_dp(graph: &MatchingGraph, defects: &[usize]) -> Result<i64, DecodeError> {
    check_defects(graph, defects)?;
    let k = defects.len();
    if k > DP_CAPACITY {
        return Err(DecodeError::OracleCapacity {
            defects: k,
            capacity: DP_CAPACITY,
        });
    }
    let dist = defect_distances(graph, defects);
    let full = (1usize << k) - 1;
    let mut best = vec![i64::MAX; 1 << k];
    best[0] = 0;
    // best[mask] covers exactly the defects in `mask`; the lowest defect is
    // always the one being matched.
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut value = i64::MAX;
        if let (Some((w, _)), true) = (dist.boundary[i], best[rest] != i64::MAX) {
            value = value.min(w + best[rest]);
        }
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            let sub = rest & !(1 << j);
            if let (Some((w, _)), true) = (dist.pair[i][j], best[sub] != i64::MAX) {
                value = value.min(w + best[sub]);
            }
        }
        best[mask] = value;
    }
    if best[full] == i64::MAX {
        Err(DecodeError::Unmatched)
    } else {
        Ok(best[full])
    }
}
