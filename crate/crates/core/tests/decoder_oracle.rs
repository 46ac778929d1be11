use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seamqec_core::decoder::{
    decode_bruteforce, decode_mwpm, min_weight_dp, MatchingGraph, SparseBlossom, Weighting,
};
use seamqec_core::geometry::CodeLayout;
use seamqec_core::noise::{FlipRates, RatesByRegion};
use seamqec_core::sampler::{DetectionSet, Sampler};

fn random_rates(rng: &mut ChaCha8Rng) -> RatesByRegion {
    let mut r = || rng.random_range(0.001..0.2);
    RatesByRegion::new(FlipRates::new(r(), r()), FlipRates::new(r(), r()))
}

fn graph_for(l: usize, rates: &RatesByRegion) -> (CodeLayout, MatchingGraph) {
    let layout = CodeLayout::new(l, CodeLayout::central_seam_column(l)).unwrap();
    let graph = MatchingGraph::new(&layout, l, rates, Weighting::LogLikelihood).unwrap();
    (layout, graph)
}

#[test]
fn empty_events_decode_to_nothing() {
    let (_, graph) = graph_for(3, &RatesByRegion::uniform(FlipRates::new(0.01, 0.01)));
    let c = decode_mwpm(&graph, &DetectionSet::default()).unwrap();
    assert!(c.pairs.is_empty());
    assert!(!c.predicted_logical_flip);
    assert_eq!(c.total_weight, 0);
}

#[test]
fn adjacent_defects_pair_up() {
    let (layout, graph) = graph_for(7, &RatesByRegion::uniform(FlipRates::new(0.01, 0.01)));
    // Two checks in the middle of the lattice sharing a data qubit.
    let centre = layout.num_checks() / 2;
    let defects = [graph.node(centre, 3), graph.node(centre + 1, 3)];
    let mut matcher = SparseBlossom::new(&graph);
    let outcome = matcher.decode(&defects).unwrap();
    let pairs: Vec<_> = matcher.pairs().collect();
    assert_eq!(pairs.len(), 1);
    assert!(pairs[0].1.is_some());
    assert!(!outcome.predicted_flip);
}

#[test]
fn thousand_random_instances_match_the_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 1000 {
        let l = if rng.random_bool(0.5) { 3 } else { 5 };
        let rates = random_rates(&mut rng);
        let (_, graph) = graph_for(l, &rates);
        let k = rng.random_range(0..=12usize);
        let mut nodes: Vec<usize> = (0..graph.num_nodes()).collect();
        nodes.shuffle(&mut rng);
        let defects = &nodes[..k];
        let mut matcher = SparseBlossom::new(&graph);
        let fast = matcher.decode(defects).unwrap();
        let slow = decode_bruteforce(&graph, defects).unwrap();
        assert_eq!(fast.total_weight, slow.total_weight, "L={l} defects={defects:?}");
        checked += 1;
    }
}

#[test]
fn sampled_shots_match_the_dp_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for shot in 0..4000u64 {
        let l = [3, 5, 7][shot as usize % 3];
        let rates = RatesByRegion::new(FlipRates::new(0.02, 0.03), FlipRates::new(0.08, 0.1));
        let (layout, graph) = graph_for(l, &rates);
        let sampler = Sampler::new(&layout, l, &rates).unwrap();
        let set = sampler.sample(rng.random(), shot);
        let defects = set.detector_indices(layout.num_checks());
        if defects.len() > 20 {
            continue;
        }
        let mut matcher = SparseBlossom::new(&graph);
        let fast = matcher.decode(&defects).unwrap();
        assert_eq!(fast.total_weight, min_weight_dp(&graph, &defects).unwrap(), "{defects:?}");
        checked += 1;
    }
    assert!(checked > 1000);
}

#[test]
fn pairs_cover_every_defect_once() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rates = RatesByRegion::uniform(FlipRates::new(0.04, 0.04));
    let (layout, graph) = graph_for(9, &rates);
    let sampler = Sampler::new(&layout, 9, &rates).unwrap();
    let mut matcher = SparseBlossom::new(&graph);
    for shot in 0..300 {
        let set = sampler.sample(rng.random(), shot);
        let mut defects = set.detector_indices(layout.num_checks());
        matcher.decode(&defects).unwrap();
        let mut covered: Vec<usize> = matcher
            .pairs()
            .flat_map(|(a, b)| std::iter::once(a).chain(b))
            .collect();
        covered.sort();
        defects.sort();
        assert_eq!(covered, defects);
    }
}

#[test]
fn near_zero_rate_edges_are_never_used() {
    // Seam data qubits almost never flip; every other mechanism is noisy.
    let rates = RatesByRegion::new(FlipRates::new(0.05, 0.05), FlipRates::new(1e-9, 0.05));
    let (layout, graph) = graph_for(5, &rates);
    let marked: Vec<bool> = graph
        .edges()
        .iter()
        .map(|e| e.probability < 1e-6)
        .collect();
    assert!(marked.iter().any(|m| *m));
    let sampler = Sampler::new(&layout, 5, &rates).unwrap();
    for shot in 0..100 {
        let set = sampler.sample(11, shot);
        let correction = decode_mwpm(&graph, &set).unwrap();
        for (a, b) in correction.pairs {
            let path = graph.shortest_path(a, b).unwrap();
            assert!(path.iter().all(|&e| !marked[e]), "shot {shot} used a marked edge");
        }
    }
}

#[test]
fn decoder_errors() {
    let rates = RatesByRegion::new(FlipRates::ZERO, FlipRates::new(0.1, 0.1));
    let (_, graph) = graph_for(3, &rates);
    let mut matcher = SparseBlossom::new(&graph);
    assert!(matcher.decode(&[graph.num_nodes()]).is_err());
    assert!(matcher.decode(&[1, 1]).is_err());
    // Only the seam column has edges; a lone bulk defect cannot be matched.
    assert!(matcher.decode(&[0]).is_err());
    // The matcher is reusable after an error.
    assert!(matcher.decode(&[]).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_dp_oracle_on_arbitrary_defects(
        seed in any::<u64>(),
        l in 2usize..6,
        k in 0usize..16,
        unweighted in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rates = random_rates(&mut rng);
        let layout = CodeLayout::new(l, CodeLayout::central_seam_column(l)).unwrap();
        let weighting = if unweighted { Weighting::Unweighted } else { Weighting::LogLikelihood };
        let graph = MatchingGraph::new(&layout, l, &rates, weighting).unwrap();
        let mut nodes: Vec<usize> = (0..graph.num_nodes()).collect();
        nodes.shuffle(&mut rng);
        let defects = &nodes[..k.min(nodes.len())];
        let mut matcher = SparseBlossom::new(&graph);
        let fast = matcher.decode(defects).unwrap();
        prop_assert_eq!(fast.total_weight, min_weight_dp(&graph, defects).unwrap());
    }
}
