use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seamqec_core::geometry::CodeLayout;
use seamqec_core::noise::{FlipRates, RatesByRegion};
use seamqec_core::sampler::{ErrorPattern, Sampler, ShotScratch};

fn layout(l: usize) -> CodeLayout {
    CodeLayout::new(l, CodeLayout::central_seam_column(l)).unwrap()
}

/// Expected number of detection events per shot, summing over every
/// detector the probability that an odd number of its independent inputs
/// fired: `(1 - prod(1 - 2 p_i)) / 2`.
fn expected_events(layout: &CodeLayout, rounds: usize, rates: &RatesByRegion) -> f64 {
    let nc = layout.num_checks();
    let mut touching: Vec<Vec<f64>> = vec![Vec::new(); nc];
    for d in 0..layout.num_data() {
        for c in layout.data_checks(d).into_iter().flatten() {
            touching[c].push(rates.data_rate(layout.data_region(d)));
        }
    }
    let mut total = 0.0;
    for c in 0..nc {
        let q = rates.meas_rate(layout.check_region(c));
        for t in 1..=rounds + 1 {
            let mut inputs: Vec<f64> = Vec::new();
            if t <= rounds {
                inputs.extend(&touching[c]);
                inputs.push(q);
            }
            if t >= 2 {
                inputs.push(q);
            }
            let prod: f64 = inputs.iter().map(|p| 1.0 - 2.0 * p).product();
            total += (1.0 - prod) / 2.0;
        }
    }
    total
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn event_counts(sampler: &Sampler, seed: u64, shots: u64) -> Vec<f64> {
    let mut scratch = ShotScratch::default();
    let mut events = Vec::new();
    (0..shots)
        .map(|s| {
            sampler.sample_into(seed, s, &mut scratch, &mut events);
            events.len() as f64
        })
        .collect()
}

#[test]
fn measurement_only_event_count_matches_closed_form() {
    let l = 5;
    let layout = layout(l);
    let q = 0.03;
    let rates = RatesByRegion::uniform(FlipRates::new(0.0, q));
    let sampler = Sampler::new(&layout, l, &rates).unwrap();
    let counts = event_counts(&sampler, 17, 100_000);
    let (mean, sd) = mean_and_sd(&counts);
    // First and last detectors see one flip, the L - 1 in between see two.
    let nc = layout.num_checks() as f64;
    let closed = nc * (2.0 * q + (l as f64 - 1.0) * 2.0 * q * (1.0 - q));
    assert!((closed - expected_events(&layout, l, &rates)).abs() < 1e-9);
    let sigma = sd / (counts.len() as f64).sqrt();
    assert!((mean - closed).abs() < 3.0 * sigma, "mean {mean} expected {closed} sigma {sigma}");
}

#[test]
fn bulk_and_seam_event_count_matches_parity_sum() {
    let l = 5;
    let layout = layout(l);
    let rates = RatesByRegion::new(FlipRates::new(0.03, 0.03), FlipRates::new(0.075, 0.085));
    let sampler = Sampler::new(&layout, l, &rates).unwrap();
    let counts = event_counts(&sampler, 23, 100_000);
    let (mean, sd) = mean_and_sd(&counts);
    let expected = expected_events(&layout, l, &rates);
    let sigma = sd / (counts.len() as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * sigma, "mean {mean} expected {expected} sigma {sigma}");
}

fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, sx) = mean_and_sd(xs);
    let (my, sy) = mean_and_sd(ys);
    let n = xs.len() as f64;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / ((n - 1.0) * sx * sy)
}

#[test]
fn neighbouring_streams_are_uncorrelated() {
    let layout = layout(3);
    let rates = RatesByRegion::uniform(FlipRates::new(0.05, 0.05));
    let sampler = Sampler::new(&layout, 3, &rates).unwrap();
    let pairs = 1_000_000u64;
    let counts = event_counts(&sampler, 5, 2 * pairs);
    let even: Vec<f64> = counts.iter().step_by(2).copied().collect();
    let odd: Vec<f64> = counts.iter().skip(1).step_by(2).copied().collect();
    // Four standard errors of a null correlation.
    let bound = 4.0 / (pairs as f64).sqrt();
    let rho = correlation(&even, &odd);
    assert!(rho.abs() < bound, "adjacent shots: rho = {rho}");
    let other_seed = event_counts(&sampler, 6, pairs);
    let rho = correlation(&even, &other_seed[..pairs as usize]);
    assert!(rho.abs() < bound, "adjacent seeds: rho = {rho}");
}

#[test]
fn sampled_pattern_reproduces_the_shot() {
    let layout = layout(5);
    let rates = RatesByRegion::new(FlipRates::new(0.04, 0.05), FlipRates::new(0.1, 0.1));
    let sampler = Sampler::new(&layout, 5, &rates).unwrap();
    for shot in 0..200 {
        let pattern = sampler.sample_pattern(3, shot);
        assert_eq!(sampler.detect(&pattern).unwrap(), sampler.sample(3, shot));
    }
}

#[test]
fn reference_parity_tracks_flips_on_the_reference_string() {
    let layout = layout(5);
    let sampler = Sampler::new(&layout, 5, &RatesByRegion::uniform(FlipRates::ZERO)).unwrap();
    let reference = layout.logical_reference().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let pattern = ErrorPattern {
            data_flips: (0..rng.random_range(0..12))
                .map(|_| (rng.random_range(1..=5), rng.random_range(0..layout.num_data())))
                .collect(),
            meas_flips: vec![],
        };
        let on_reference = pattern.data_flips.iter().filter(|(_, d)| reference.contains(d)).count();
        assert_eq!(sampler.detect(&pattern).unwrap().true_logical_flip, on_reference % 2 == 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shots_are_deterministic(seed in any::<u64>(), shot in any::<u64>(), l in 2usize..7, p in 0.0f64..0.3) {
        let layout = layout(l);
        let rates = RatesByRegion::new(FlipRates::new(p, p / 2.0), FlipRates::new(p, p));
        let a = Sampler::new(&layout, l, &rates).unwrap();
        let b = Sampler::new(&layout, l, &rates).unwrap();
        prop_assert_eq!(a.sample(seed, shot), b.sample(seed, shot));
    }

    #[test]
    fn single_data_flip_fires_an_even_number_with_the_boundary(
        l in 2usize..8, round_frac in 0.0f64..1.0, data_frac in 0.0f64..1.0,
    ) {
        let layout = layout(l);
        let sampler = Sampler::new(&layout, l, &RatesByRegion::uniform(FlipRates::ZERO)).unwrap();
        let round = 1 + ((round_frac * l as f64) as usize).min(l - 1);
        let d = ((data_frac * layout.num_data() as f64) as usize).min(layout.num_data() - 1);
        let set = sampler.detect(&ErrorPattern { data_flips: vec![(round, d)], meas_flips: vec![] }).unwrap();
        let neighbours: Vec<usize> = layout.data_checks(d).into_iter().flatten().collect();
        let boundary = usize::from(neighbours.len() == 1);
        prop_assert_eq!((set.events.len() + boundary) % 2, 0);
        // The neighbouring checks fire in the round of the flip and nothing else does.
        prop_assert_eq!(set.events.len(), neighbours.len());
        for &(c, r) in &set.events {
            prop_assert_eq!(r, round);
            prop_assert!(neighbours.contains(&c));
        }
    }

    #[test]
    fn single_measurement_flip_fires_two_consecutive_rounds(l in 2usize..8, c_frac in 0.0f64..1.0, round_frac in 0.0f64..1.0) {
        let layout = layout(l);
        let sampler = Sampler::new(&layout, l, &RatesByRegion::uniform(FlipRates::ZERO)).unwrap();
        let round = 1 + ((round_frac * l as f64) as usize).min(l - 1);
        let c = ((c_frac * layout.num_checks() as f64) as usize).min(layout.num_checks() - 1);
        let set = sampler.detect(&ErrorPattern { data_flips: vec![], meas_flips: vec![(round, c)] }).unwrap();
        prop_assert_eq!(set.events, vec![(c, round), (c, round + 1)]);
    }
}
