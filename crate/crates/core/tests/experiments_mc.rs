use seamqec_core::decoder::Weighting;
use seamqec_core::experiments::{
    estimate_pfail, find_threshold, run_sweep, small_modules_line, NoiseModel, PointSpec, Ray, ShotBudget,
};
use seamqec_core::noise::{ErrorRates, NoiseFamily};

fn pfail(model: NoiseModel, eps: ErrorRates, distance: usize, shots: u64, seed: u64) -> f64 {
    estimate_pfail(&PointSpec::new(model, eps, distance), shots, seed).unwrap().p_fail
}

#[test]
fn zero_rates_never_fail() {
    for family in [NoiseFamily::Bulk, NoiseFamily::Combined, NoiseFamily::Boundary, NoiseFamily::SmallModules] {
        for l in [3, 5] {
            assert_eq!(pfail(NoiseModel::family(family), ErrorRates::zero(), l, 2000, 1), 0.0);
        }
    }
}

#[test]
fn saturated_noise_fails_half_the_time() {
    let est = estimate_pfail(&PointSpec::new(NoiseModel::UniformPq, ErrorRates::new(0.25, 0.0, 0.0), 5), 20_000, 3)
        .unwrap();
    assert!(est.ci_lo < 0.5 + 0.02 && est.ci_hi > 0.5 - 0.02, "{est:?}");
}

#[test]
fn failure_rate_falls_with_distance_below_threshold() {
    let eps = ErrorRates::new(0.005, 0.0, 0.005);
    let sweep = run_sweep(
        NoiseModel::family(NoiseFamily::Bulk),
        &[eps],
        &[3, 5, 7],
        Weighting::LogLikelihood,
        ShotBudget::fixed(40_000),
        5,
    )
    .unwrap();
    let p: Vec<_> = sweep.rows.iter().map(|r| r.estimate).collect();
    for pair in p.windows(2) {
        assert!(pair[1].ci_hi < pair[0].ci_lo, "{pair:?}");
    }
}

#[test]
fn failure_rate_grows_with_noise_at_fixed_seed() {
    // The shared seed makes every fault at a lower rate also present at a
    // higher one, so the counts are almost always ordered.
    let grid: Vec<ErrorRates> = [0.004, 0.007, 0.010, 0.013].iter().map(|&e| ErrorRates::new(e, 8.0 * e, e)).collect();
    let sweep = run_sweep(
        NoiseModel::family(NoiseFamily::Combined),
        &grid,
        &[5],
        Weighting::LogLikelihood,
        ShotBudget::fixed(10_000),
        9,
    )
    .unwrap();
    let failures: Vec<u64> = sweep.rows.iter().map(|r| r.estimate.failures).collect();
    assert!(failures.windows(2).all(|w| w[0] < w[1]), "{failures:?}");
}

#[test]
fn seam_noise_only_affects_seam_layouts() {
    let eps = ErrorRates::new(0.0, 0.2, 0.0);
    assert_eq!(pfail(NoiseModel::family(NoiseFamily::Bulk), eps, 5, 2000, 2), 0.0);
    assert!(pfail(NoiseModel::family(NoiseFamily::Boundary), eps, 5, 2000, 2) > 0.0);
}

#[test]
fn weighted_matching_beats_unweighted_on_the_seam() {
    let eps = ErrorRates::new(0.003, 0.12, 0.003);
    let mut spec = PointSpec::new(NoiseModel::family(NoiseFamily::Combined), eps, 7);
    let weighted = estimate_pfail(&spec, 100_000, 4).unwrap();
    spec.weighting = Weighting::Unweighted;
    let unweighted = estimate_pfail(&spec, 100_000, 4).unwrap();
    // Three standard deviations of the difference of two independent counts.
    let sd = ((weighted.failures + unweighted.failures) as f64).sqrt();
    assert!(
        (unweighted.failures as f64) - (weighted.failures as f64) > 3.0 * sd,
        "{weighted:?} vs {unweighted:?}"
    );
}

/// Value of `1.5 eps_bell + 7 eps_cx` at the small-modules threshold for a
/// fixed `eps_cx = eps_m`, found by sweeping `eps_bell`.
fn small_modules_level(eps_cx: f64) -> f64 {
    let levels = [0.030, 0.033, 0.036, 0.039, 0.042];
    let ray = Ray::bell_only(eps_cx, levels.iter().map(|c| (c - 7.0 * eps_cx) / 1.5).collect());
    let grid: Vec<ErrorRates> = ray.grid.iter().map(|&t| ray.at(t)).collect();
    let sweep = run_sweep(
        NoiseModel::family(NoiseFamily::SmallModules),
        &grid,
        &[5, 7, 9],
        Weighting::LogLikelihood,
        ShotBudget::fixed(10_000),
        6,
    )
    .unwrap();
    let t = find_threshold(&sweep.curves(|r| r.spec.eps.eps_bell), "small_modules").unwrap();
    1.5 * t.value + 7.0 * eps_cx
}

#[test]
fn small_modules_threshold_runs_parallel_to_its_line() {
    // The line puts the mean of p and q at 3%. With q close to 2p the
    // simulated threshold sits higher, but along a line of the same slope.
    let a = small_modules_level(0.001);
    let b = small_modules_level(0.003);
    assert!((a - b).abs() < 0.05 * a, "levels {a} and {b}");
    for level in [a, b] {
        assert!(level > 0.03 && level < 1.3 * 0.03, "level {level}");
    }
    assert!((small_modules_line(0.001).unwrap() * 1.5 + 0.007 - 0.03).abs() < 1e-15);
}
