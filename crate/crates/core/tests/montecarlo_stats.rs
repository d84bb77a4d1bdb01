use bigjump_core::asymptotics::fixed_t_equivalence_ratio;
use bigjump_core::montecarlo::{
    calibrate_band_width, conditional_big_jump_prob, detect_big_jump, estimate_exceedance, estimate_exceedance_grid,
    BigJumpParams, MCEstimate, Statistic,
};
use bigjump_core::simulate::simulate_path;
use bigjump_core::{Error, HeavyDistribution, ProcessSpec, RandomStream};
use proptest::prelude::*;

fn jump_law() -> HeavyDistribution {
    HeavyDistribution::pareto(1.5, 1.0).unwrap().shifted(4.0).unwrap()
}

#[test]
fn poisson_first_jump_probability() {
    // unit jumps, no drift: M_1 > 1/2 iff N_1 ≥ 1
    let spec = ProcessSpec::compound_poisson(HeavyDistribution::deterministic(1.0).unwrap(), 0.7, 0.0).unwrap();
    let e = estimate_exceedance(&spec, 1.0, 0.5, 200_000, 3, Statistic::Max).unwrap();
    let exact = 1.0 - (-0.7f64).exp();
    assert!((e.p_hat - exact).abs() < 4.0 * e.stderr, "{} vs {exact}", e.p_hat);
}

#[test]
fn brownian_reference_value() {
    // P(sup_{s≤1} (W_s − s) > 1) = 1 − Φ(2) + e^{-2}Φ(0)
    let spec = ProcessSpec::jump_diffusion(jump_law(), 0.0, 1.0, -1.0).unwrap();
    let e = estimate_exceedance(&spec, 1.0, 1.0, 200_000, 4, Statistic::Max).unwrap();
    let exact = 0.022_750_131_948_179_2 + 0.5 * (-2.0f64).exp();
    assert!((e.p_hat - exact).abs() < 4.0 * e.stderr, "{} vs {exact}", e.p_hat);
}

#[test]
fn seeds_agree_within_intervals() {
    let spec = ProcessSpec::compound_poisson(jump_law(), 1.0, 0.0).unwrap();
    let a = estimate_exceedance(&spec, 20.0, 30.0, 100_000, 1, Statistic::Max).unwrap();
    let b = estimate_exceedance(&spec, 20.0, 30.0, 100_000, 2, Statistic::Max).unwrap();
    assert_ne!(a.hits, b.hits);
    assert!((a.p_hat - b.p_hat).abs() < 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
}

#[test]
fn max_dominates_terminal_on_shared_paths() {
    let spec = ProcessSpec::jump_diffusion(HeavyDistribution::pareto(1.5, 1.0).unwrap(), 1.0, 1.0, -4.0).unwrap();
    let xs = [0.0, 5.0, 50.0];
    let grid = estimate_exceedance_grid(&spec, &[1.0, 10.0], &xs, 20_000, 9).unwrap();
    for ti in 0..2 {
        for xi in 0..xs.len() {
            assert!(grid.estimate(ti, xi, Statistic::Max).hits >= grid.estimate(ti, xi, Statistic::Terminal).hits);
        }
    }
}

#[test]
fn equivalence_ratio_uses_nested_variance() {
    let m = MCEstimate::from_counts(110, 100_000, 0);
    let x = MCEstimate::from_counts(100, 100_000, 0);
    let r = fixed_t_equivalence_ratio(&m, &x, true).unwrap();
    assert!((r.ratio - 1.1).abs() < 1e-12);
    // R²/n·(1/p_X − 1/p_M) = 1.21/1e5·(1000 − 909.09…)
    let var: f64 = 1.21 / 1e5 * (1e3 - 1e5 / 110.0);
    assert!((r.stderr - var.sqrt()).abs() < 1e-12);
    let indep = fixed_t_equivalence_ratio(&m, &x, false).unwrap();
    assert!(indep.stderr > r.stderr);
    assert!(matches!(
        fixed_t_equivalence_ratio(&m, &MCEstimate::from_counts(0, 100_000, 0), true),
        Err(Error::InsufficientHits(_))
    ));
}

#[test]
fn big_jump_needs_negative_drift_and_hits() {
    let up = ProcessSpec::compound_poisson(jump_law(), 1.0, 2.0).unwrap();
    let params = BigJumpParams::new(0.1, 10.0, 1.0, 1.0).unwrap();
    assert!(conditional_big_jump_prob(&up, 10.0, 50.0, &params, 100, 1).is_err());
    let down = ProcessSpec::compound_poisson(jump_law(), 1.0, 0.0).unwrap();
    let params = BigJumpParams::for_spec(&down, 10.0).unwrap();
    assert!(matches!(
        conditional_big_jump_prob(&down, 1.0, 1e12, &params, 100, 1),
        Err(Error::InsufficientHits(_))
    ));
}

#[test]
fn calibrated_band_covers_pilot_paths() {
    let spec = ProcessSpec::compound_poisson(jump_law(), 1.0, 0.0).unwrap();
    let a90 = calibrate_band_width(&spec, 50.0, 0.1, 0.9, 2000, 5).unwrap();
    let a50 = calibrate_band_width(&spec, 50.0, 0.1, 0.5, 2000, 5).unwrap();
    assert!(a90 >= a50 && a50 > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exceedance_nonincreasing_in_x(seed in 0u64..1000, x in 0.0f64..40.0, dx in 0.0f64..40.0) {
        let spec = ProcessSpec::compound_poisson(jump_law(), 1.0, -0.2).unwrap();
        let grid = estimate_exceedance_grid(&spec, &[10.0], &[x, x + dx], 2000, seed).unwrap();
        for stat in [Statistic::Max, Statistic::Terminal] {
            prop_assert!(grid.estimate(0, 1, stat).hits <= grid.estimate(0, 0, stat).hits);
        }
    }

    #[test]
    fn detection_monotone_in_band(seed in 0u64..10_000, a1 in 0.5f64..50.0, da in 0.0f64..50.0, x in 5.0f64..60.0) {
        let spec = ProcessSpec::jump_diffusion(HeavyDistribution::pareto(1.5, 1.0).unwrap(), 1.0, 0.5, -4.0).unwrap();
        let path = simulate_path(&spec, 30.0, &mut RandomStream::for_path(seed, 0), true).unwrap();
        let narrow = BigJumpParams::new(0.1, a1, spec.drift_rate(), spec.lambda()).unwrap();
        let wide = BigJumpParams { a_band: a1 + da, ..narrow };
        if detect_big_jump(&path, x, &narrow).0 {
            prop_assert!(detect_big_jump(&path, x, &wide).0);
        }
    }
}
