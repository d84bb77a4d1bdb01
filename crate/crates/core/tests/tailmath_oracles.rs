use bigjump_core::dist::HeavyDistribution;
use bigjump_core::tailmath::{
    check_small_tau_condition, convolution_tail_ratio, light_long_convolution_ratio, sstar_ratio, tail_integral,
};
use proptest::prelude::*;

/// Composite trapezoid rule on `n` equal panels.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + h * i as f64)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

fn pareto_tail(alpha: f64, v: f64) -> f64 {
    if v <= 1.0 {
        1.0
    } else {
        v.powf(-alpha)
    }
}

#[test]
fn pareto_self_convolution_against_trapezoid() {
    let (alpha, x) = (1.5, 200.0);
    let d = HeavyDistribution::pareto(alpha, 1.0).unwrap();
    // P(X1 + X2 > x) = ∫_1^{x−1} f(y) F̄(x − y) dy + F̄(x − 1)
    let f = |y: f64| alpha * y.powf(-alpha - 1.0);
    let oracle = (trapezoid(|y| f(y) * pareto_tail(alpha, x - y), 1.0, x - 1.0, 2_000_000)
        + pareto_tail(alpha, x - 1.0))
        / pareto_tail(alpha, x);
    let r = convolution_tail_ratio(&d, x).unwrap();
    assert!((r.ratio - oracle).abs() < 1e-6 * oracle, "{} vs {oracle}", r.ratio);
    assert!((r.ratio - 2.0).abs() < 0.1, "{}", r.ratio);
}

#[test]
fn exponential_self_convolution_is_gamma_tail() {
    let d = HeavyDistribution::exponential(1.0).unwrap();
    let r = convolution_tail_ratio(&d, 20.0).unwrap();
    assert!((r.ratio - 21.0).abs() < 0.05 * 21.0);
}

#[test]
fn sstar_against_trapezoid_and_trend() {
    let alpha = 1.5;
    let d = HeavyDistribution::pareto(alpha, 1.0).unwrap();
    let mut previous = f64::INFINITY;
    for &x in &[50.0, 100.0, 200.0, 500.0] {
        // grid spacing 1/2000 puts the kinks at 1 and x − 1 on nodes
        let n = (x * 2000.0) as usize;
        let num = trapezoid(|y| pareto_tail(alpha, x - y) * pareto_tail(alpha, y), 0.0, x, n);
        let oracle = num / (2.0 * pareto_tail(alpha, x) * 3.0);
        let r = sstar_ratio(&d, x).unwrap();
        assert!((r.ratio - oracle).abs() < 1e-6 * oracle, "x={x}: {} vs {oracle}", r.ratio);
        let gap = (r.ratio - 1.0).abs();
        assert!(gap <= previous + r.error_bound, "x={x}: gap {gap} grew from {previous}");
        previous = gap;
    }
    assert!(previous < 0.1);
}

#[test]
fn sstar_exponential_diverges() {
    // ∫_0^x e^{−(x−y)} e^{−y} dy = x e^{−x}; ratio x/2
    let d = HeavyDistribution::exponential(1.0).unwrap();
    let r = sstar_ratio(&d, 20.0).unwrap();
    assert!((r.ratio - 10.0).abs() < 1e-6, "{}", r.ratio);
    assert!(r.ratio > 5.0);
}

#[test]
fn light_long_against_trapezoid() {
    let g = HeavyDistribution::exponential(1.0).unwrap();
    let b = HeavyDistribution::pareto(1.5, 1.0).unwrap();
    let x = 300.0;
    let oracle = (trapezoid(|y| (-y).exp() * pareto_tail(1.5, x - y), 0.0, x - 1.0, 1_000_000) + (-(x - 1.0)).exp())
        / pareto_tail(1.5, x);
    let r = light_long_convolution_ratio(&g, &b, x).unwrap();
    assert!((r.ratio - oracle).abs() < 1e-6 * oracle, "{} vs {oracle}", r.ratio);
    assert!((r.ratio - 1.0).abs() < 0.05);
}

#[test]
fn small_tau_condition_examples() {
    let jump = HeavyDistribution::pareto(1.5, 1.0).unwrap();
    let grid = [10.0, 100.0, 1000.0];
    let rep = check_small_tau_condition(&HeavyDistribution::exponential(1.0).unwrap(), 1.0, &jump, &grid).unwrap();
    assert!(rep.pass);
    let rep = check_small_tau_condition(&HeavyDistribution::pareto(1.2, 1.0).unwrap(), 1.0, &jump, &grid).unwrap();
    assert!(!rep.pass);
}

#[test]
fn weibull_and_lognormal_sstar_are_finite() {
    for d in [
        HeavyDistribution::weibull(0.5, 1.0).unwrap(),
        HeavyDistribution::lognormal(0.0, 1.0).unwrap(),
    ] {
        let r = sstar_ratio(&d, 50.0).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0, "{d}: {}", r.ratio);
    }
}

fn any_law() -> impl Strategy<Value = HeavyDistribution> {
    prop_oneof![
        (1.1f64..4.0, 0.5f64..3.0).prop_map(|(a, m)| HeavyDistribution::pareto(a, m).unwrap()),
        (0.3f64..2.0, 0.5f64..3.0).prop_map(|(k, s)| HeavyDistribution::weibull(k, s).unwrap()),
        (-1.0f64..1.0, 0.3f64..1.5).prop_map(|(m, s)| HeavyDistribution::lognormal(m, s).unwrap()),
        (0.2f64..3.0).prop_map(|r| HeavyDistribution::exponential(r).unwrap()),
        (1.1f64..3.0, 0.0f64..6.0).prop_map(|(a, s)| HeavyDistribution::pareto(a, 1.0)
            .unwrap()
            .shifted(s)
            .unwrap()
            .positive_part()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_integral_is_additive(d in any_law(), x in -2.0f64..30.0, l1 in 0.0f64..20.0, l2 in 0.0f64..20.0) {
        let whole = tail_integral(&d, x, l1 + l2).unwrap();
        let parts = tail_integral(&d, x, l1).unwrap().value + tail_integral(&d, x + l1, l2).unwrap().value;
        prop_assert!((whole.value - parts).abs() <= 1e-8 * whole.value.max(1e-300) + 4.0 * whole.error + 1e-15,
            "{} vs {}", whole.value, parts);
    }

    #[test]
    fn tail_integral_sandwich(d in any_law(), x in -2.0f64..50.0, len in 0.0f64..40.0) {
        let q = tail_integral(&d, x, len).unwrap();
        let tol = 1e-8 * q.value + q.error + 1e-15;
        prop_assert!(q.value >= len * d.tail(x + len) - tol);
        prop_assert!(q.value <= len * d.tail(x) + tol);
    }

    #[test]
    fn light_long_identity(x in -10.0f64..1e5) {
        let zero = HeavyDistribution::deterministic(0.0).unwrap();
        let b = HeavyDistribution::pareto(1.5, 1.0).unwrap();
        prop_assert_eq!(light_long_convolution_ratio(&zero, &b, x).unwrap().ratio, 1.0);
    }

    #[test]
    fn convolution_ratio_respects_long_tail_bound(alpha in 1.1f64..3.0, x in 20.0f64..2000.0) {
        let d = HeavyDistribution::pareto(alpha, 1.0).unwrap();
        let r = convolution_tail_ratio(&d, x).unwrap();
        // P(X1 + X2 > x) ≥ P(max > x) = 2F̄ − F̄²
        prop_assert!(r.ratio >= 2.0 - d.tail(x) - 1e-7 - r.error_bound, "{}", r.ratio);
    }
}
