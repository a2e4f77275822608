use proptest::prelude::*;

use wdro::casebook::{self, IllustrativeInstance};
use wdro::dual::local_worst_case_risk;
use wdro::space::sample_uniform_interval;
use wdro::transport::primal_worst_case_risk;
use wdro::{AmbiguityBall, EmpiricalDistribution, Point};

fn inst(p: f64, n: usize, rho: f64) -> IllustrativeInstance {
    IllustrativeInstance::new(10.0, p, n, rho, 0.05).unwrap()
}

#[test]
fn population_spot_value() {
    let v = casebook::analytic_population_worst_case(&inst(1.0, 10, 0.02)).value;
    assert!((v - 10.0 * 2f64.sqrt() * 0.02f64.sqrt()).abs() < 1e-12);
    assert!((v - 2.0).abs() < 1e-12);
    assert_eq!(casebook::analytic_population_worst_case(&inst(1.0, 10, 0.0)).value, 0.0);
}

#[test]
fn empirical_spot_value_matches_lp() {
    let sample = EmpiricalDistribution::uniform(
        [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|x| Point::scalar(*x)).collect(),
    )
    .unwrap();
    let i = inst(1.0, 5, 0.05);
    let analytic = casebook::analytic_empirical_worst_case(&i, &sample);
    assert!((analytic.value - 5.0).abs() < 1e-12);
    // rho = 0.05 > 0.1 / 5 is beyond the single-atom regime, and the LP
    // moves further atoms.
    assert!(analytic.regime.beyond_single_atom);
    let ball = AmbiguityBall::new(1.0, 0.05).unwrap();
    let lp = primal_worst_case_risk(casebook::class(10.0).get(1), &sample, &ball, &[casebook::step_point()], &casebook::space())
        .unwrap();
    assert!(lp.value < analytic.value);

    let small = inst(1.0, 5, 0.01);
    let analytic = casebook::analytic_empirical_worst_case(&small, &sample);
    assert!(!analytic.regime.beyond_single_atom);
    let ball = AmbiguityBall::new(1.0, 0.01).unwrap();
    let lp = primal_worst_case_risk(casebook::class(10.0).get(1), &sample, &ball, &[casebook::step_point()], &casebook::space())
        .unwrap();
    assert!((lp.value - analytic.value).abs() < 1e-9);
    assert!((analytic.value - 1.0).abs() < 1e-12);
}

#[test]
fn selection_probability_edges() {
    let edge = IllustrativeInstance::new(10.0, 1.0, 7, 0.1, 0.05).unwrap();
    assert_eq!(casebook::selection_probability(&edge).value, 0.0);
    let v = casebook::selection_probability(&inst(1.0, 10, 0.05)).value;
    assert!((v - 0.5f64.powi(10)).abs() < 1e-15);
    assert!(casebook::selection_probability(&inst(1.0, 10_000, 0.02)).value < 1e-300);
}

#[test]
fn excess_profile_pieces() {
    assert_eq!(casebook::excess_risk_profile(&inst(1.0, 3, 0.001)), 0.0);
    assert_eq!(casebook::excess_risk_profile(&inst(1.0, 3, 0.2)), 0.0);
    let v = casebook::excess_risk_profile(&inst(1.0, 3, 0.05));
    assert!((v - (10.0 * 2f64.sqrt() * 0.05f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((v - 2.1623).abs() < 1e-4);
}

/// At n = 3 the confidence threshold is `(1 - 0.05^(1/3)) / 10 > 0.05` and
/// `f_1` is selected with probability 1/8 > delta, so the 95% quantile of the
/// simulated excess equals the profile value.
#[test]
fn excess_profile_matches_simulated_quantile() {
    let i = inst(1.0, 3, 0.05);
    let runs = casebook::simulate(&i, 100_000, 123).unwrap();
    let q = casebook::excess_quantile(&runs, 0.95);
    assert!((q - casebook::excess_risk_profile(&i)).abs() < 1e-12);
    let freq = casebook::selection_frequency(&runs);
    assert!((freq - 0.125).abs() < 3.0 * (0.125f64 * 0.875 / 1e5).sqrt());
}

#[test]
fn worst_alpha_spot_value() {
    let a = casebook::worst_alpha(0.01, 0.5, 10, 1.0);
    assert!((a.value - (1.0 - 0.5f64.powf(0.1)) / 0.01).abs() < 1e-12);
    assert!(!a.regime.alpha_not_above_one);
    assert!(casebook::worst_alpha(0.01, 0.999_999, 10, 1.0).regime.alpha_not_above_one);
}

/// Excess at the constructed step height scales as `rho^(-p^2/(p+1))`.
#[test]
fn worst_alpha_excess_slope() {
    for p in [1.0, 1.5, 2.0] {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|k| {
                let rho = 10f64.powf(-8.0 + 2.0 * k as f64 / 19.0);
                let alpha = casebook::worst_alpha(rho, 0.5, 10, p).value;
                let i = IllustrativeInstance::new(alpha, p, 10, rho, 0.5).unwrap();
                let excess = casebook::analytic_population_worst_case(&i).value - 1.0;
                (rho.ln(), excess.ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|t| t.0).sum::<f64>() / n;
        let my = pts.iter().map(|t| t.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let want = -p * p / (p + 1.0);
        assert!((slope - want).abs() <= 0.05, "p={p}: slope {slope} vs {want}");
    }
}

#[test]
fn population_oracle_improves_with_refinement() {
    let i = inst(2.0, 10, 0.05);
    let exact = casebook::analytic_population_worst_case(&i).value;
    let coarse = (casebook::population_oracle(&i, 100).unwrap().value - exact).abs();
    let fine = (casebook::population_oracle(&i, 2000).unwrap().value - exact).abs();
    assert!(fine <= coarse);
    assert!(fine / exact < 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_member_has_unit_worst_case(seed in any::<u64>(), n in 1usize..15, rho in 0.0f64..1.5, p in prop::sample::select(vec![1.0, 2.0])) {
        let sample = sample_uniform_interval(n, seed).unwrap();
        let ball = AmbiguityBall::new(p, rho).unwrap();
        let f0 = casebook::class(10.0).get(0).clone();
        let dual = local_worst_case_risk(&f0, &sample, &ball, &[casebook::step_point()], &casebook::space()).unwrap();
        let primal = primal_worst_case_risk(&f0, &sample, &ball, &[casebook::step_point()], &casebook::space()).unwrap();
        prop_assert_eq!(dual.value, 1.0);
        prop_assert!((primal.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn in_regime_empirical_formula_is_exact(seed in any::<u64>(), n in 2usize..12, rho in 0.001f64..0.05, p in prop::sample::select(vec![1.0, 2.0])) {
        let sample = sample_uniform_interval(n, seed).unwrap();
        let i = inst(p, n, rho);
        let analytic = casebook::analytic_empirical_worst_case(&i, &sample);
        prop_assume!(!analytic.regime.beyond_single_atom);
        let ball = AmbiguityBall::new(p, rho).unwrap();
        let lp = primal_worst_case_risk(casebook::class(10.0).get(1), &sample, &ball, &[casebook::step_point()], &casebook::space()).unwrap();
        prop_assert!((lp.value - analytic.value).abs() <= 1e-9);
    }
}
