use proptest::prelude::*;
use rand::Rng as _;

use wdro::bounds::{
    adaptation_bound, comp_entropy_integral, rademacher_phi_bound, theorem1_bound, theorem2_bound, theorem3_bound,
    BoundReport, EntropyProfile,
};
use wdro::classes::{linear_predictors, make_quadratic_class};
use wdro::dual::local_worst_case_risk;
use wdro::erm::minimax_erm;
use wdro::{rng, AmbiguityBall, EmpiricalDistribution, InstanceSpace, Point};

fn reports(n: usize, rho: f64, p: f64, delta: f64) -> Vec<BoundReport> {
    vec![
        theorem2_bound(1.3, 2.0, 3.0, rho, p, 4.0, n, delta).unwrap(),
        theorem3_bound(1.3, 0.7, 3.0, rho, p, 4.0, n, delta).unwrap(),
        rademacher_phi_bound(1.3, 0.7, 3.0, rho, p, n).unwrap(),
        adaptation_bound(2.0, rho, 1.3, 3.0, p, 4.0, n, delta).unwrap(),
        theorem1_bound(&[(0.0, 1.0), (1.0, 0.5), (4.0, 0.2)], rho, p, 4.0, 1.3, n, 1.0).unwrap(),
    ]
}

proptest! {
    #[test]
    fn terms_sum_and_scale_with_root_n(
        n in 1usize..5000,
        rho in 0.01f64..2.0,
        p in 1.0f64..3.0,
        delta in 0.001f64..0.999,
    ) {
        for (a, b) in reports(n, rho, p, delta).iter().zip(reports(4 * n, rho, p, delta)) {
            prop_assert!(a.value >= 0.0);
            let sum: f64 = a.term_breakdown.iter().map(|t| t.value).sum();
            prop_assert!((sum - a.value).abs() <= 1e-12 * a.value.max(1.0));
            if a.bound_name == "data_dependent" {
                continue;
            }
            // Every term except the radius-only ambiguity term carries 1/sqrt(n).
            for (ta, tb) in a.term_breakdown.iter().zip(&b.term_breakdown).filter(|(t, _)| t.name != "ambiguity") {
                prop_assert!((tb.value * 2.0 - ta.value).abs() <= 1e-12 * ta.value.max(1e-300), "{} {}", a.bound_name, ta.name);
            }
        }
    }

    #[test]
    fn radius_monotonicity(n in 1usize..5000, r1 in 0.01f64..2.0, r2 in 0.01f64..2.0, p in 1.0f64..3.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let t3 = |r| theorem3_bound(1.0, 1.0, 2.0, r, p, 1.0, n, 0.05).unwrap().value;
        prop_assert!(t3(hi) <= t3(lo));
        let t2 = |r| theorem2_bound(1.0, 1.0, 2.0, r, p, 1.0, n, 0.05).unwrap().value;
        prop_assert!(t2(hi) <= t2(lo));
        let flat = |r| theorem2_bound(1.0, 1.0, 2.0, r, 1.0, 1.0, n, 0.05).unwrap().value;
        prop_assert_eq!(flat(hi), flat(lo));
    }
}

#[test]
fn theorem2_spot_value() {
    let r = theorem2_bound(1.0, 1.0, 1.0, 0.1, 2.0, 1.0, 100, 0.05).unwrap();
    assert!((r.term("complexity").unwrap() - 4.8).abs() < 1e-12);
    assert!((r.term("lambda_range").unwrap() - 48.0).abs() < 1e-12);
    assert!((r.term("deviation").unwrap() - 3.0 * (40f64.ln() / 200.0).sqrt()).abs() < 1e-15);
    assert!(r.vacuous);
}

#[test]
fn theorem3_large_radius_limit() {
    let r = theorem3_bound(1.0, 2.0, 1.5, 1e12, 2.0, 1.0, 64, 0.05).unwrap();
    let limit = 24.0 * 2.0 * 3f64.powi(2) / 8.0;
    assert!((r.term("lambda_range").unwrap() - limit).abs() < 1e-9);
}

#[test]
fn finite_class_complexity() {
    let c = comp_entropy_integral(&EntropyProfile::FiniteClass { size: 8, m: 2.0 }).unwrap();
    assert!((c - 2.0 * 8f64.ln().sqrt()).abs() < 1e-15);
    let t = comp_entropy_integral(&EntropyProfile::ExplicitTable {
        steps: vec![(0.5, 8.0), (1.0, 2.0)],
    })
    .unwrap();
    assert!((t - (0.5 * 8f64.ln().sqrt() + 0.5 * 2f64.ln().sqrt())).abs() < 1e-9);
}

/// Realized population excess worst-case risk of minimax ERM on a discrete
/// population against the Lipschitz and anchored bounds, over 200 samples.
/// These are high-probability statements, so a violation rate of 5% plus
/// binomial slack is allowed.
#[test]
fn realized_excess_stays_below_the_bounds() {
    let p = 1.0;
    let rho = 0.1;
    let n = 10;
    let space = InstanceSpace::lp_product(1, 1.0, 1.0, p).unwrap();
    let class = make_quadratic_class(
        linear_predictors(&[(vec![0.0], 0.0), (vec![0.5], 0.0), (vec![1.0], -0.2), (vec![-0.5], 0.1)]),
        &space,
    )
    .unwrap();
    let mut r = rng::seeded(5);
    let atoms: Vec<Point> = (0..30)
        .map(|_| {
            let x: f64 = r.random_range(-1.0..1.0);
            Point::labeled(vec![x], (0.6 * x + r.random_range(-0.3..0.3)).clamp(-1.0, 1.0))
        })
        .collect();
    let population = EmpiricalDistribution::uniform(atoms.clone()).unwrap();
    let ball = AmbiguityBall::new(p, rho).unwrap();
    let risks: Vec<f64> = class
        .members()
        .iter()
        .map(|f| local_worst_case_risk(f, &population, &ball, &atoms, &space).unwrap().value)
        .collect();
    let best = risks.iter().copied().fold(f64::INFINITY, f64::min);

    let m = class.upper_bound();
    let comp = comp_entropy_integral(&EntropyProfile::FiniteClass { size: class.len(), m }).unwrap();
    let l = class.lipschitz().unwrap();
    let diam = space.diameter();
    let c0 = class.get(0).anchor().unwrap().constant_for(p, diam).unwrap();
    let b2 = theorem2_bound(comp, l, diam, rho, p, m, n, 0.05).unwrap().value;
    let b3 = theorem3_bound(comp, c0, diam, rho, p, m, n, 0.05).unwrap().value;

    let mut violations = 0;
    for s in 0..200u64 {
        let mut r = rng::seeded(1000 + s);
        let pts: Vec<Point> = (0..n).map(|_| atoms[r.random_range(0..atoms.len())].clone()).collect();
        let sample = EmpiricalDistribution::uniform(pts).unwrap();
        let sel = minimax_erm(&class, &sample, &ball, &atoms, &space).unwrap().selected_index;
        let excess = risks[sel] - best;
        if excess > b2.min(b3) {
            violations += 1;
        }
    }
    // 5% of 200 plus three binomial standard deviations.
    assert!(violations as f64 <= 10.0 + 3.0 * (200.0f64 * 0.05 * 0.95).sqrt());
}
