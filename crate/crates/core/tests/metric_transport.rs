use proptest::prelude::*;
use rand::Rng as _;

use wdro::dataset::{load_dataset, save_dataset, Schema};
use wdro::hypothesis::StepLoss;
use wdro::transport::{primal_worst_case_risk, wasserstein};
use wdro::verify::{self, HypothesisKind};
use wdro::{rng, AmbiguityBall, EmpiricalDistribution, Hypothesis, InstanceSpace, Point};

fn spaces() -> Vec<InstanceSpace> {
    vec![
        InstanceSpace::euclidean(2, 1.0, 1.0).unwrap(),
        InstanceSpace::euclidean(3, 2.0, 0.5).unwrap(),
        InstanceSpace::lp_product(2, 1.0, 1.0, 1.0).unwrap(),
        InstanceSpace::lp_product(3, 1.0, 2.0, 3.0).unwrap(),
        InstanceSpace::feature_only(2, 1.5, 2.0).unwrap(),
        InstanceSpace::interval(-1.0, 3.0).unwrap(),
        InstanceSpace::classification(2, 1.0).unwrap(),
    ]
}

#[test]
fn distances_stay_below_the_diameter_and_obey_the_triangle_inequality() {
    for (k, space) in spaces().iter().enumerate() {
        let mut r = rng::seeded(k as u64);
        for _ in 0..1000 {
            let a = space.sample_point(&mut r);
            let b = space.sample_point(&mut r);
            let c = space.sample_point(&mut r);
            let ab = space.distance(&a, &b).unwrap();
            let bc = space.distance(&b, &c).unwrap();
            let ac = space.distance(&a, &c).unwrap();
            assert!(ab <= space.diameter() + 1e-12, "{ab} > diam {}", space.diameter());
            assert!(ac <= ab + bc + 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn save_then_load_is_identity(seed in any::<u64>(), n in 1usize..20) {
        let space = InstanceSpace::euclidean(2, 1.0, 1.0).unwrap();
        let mut r = rng::seeded(seed);
        let pts: Vec<Point> = (0..n).map(|_| space.sample_point(&mut r)).collect();
        let dist = EmpiricalDistribution::uniform(pts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        save_dataset(&path, &dist).unwrap();
        let back = load_dataset(&path, Schema::Labeled, &space).unwrap();
        prop_assert_eq!(back.support(), dist.support());
        prop_assert_eq!(back.weights(), dist.weights());
    }
}

fn small(r: &mut rng::Rng, space: &InstanceSpace) -> EmpiricalDistribution {
    verify::random_sample(r, space, 6).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wasserstein_triangle_inequality(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let mut r = rng::seeded(seed);
        let space = verify::random_space(&mut r, p).unwrap();
        let (a, b, c) = (small(&mut r, &space), small(&mut r, &space), small(&mut r, &space));
        let ab = wasserstein(p, &a, &b, &space).unwrap().0;
        let bc = wasserstein(p, &b, &c, &space).unwrap().0;
        let ac = wasserstein(p, &a, &c, &space).unwrap().0;
        prop_assert!(ac <= ab + bc + 1e-7);
    }

    #[test]
    fn w1_never_exceeds_w2(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let space = InstanceSpace::euclidean(r.random_range(1..=3), 1.0, 1.0).unwrap();
        let (a, b) = (small(&mut r, &space), small(&mut r, &space));
        let w1 = wasserstein(1.0, &a, &b, &space).unwrap().0;
        let w2 = wasserstein(2.0, &a, &b, &space).unwrap().0;
        prop_assert!(w1 <= w2 + 1e-9);
    }

    #[test]
    fn optimal_plans_are_feasible(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 2.0])) {
        let mut r = rng::seeded(seed);
        let space = verify::random_space(&mut r, p).unwrap();
        let (a, b) = (small(&mut r, &space), small(&mut r, &space));
        let (w, plan) = wasserstein(p, &a, &b, &space).unwrap();
        plan.verify(a.weights(), b.weights(), &space, 1e-9).unwrap();
        prop_assert!((plan.recompute_cost(&space).unwrap().powf(1.0 / p) - w).abs() <= 1e-9);
    }

    /// Uniform measures on three atoms each: some permutation is optimal
    /// (Birkhoff), so brute force over the six matchings is an exact oracle.
    #[test]
    fn three_atom_transport_matches_permutation_search(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 2.0])) {
        let mut r = rng::seeded(seed);
        let space = verify::random_space(&mut r, p).unwrap();
        let xs: Vec<Point> = (0..3).map(|_| space.sample_point(&mut r)).collect();
        let ys: Vec<Point> = (0..3).map(|_| space.sample_point(&mut r)).collect();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms
            .iter()
            .map(|s| (0..3).map(|i| space.distance(&xs[i], &ys[s[i]]).unwrap().powf(p)).sum::<f64>() / 3.0)
            .fold(f64::INFINITY, f64::min);
        let a = EmpiricalDistribution::uniform(xs).unwrap();
        let b = EmpiricalDistribution::uniform(ys).unwrap();
        let (w, _) = wasserstein(p, &a, &b, &space).unwrap();
        prop_assert!((w.powf(p) - best).abs() <= 1e-9);
    }

    #[test]
    fn primal_worst_case_is_monotone_in_radius(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let p = if r.random::<bool>() { 1.0 } else { 2.0 };
        let space = verify::random_space(&mut r, p).unwrap();
        let sample = verify::random_sample(&mut r, &space, 8).unwrap();
        let cands = verify::random_candidates(&mut r, &space, 15);
        let f = verify::random_hypothesis(&mut r, &space, HypothesisKind::Any).unwrap();
        let mut last = f64::NEG_INFINITY;
        for rho in [0.0, 0.01, 0.05, 0.1, 0.3, 0.6, 1.0] {
            let v = primal_worst_case_risk(&f, &sample, &AmbiguityBall::new(p, rho).unwrap(), &cands, &space)
                .unwrap()
                .value;
            prop_assert!(v >= last - 1e-9);
            last = v;
        }
    }
}

#[test]
fn moving_one_atom_onto_a_step() {
    // Two atoms at 0.5 and 0.9, step of height 4 at 1. Moving the top atom
    // costs 0.1 per unit mass at p = 1; with rho = 0.02 a mass of 0.2 (two
    // fifths of the atom) moves, so the worst case is 4 * 0.2.
    let space = InstanceSpace::interval(0.0, 2.0).unwrap();
    let sample = EmpiricalDistribution::uniform(vec![Point::scalar(0.5), Point::scalar(0.9)]).unwrap();
    let f = Hypothesis::new(
        "step",
        "step",
        StepLoss {
            coord: 0,
            threshold: 1.0,
            below: 0.0,
            above: 4.0,
        },
        4.0,
    );
    let cert = primal_worst_case_risk(&f, &sample, &AmbiguityBall::new(1.0, 0.02).unwrap(), &[Point::scalar(1.0)], &space)
        .unwrap();
    assert!((cert.value - 0.8).abs() < 1e-12);
    assert!(cert.plan.cost <= 0.02 + 1e-15);
}
