//! Randomized self-checks: primal against dual, `lambda` brackets, the
//! pushforward identity and the `rho = 0` degeneration of minimax ERM.
//!
//! Instance `k` of a suite is generated from seed `base + k`, so a failing
//! case can be replayed on its own.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::adaptation::{verify_pushforward_identity, DriftScenario, LinearLabels, Transform, UniformBox};
use crate::ball::AmbiguityBall;
use crate::classes::{linear_predictors, make_quadratic_class};
use crate::dual::{lipschitz_bracket, local_worst_case_risk_with, Bracket};
use crate::erm::{minimax_erm, ordinary_erm, HypothesisClass};
use crate::error::Result;
use crate::hypothesis::{Hypothesis, SmoothAnchor, StepLoss};
use crate::rng::{self, Rng};
use crate::space::{EmpiricalDistribution, InstanceSpace, Point};
use crate::transport::primal_worst_case_risk;

/// Radii used by the random suites.
pub const RADII: [f64; 4] = [0.0, 0.01, 0.1, 0.5];

/// Which hypotheses [`random_hypothesis`] may return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypothesisKind {
    Any,
    /// Declares a Lipschitz constant.
    Lipschitz,
}

/// A sample, candidate set, ball and loss on a random `l_p` product space.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub space: InstanceSpace,
    pub sample: EmpiricalDistribution,
    pub candidates: Vec<Point>,
    pub ball: AmbiguityBall,
    pub hypothesis: Hypothesis,
}

/// `l_p` product space over the unit feature ball in dimension 1 or 2 with
/// labels in `[-1, 1]`.
pub fn random_space(rng: &mut Rng, p: f64) -> Result<InstanceSpace> {
    let d = rng.random_range(1..=2);
    InstanceSpace::lp_product(d, 1.0, 1.0, p)
}

/// Up to `max_atoms` uniform points with random positive weights.
pub fn random_sample(rng: &mut Rng, space: &InstanceSpace, max_atoms: usize) -> Result<EmpiricalDistribution> {
    let n = rng.random_range(1..=max_atoms);
    let pts: Vec<Point> = (0..n).map(|_| space.sample_point(rng)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    EmpiricalDistribution::new(pts, raw.iter().map(|w| w / total).collect())
}

pub fn random_candidates(rng: &mut Rng, space: &InstanceSpace, max: usize) -> Vec<Point> {
    let k = rng.random_range(1..=max);
    (0..k).map(|_| space.sample_point(rng)).collect()
}

fn random_weights(rng: &mut Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `y^2 (2 + sin(3 x_1)) / 3`: anchored at the origin with `C_0 = 1`, order
/// 2, and no declared Lipschitz constant.
pub fn anchored_loss(space: &InstanceSpace) -> Hypothesis {
    let b = space.label_bound().unwrap_or(1.0);
    Hypothesis::from_fn("anchored", b * b, |z: &Point| {
        let y = z.label.unwrap_or(0.0);
        y * y * (2.0 + (3.0 * z.features[0]).sin()) / 3.0
    })
    .with_anchor(SmoothAnchor {
        c0: 1.0,
        z0: Point::labeled(vec![0.0; space.dimension()], 0.0),
        order: 2.0,
    })
}

/// A random nonnegative loss on a labeled space: squared or absolute
/// residual of a random linear predictor, or (for [`HypothesisKind::Any`])
/// a step in the first feature or [`anchored_loss`].
pub fn random_hypothesis(rng: &mut Rng, space: &InstanceSpace, kind: HypothesisKind) -> Result<Hypothesis> {
    let d = space.dimension();
    let r0 = space.feature_bound();
    let b = space.label_bound().unwrap_or(1.0);
    let choices = if kind == HypothesisKind::Lipschitz { 2 } else { 4 };
    Ok(match rng.random_range(0..choices) {
        0 => {
            let w = random_weights(rng, d);
            let bias = rng.random_range(-0.5..0.5);
            let class = make_quadratic_class(linear_predictors(&[(w, bias)]), space)?;
            class.get(0).clone()
        }
        1 => {
            let w = random_weights(rng, d);
            let bias: f64 = rng.random_range(-0.5..0.5);
            let norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
            let m = b + norm * r0 + bias.abs();
            Hypothesis::from_fn("absolute", m, move |z: &Point| {
                let pred: f64 = w.iter().zip(&z.features).map(|(a, x)| a * x).sum::<f64>() + bias;
                (z.label.unwrap_or(0.0) - pred).abs()
            })
            .with_lipschitz(1.0 + norm)
        }
        2 => {
            let height = rng.random_range(0.5..3.0);
            Hypothesis::new(
                "step",
                "step",
                StepLoss {
                    coord: 0,
                    threshold: rng.random_range(-0.5..0.5),
                    below: 0.0,
                    above: height,
                },
                height,
            )
        }
        _ => anchored_loss(space),
    })
}

/// Instance `seed` of the duality suite: at most 12 atoms, at most 30
/// candidates, `p` in {1, 2}, radius from [`RADII`].
pub fn duality_instance(seed: u64) -> Result<RandomInstance> {
    let mut r = rng::seeded(seed);
    let p = if r.random::<bool>() { 1.0 } else { 2.0 };
    let rho = RADII[r.random_range(0..RADII.len())];
    let space = random_space(&mut r, p)?;
    let sample = random_sample(&mut r, &space, 12)?;
    let candidates = random_candidates(&mut r, &space, 30);
    let hypothesis = random_hypothesis(&mut r, &space, HypothesisKind::Any)?;
    Ok(RandomInstance {
        space,
        sample,
        candidates,
        ball: AmbiguityBall::new(p, rho)?,
        hypothesis,
    })
}

/// Largest deviation found by a suite and how many cases exceeded the
/// tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    pub tolerance: f64,
    pub max_deviation: f64,
    /// Seed of the case with the largest deviation.
    pub worst_seed: u64,
    pub failures: usize,
}

impl SuiteReport {
    fn new(suite: &str, cases: usize, tolerance: f64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            cases,
            tolerance,
            max_deviation: f64::NEG_INFINITY,
            worst_seed: 0,
            failures: 0,
        }
    }

    fn record(&mut self, seed: u64, deviation: f64) {
        if deviation > self.max_deviation {
            self.max_deviation = deviation;
            self.worst_seed = seed;
        }
        if !(deviation <= self.tolerance) {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `|primal - dual|` on one instance.
pub fn duality_gap(inst: &RandomInstance) -> Result<f64> {
    let primal = primal_worst_case_risk(&inst.hypothesis, &inst.sample, &inst.ball, &inst.candidates, &inst.space)?;
    let dual = local_worst_case_risk_with(
        &inst.hypothesis,
        &inst.sample,
        &inst.ball,
        &inst.candidates,
        &inst.space,
        Bracket::Auto,
    )?;
    Ok((primal.value - dual.value).abs())
}

pub fn duality_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("duality", cases, 1e-6);
    for k in 0..cases {
        let s = rng::trial_seed(seed, k as u64);
        rep.record(s, duality_gap(&duality_instance(s)?)?);
    }
    Ok(rep)
}

/// `lambda* - bracket` for one case. Even seeds use a single Lipschitz loss
/// and the Lipschitz bracket; odd seeds use a class containing
/// [`anchored_loss`] and the anchor bracket, checked at the minimax
/// selection. `lambda*` is always searched on the empirical interval, so
/// the bracket plays no part in computing it.
pub fn bracket_excess(seed: u64) -> Result<f64> {
    let mut r = rng::seeded(seed);
    let p = if r.random::<bool>() { 1.0 } else { 2.0 };
    let rho = RADII[r.random_range(1..RADII.len())];
    let ball = AmbiguityBall::new(p, rho)?;
    let space = random_space(&mut r, p)?;
    let sample = random_sample(&mut r, &space, 12)?;
    let cands = random_candidates(&mut r, &space, 30);
    let members = if seed.is_multiple_of(2) {
        vec![random_hypothesis(&mut r, &space, HypothesisKind::Lipschitz)?]
    } else {
        let extra = r.random_range(1..=3);
        let mut v = vec![anchored_loss(&space)];
        for _ in 0..extra {
            v.push(random_hypothesis(&mut r, &space, HypothesisKind::Any)?);
        }
        v
    };
    let mut best: Option<(f64, f64)> = None;
    for h in &members {
        let sol = local_worst_case_risk_with(h, &sample, &ball, &cands, &space, Bracket::Empirical)?;
        if best.is_none_or(|(v, _)| sol.value < v) {
            best = Some((sol.value, sol.lambda_star));
        }
    }
    let (_, lambda_star) = best.expect("class is nonempty");
    let bracket = if seed.is_multiple_of(2) {
        lipschitz_bracket(members[0].lipschitz().expect("Lipschitz member"), &ball)
    } else {
        HypothesisClass::new("anchored", members)?
            .lambda_bracket(&ball, &space)?
            .expect("anchored member present")
    };
    Ok(lambda_star - bracket)
}

pub fn bracket_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("bracket", cases, 1e-9);
    for k in 0..cases {
        let s = rng::trial_seed(seed, k as u64);
        rep.record(s, bracket_excess(s)?);
    }
    Ok(rep)
}

/// A random drift scenario whose map is optimal for the separable cost:
/// a shift, a positive diagonal scaling or a componentwise power map.
pub fn random_optimal_drift(rng: &mut Rng) -> DriftScenario {
    let d = rng.random_range(1..=2);
    let transform = match rng.random_range(0..3) {
        0 => Transform::Shift {
            offset: (0..d).map(|_| rng.random_range(-0.3..0.3)).collect(),
        },
        1 => Transform::Affine {
            matrix: (0..d)
                .map(|i| (0..d).map(|j| if i == j { rng.random_range(0.5..1.5) } else { 0.0 }).collect())
                .collect(),
            offset: (0..d).map(|_| rng.random_range(-0.2..0.2)).collect(),
        },
        _ => Transform::Power {
            exponents: (0..d).map(|_| rng.random_range(0.5..2.0)).collect(),
        },
    };
    DriftScenario {
        dimension: d,
        feature_bound: 2.0,
        label_bound: 1.0,
        transform,
        source: UniformBox {
            low: vec![-0.5; d],
            high: vec![0.5; d],
        },
        labels: LinearLabels {
            weights: vec![0.5; d],
            bias: 0.0,
            noise: 0.1,
        },
    }
}

pub fn pushforward_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("pushforward", cases, 1e-9);
    for k in 0..cases {
        let s = rng::trial_seed(seed, k as u64);
        let mut r = rng::seeded(s);
        let scn = random_optimal_drift(&mut r);
        let n = r.random_range(2..=8);
        let p = if r.random::<bool>() { 1.0 } else { 2.0 };
        rep.record(s, verify_pushforward_identity(&scn, n, p, s)?.gap);
    }
    Ok(rep)
}

/// A class of 2 to 5 random members on a random labeled sample.
pub fn random_class(rng: &mut Rng, space: &InstanceSpace) -> Result<HypothesisClass> {
    let k = rng.random_range(2..=5);
    let members = (0..k)
        .map(|i| Ok(random_hypothesis(rng, space, HypothesisKind::Any)?.with_id(format!("h{i}"))))
        .collect::<Result<Vec<_>>>()?;
    HypothesisClass::new("random", members)
}

/// 0 when minimax ERM at radius 0 reproduces ordinary ERM exactly (same
/// selection, bit-identical objective), 1 otherwise.
pub fn degeneration_mismatch(seed: u64) -> Result<f64> {
    let mut r = rng::seeded(seed);
    let p = if r.random::<bool>() { 1.0 } else { 2.0 };
    let space = random_space(&mut r, p)?;
    let sample = random_sample(&mut r, &space, 12)?;
    let cands = random_candidates(&mut r, &space, 30);
    let class = random_class(&mut r, &space)?;
    let mm = minimax_erm(&class, &sample, &AmbiguityBall::new(p, 0.0)?, &cands, &space)?;
    let om = ordinary_erm(&class, &sample)?;
    let same = mm.selected_index == om.selected_index && mm.objective.to_bits() == om.objective.to_bits();
    Ok(if same { 0.0 } else { 1.0 })
}

pub fn degeneration_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("degeneration", cases, 0.0);
    for k in 0..cases {
        let s = rng::trial_seed(seed, k as u64);
        rep.record(s, degeneration_mismatch(s)?);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(duality_suite(20, 1).unwrap().passed());
        assert!(bracket_suite(20, 1).unwrap().passed());
        assert!(pushforward_suite(10, 1).unwrap().passed());
        assert!(degeneration_suite(20, 1).unwrap().passed());
    }

    #[test]
    fn instances_are_reproducible() {
        let a = duality_instance(5).unwrap();
        let b = duality_instance(5).unwrap();
        assert_eq!(a.sample, b.sample);
        assert_eq!(a.candidates, b.candidates);
    }
}
