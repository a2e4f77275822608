//! Domain adaptation under feature drift.
//!
//! The target features are a pushforward `nu = T_# mu` of the source features
//! and labels follow the same conditional at `x` and at `T(x)`. When `T` is an
//! optimal map, `W_p(P, Q) = W_p(mu, nu)`, so the distance between the full
//! source and target laws can be estimated from unlabeled features alone.
//! The scheme:
//!
//! 1. compute `W_p(mu_n, nu_m)` between source and target feature samples;
//! 2. inflate it by the two concentration terms to get the radius
//!    `eps(delta)`;
//! 3. run minimax ERM on the labeled source sample at that radius.
//!
//! Held-out labeled target data is used only to score the result.
//!
//! The concentration constants `C_a`, `C_b` exist but have no known values.
//! They are configuration inputs defaulting to 1, and reports carry a marker
//! saying so.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::ball::AmbiguityBall;
use crate::bounds::{adaptation_bound, comp_entropy_integral, BoundReport, EntropyProfile};
use crate::classes::make_quadratic_class;
use crate::erm::{empirical_risk, minimax_erm, ordinary_erm, ErmResult, HypothesisClass};
use crate::error::{Error, Result};
use crate::hypothesis::{LinearPredictor, Predictor, RampPredictor};
use crate::rng::{self, Rng};
use crate::space::{EmpiricalDistribution, InstanceSpace, Point};
use crate::transport::wasserstein;

/// Marker attached to every report that uses `C_a`, `C_b`.
pub const CONSTANTS_MARKER: &str =
    "C_a and C_b are user-supplied placeholders; no numerical values are known for them";

/// Invertible feature map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// `x + offset`.
    Shift { offset: Vec<f64> },
    /// `A x + offset` with `A` nonsingular (row-major rows).
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// `x_k -> sign(x_k) |x_k|^{a_k}` with every `a_k > 0`.
    Power { exponents: Vec<f64> },
}

impl Transform {
    pub fn identity(d: usize) -> Self {
        Transform::Shift {
            offset: vec![0.0; d],
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            Transform::Shift { offset } => {
                if offset.len() != d {
                    return bad(format!("shift has {} entries, dimension is {d}", offset.len()));
                }
            }
            Transform::Affine { matrix, offset } => {
                if offset.len() != d || matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                    return bad(format!("affine map must be {d}x{d} with a length-{d} offset"));
                }
                if solve_linear(matrix, &vec![0.0; d]).is_none() {
                    return bad("affine matrix is singular".into());
                }
            }
            Transform::Power { exponents } => {
                if exponents.len() != d {
                    return bad(format!("power map has {} exponents, dimension is {d}", exponents.len()));
                }
                if exponents.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return bad("power exponents must be positive".into());
                }
            }
        }
        if self.values().any(|v| !v.is_finite()) {
            return bad("transform parameters must be finite".into());
        }
        Ok(())
    }

    fn values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            Transform::Shift { offset } => Box::new(offset.iter().copied()),
            Transform::Affine { matrix, offset } => {
                Box::new(matrix.iter().flatten().chain(offset).copied())
            }
            Transform::Power { exponents } => Box::new(exponents.iter().copied()),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Transform::Shift { offset } => x.iter().zip(offset).map(|(a, b)| a + b).collect(),
            Transform::Affine { matrix, offset } => matrix
                .iter()
                .zip(offset)
                .map(|(row, c)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + c)
                .collect(),
            Transform::Power { exponents } => x
                .iter()
                .zip(exponents)
                .map(|(v, a)| v.signum() * v.abs().powf(*a))
                .collect(),
        }
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Transform::Shift { offset } => y.iter().zip(offset).map(|(a, b)| a - b).collect(),
            Transform::Affine { matrix, offset } => {
                let rhs: Vec<f64> = y.iter().zip(offset).map(|(a, b)| a - b).collect();
                solve_linear(matrix, &rhs).expect("validated nonsingular")
            }
            Transform::Power { exponents } => y
                .iter()
                .zip(exponents)
                .map(|(v, a)| v.signum() * v.abs().powf(1.0 / a))
                .collect(),
        }
    }

    /// Largest `|T(T^-1(x)) - x|_inf` over the given feature vectors.
    pub fn roundtrip_error<'a>(&self, xs: impl IntoIterator<Item = &'a [f64]>) -> f64 {
        xs.into_iter()
            .map(|x| {
                self.apply(&self.inverse(x))
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Gaussian elimination with partial pivoting; `None` for a (numerically)
/// singular matrix.
fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, v)| row.iter().copied().chain([*v]).collect())
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

/// Source feature law `mu`: independent uniform coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBox {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl UniformBox {
    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(a, b)| rng.random_range(*a..=*b))
            .collect()
    }
}

/// Label conditional `Y | X = x`: `w.x + bias + Unif[-noise, noise]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearLabels {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub noise: f64,
}

impl LinearLabels {
    fn sample(&self, x: &[f64], rng: &mut Rng) -> f64 {
        let mean: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias;
        let eps = if self.noise > 0.0 {
            rng.random_range(-self.noise..=self.noise)
        } else {
            0.0
        };
        mean + eps
    }
}

/// Source law, drift map and the shared label conditional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftScenario {
    pub dimension: usize,
    /// Euclidean radius `r0` containing both source and target features.
    pub feature_bound: f64,
    /// Label bound `B`.
    pub label_bound: f64,
    pub transform: Transform,
    pub source: UniformBox,
    pub labels: LinearLabels,
}

impl DriftScenario {
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        self.transform.validate(d)?;
        if self.source.low.len() != d || self.source.high.len() != d {
            return Err(Error::Config(format!("source box must have {d} coordinates")));
        }
        if self.source.low.iter().zip(&self.source.high).any(|(a, b)| !(a <= b)) {
            return Err(Error::Config("source box has low > high".into()));
        }
        if self.labels.weights.len() != d || !(self.labels.noise >= 0.0) {
            return Err(Error::Config(format!(
                "label model needs {d} weights and a nonnegative noise level"
            )));
        }
        Ok(())
    }

    /// `Z = X x Y` with the `l_p` product metric.
    pub fn space(&self, p: f64) -> Result<InstanceSpace> {
        InstanceSpace::lp_product(self.dimension, self.feature_bound, self.label_bound, p)
    }
}

/// Output of [`generate_drift`].
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSample {
    pub source: EmpiricalDistribution,
    pub target_features: EmpiricalDistribution,
    pub target_test: EmpiricalDistribution,
}

/// Draws `n` labeled source points, `m` unlabeled target features and
/// `test` labeled target points. Each set has its own substream of `seed`.
/// Target labels are drawn at the pre-image `T^-1(x')`, which is the fresh
/// source draw the target point was pushed from.
pub fn generate_drift(
    scenario: &DriftScenario,
    n: usize,
    m: usize,
    test: usize,
    seed: u64,
) -> Result<DriftSample> {
    scenario.validate()?;
    if n == 0 || m == 0 || test == 0 {
        return Err(Error::invalid("sample sizes must be at least 1"));
    }
    let space = scenario.space(1.0)?;
    let mut src_rng = rng::substream(seed, 0);
    let mut tgt_rng = rng::substream(seed, 1);
    let mut test_rng = rng::substream(seed, 2);
    let mut source = Vec::with_capacity(n);
    for _ in 0..n {
        let x = scenario.source.sample(&mut src_rng);
        let y = scenario.labels.sample(&x, &mut src_rng);
        source.push(Point::labeled(x, y));
    }
    let target: Vec<Point> = (0..m)
        .map(|_| Point::unlabeled(scenario.transform.apply(&scenario.source.sample(&mut tgt_rng))))
        .collect();
    let mut target_test = Vec::with_capacity(test);
    for _ in 0..test {
        let x = scenario.source.sample(&mut test_rng);
        let xt = scenario.transform.apply(&x);
        let y = scenario.labels.sample(&scenario.transform.inverse(&xt), &mut test_rng);
        target_test.push(Point::labeled(xt, y));
    }
    let out = DriftSample {
        source: EmpiricalDistribution::uniform(source)?,
        target_features: EmpiricalDistribution::uniform(target)?,
        target_test: EmpiricalDistribution::uniform(target_test)?,
    };
    out.source.validate_in(&space)?;
    out.target_test.validate_in(&space)?;
    out.target_features.validate_in(&space.feature_space(1.0)?)?;
    Ok(out)
}

/// `W_p(mu_n, nu_m)` under `d_X = |.|_p`. Labels, if present, are dropped.
pub fn feature_wasserstein(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    p: f64,
    feature_bound: f64,
) -> Result<f64> {
    let d = source.support()[0].features.len();
    let space = InstanceSpace::feature_only(d, feature_bound, p)?;
    Ok(wasserstein(p, &source.features(), &target.features(), &space)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radius {
    pub value: f64,
    pub w_hat: f64,
    pub source_term: f64,
    pub target_term: f64,
    /// `d <= 2p`: the concentration rate used here is not the one guaranteed
    /// in that case.
    pub low_dimension: bool,
    pub constants_note: String,
}

/// `eps(delta) = W + (log(4 C_a/delta)/(C_b n))^{p/d} + (log(4 C_a/delta)/(C_b m))^{p/d}`.
#[allow(clippy::too_many_arguments)]
pub fn adaptation_radius(
    w_hat: f64,
    n: usize,
    m: usize,
    p: f64,
    d: usize,
    delta: f64,
    c_a: f64,
    c_b: f64,
) -> Result<Radius> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(c_a > 0.0 && c_b > 0.0 && c_a.is_finite() && c_b.is_finite()) {
        return Err(Error::invalid("C_a and C_b must be positive"));
    }
    if n == 0 || m == 0 || d == 0 {
        return Err(Error::invalid("n, m and d must be positive"));
    }
    if !(p >= 1.0 && p.is_finite()) || !(w_hat >= 0.0 && w_hat.is_finite()) {
        return Err(Error::invalid("need p >= 1 and a finite W >= 0"));
    }
    let log_term = (4.0 * c_a / delta).ln();
    let expo = p / d as f64;
    let source_term = (log_term / (c_b * n as f64)).powf(expo);
    let target_term = (log_term / (c_b * m as f64)).powf(expo);
    Ok(Radius {
        value: w_hat + source_term + target_term,
        w_hat,
        source_term,
        target_term,
        low_dimension: d as f64 <= 2.0 * p,
        constants_note: CONSTANTS_MARKER.to_string(),
    })
}

/// Hypothesis class description for configuration files. Members are squared
/// losses `(y - h(x))^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassSpec {
    /// Linear predictors `w.x + b`.
    Linear { members: Vec<LinearPredictor> },
    /// A linear predictor offset by `bias`, followed by the same predictor
    /// with a ramp of `height` switched on over `[start, start + width]` on
    /// the first feature. The ramp member fits source data supported below
    /// `start` perfectly and fails once the features drift past it.
    Trap {
        weights: Vec<f64>,
        intercept: f64,
        bias: f64,
        start: f64,
        width: f64,
        height: f64,
    },
}

impl ClassSpec {
    pub fn build(&self, space: &InstanceSpace) -> Result<HypothesisClass> {
        let preds: Vec<Arc<dyn Predictor>> = match self {
            ClassSpec::Linear { members } => members
                .iter()
                .map(|h| Arc::new(h.clone()) as Arc<dyn Predictor>)
                .collect(),
            ClassSpec::Trap {
                weights,
                intercept,
                bias,
                start,
                width,
                height,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::Config("trap width must be positive".into()));
                }
                vec![
                    Arc::new(LinearPredictor {
                        weights: weights.clone(),
                        bias: intercept + bias,
                    }),
                    Arc::new(RampPredictor {
                        weights: weights.clone(),
                        bias: *intercept,
                        coord: 0,
                        start: *start,
                        width: *width,
                        height: *height,
                    }),
                ]
            }
        };
        make_quadratic_class(preds, space)
    }
}

/// Candidate set for the worst case: an evenly spaced feature grid with
/// `per_axis` points per coordinate, restricted to the feature ball, times
/// `labels` evenly spaced labels in `[-B, B]`.
pub fn candidate_grid(space: &InstanceSpace, per_axis: usize, labels: usize) -> Result<Vec<Point>> {
    let d = space.dimension();
    let b = space
        .label_bound()
        .ok_or_else(|| Error::structural("candidate grid needs a labeled space"))?;
    if per_axis < 2 || labels < 1 {
        return Err(Error::invalid("need at least 2 points per axis and 1 label"));
    }
    let total = (per_axis as f64).powi(d as i32) * labels as f64;
    if total > 200_000.0 {
        return Err(Error::invalid(format!("candidate grid of {total} points is too large")));
    }
    let r0 = space.feature_bound();
    let axis: Vec<f64> = (0..per_axis)
        .map(|k| -r0 + 2.0 * r0 * k as f64 / (per_axis - 1) as f64)
        .collect();
    let ys: Vec<f64> = if labels == 1 {
        vec![0.0]
    } else {
        (0..labels)
            .map(|k| -b + 2.0 * b * k as f64 / (labels - 1) as f64)
            .collect()
    };
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        if x.iter().map(|v| v * v).sum::<f64>().sqrt() <= r0 + 1e-12 {
            for &y in &ys {
                out.push(Point::labeled(x.clone(), y));
            }
        }
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    Ok(out)
}

fn default_c() -> f64 {
    1.0
}

fn default_per_axis() -> usize {
    41
}

fn default_labels() -> usize {
    9
}

/// Everything a single adaptation run needs. Deserializable from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptationConfig {
    pub scenario: DriftScenario,
    pub class: ClassSpec,
    pub n: usize,
    pub m: usize,
    pub test: usize,
    pub p: f64,
    pub delta: f64,
    #[serde(default = "default_c")]
    pub c_a: f64,
    #[serde(default = "default_c")]
    pub c_b: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_per_axis")]
    pub grid_per_axis: usize,
    #[serde(default = "default_labels")]
    pub grid_labels: usize,
}

impl AdaptationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: AdaptationConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        cfg.scenario.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The shift-drift scenario with a ramp trap: 1-D features `Unif[0, 1]`,
    /// shifted by 0.3 in the target, labels `x/2 + Unif[-0.1, 0.1]`.
    pub fn shift_trap() -> Self {
        AdaptationConfig {
            scenario: DriftScenario {
                dimension: 1,
                feature_bound: 2.0,
                label_bound: 1.0,
                transform: Transform::Shift { offset: vec![0.3] },
                source: UniformBox {
                    low: vec![0.0],
                    high: vec![1.0],
                },
                labels: LinearLabels {
                    weights: vec![0.5],
                    bias: 0.0,
                    noise: 0.1,
                },
            },
            class: ClassSpec::Trap {
                weights: vec![0.5],
                intercept: 0.0,
                bias: 0.05,
                start: 1.0,
                width: 0.1,
                height: 1.5,
            },
            n: 40,
            m: 40,
            test: 2000,
            p: 1.0,
            delta: 0.05,
            c_a: 1.0,
            c_b: 1.0,
            seed: 0,
            grid_per_axis: 41,
            grid_labels: 9,
        }
    }
}

/// Result of one adaptation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptationRun {
    pub labeled_source: EmpiricalDistribution,
    pub unlabeled_target_features: EmpiricalDistribution,
    pub delta: f64,
    pub concentration_constants: (f64, f64),
    pub radius: Radius,
    pub result: ErmResult,
    /// Ordinary ERM on the same source sample, for comparison.
    pub ordinary: ErmResult,
    /// `R(Q_test, f)` for every member.
    pub target_risks: Vec<f64>,
    pub target_risk: f64,
    pub ordinary_target_risk: f64,
    /// Index of the member with the smallest held-out target risk.
    pub target_best: usize,
    pub excess_risk: f64,
    /// Excess-risk bound; `None` when the class has no Lipschitz constant.
    pub bound: Option<BoundReport>,
}

/// Runs the three steps on fresh data from `config.seed` and scores both
/// minimax and ordinary ERM on held-out target data.
pub fn run_adaptation(class: &HypothesisClass, config: &AdaptationConfig) -> Result<AdaptationRun> {
    let scn = &config.scenario;
    if !(config.p >= 1.0 && config.p <= 2.0) {
        return Err(Error::invalid(
            "adaptation supports 1 <= p <= 2 (squared-loss Lipschitz constants assume it)",
        ));
    }
    let space = scn.space(config.p)?;
    let data = generate_drift(scn, config.n, config.m, config.test, config.seed)?;

    let w_hat = feature_wasserstein(&data.source, &data.target_features, config.p, scn.feature_bound)?;
    let radius = adaptation_radius(
        w_hat,
        config.n,
        config.m,
        config.p,
        scn.dimension,
        config.delta,
        config.c_a,
        config.c_b,
    )?;
    let ball = AmbiguityBall::new(config.p, radius.value)?;
    let candidates = candidate_grid(&space, config.grid_per_axis, config.grid_labels)?;
    let result = minimax_erm(class, &data.source, &ball, &candidates, &space)?;
    let ordinary = ordinary_erm(class, &data.source)?;

    let target_risks: Vec<f64> = class
        .members()
        .iter()
        .map(|h| empirical_risk(h, &data.target_test))
        .collect();
    let mut target_best = 0;
    for (i, r) in target_risks.iter().enumerate() {
        if *r < target_risks[target_best] {
            target_best = i;
        }
    }
    let best = target_risks[target_best];
    let target_risk = target_risks[result.selected_index];

    let bound = match class.lipschitz() {
        Some(l) => {
            let m = class.upper_bound();
            let comp = comp_entropy_integral(&EntropyProfile::FiniteClass {
                size: class.len(),
                m,
            })?;
            Some(adaptation_bound(
                l,
                radius.value,
                comp,
                space.diameter(),
                config.p,
                m,
                config.n,
                config.delta,
            )?)
        }
        None => None,
    };

    Ok(AdaptationRun {
        labeled_source: data.source,
        unlabeled_target_features: data.target_features,
        delta: config.delta,
        concentration_constants: (config.c_a, config.c_b),
        radius,
        ordinary_target_risk: target_risks[ordinary.selected_index],
        result,
        ordinary,
        target_risks,
        target_risk,
        target_best,
        excess_risk: target_risk - best,
        bound,
    })
}

/// Paired comparison of minimax and ordinary ERM across seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionComparison {
    pub seeds: usize,
    /// Runs in which minimax ERM picked the target-optimal member.
    pub minimax_hits: usize,
    pub ordinary_hits: usize,
    /// Minimax right, ordinary wrong.
    pub wins: usize,
    /// Ordinary right, minimax wrong.
    pub losses: usize,
    /// One-sided sign-test p-value for "minimax hits more often".
    pub p_value: f64,
    /// Runs with a non-vacuous bound, and how many of them it covered.
    pub nonvacuous: usize,
    pub covered: usize,
}

/// `P(Bin(wins + losses, 1/2) >= wins)`.
pub fn sign_test(wins: usize, losses: usize) -> f64 {
    let n = (wins + losses) as u64;
    if n == 0 {
        return 1.0;
    }
    (wins as u64..=n)
        .map(|k| (ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2).exp())
        .sum::<f64>()
        .min(1.0)
}

/// Runs [`run_adaptation`] at seeds `base, base + 1, ...` and tallies
/// paired outcomes. Also returns the per-seed runs in order.
pub fn compare_selection(
    config: &AdaptationConfig,
    seeds: usize,
) -> Result<(SelectionComparison, Vec<AdaptationRun>)> {
    let space = config.scenario.space(config.p)?;
    let class = config.class.build(&space)?;
    let mut runs = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let cfg = AdaptationConfig {
            seed: rng::trial_seed(config.seed, s as u64),
            ..config.clone()
        };
        runs.push(run_adaptation(&class, &cfg)?);
    }
    let mm = |r: &AdaptationRun| r.result.selected_index == r.target_best;
    let om = |r: &AdaptationRun| r.ordinary.selected_index == r.target_best;
    let wins = runs.iter().filter(|r| mm(r) && !om(r)).count();
    let losses = runs.iter().filter(|r| !mm(r) && om(r)).count();
    let nonvac: Vec<&AdaptationRun> = runs
        .iter()
        .filter(|r| r.bound.as_ref().is_some_and(|b| !b.vacuous))
        .collect();
    let covered = nonvac
        .iter()
        .filter(|r| r.excess_risk <= r.bound.as_ref().map_or(f64::INFINITY, |b| b.value))
        .count();
    Ok((
        SelectionComparison {
            seeds,
            minimax_hits: runs.iter().filter(|r| mm(r)).count(),
            ordinary_hits: runs.iter().filter(|r| om(r)).count(),
            wins,
            losses,
            p_value: sign_test(wins, losses),
            nonvacuous: nonvac.len(),
            covered,
        },
        runs,
    ))
}

/// Per-seed CSV summary of a comparison.
pub fn comparison_csv(runs: &[AdaptationRun]) -> String {
    let mut out = String::from(
        "run,radius,w_hat,minimax_selected,ordinary_selected,target_best,target_risk,ordinary_target_risk,excess_risk,bound\n",
    );
    for (i, r) in runs.iter().enumerate() {
        out.push_str(&format!(
            "{i},{:?},{:?},{},{},{},{:?},{:?},{:?},{}\n",
            r.radius.value,
            r.radius.w_hat,
            r.result.selected_index,
            r.ordinary.selected_index,
            r.target_best,
            r.target_risk,
            r.ordinary_target_risk,
            r.excess_risk,
            r.bound.as_ref().map_or(String::new(), |b| format!("{:?}", b.value)),
        ));
    }
    out
}

/// Both sides of the pushforward identity on a finite instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardCheck {
    pub joint: f64,
    pub marginal: f64,
    pub gap: f64,
}

/// Builds `P_n` from `n` labeled source draws and `Q_n` as its exact image
/// under `(x, y) -> (T(x), y)`, then solves `W_p(P_n, Q_n)` on the `l_p`
/// product space and `W_p(mu_n, nu_n)` on the features. The two agree when
/// `T` is an optimal map for the separable cost, as shifts and
/// componentwise increasing maps are.
pub fn verify_pushforward_identity(
    scenario: &DriftScenario,
    n: usize,
    p: f64,
    seed: u64,
) -> Result<PushforwardCheck> {
    scenario.validate()?;
    if n == 0 {
        return Err(Error::invalid("need at least one atom"));
    }
    let mut r = rng::substream(seed, 0);
    let mut src = Vec::with_capacity(n);
    let mut tgt = Vec::with_capacity(n);
    for _ in 0..n {
        let x = scenario.source.sample(&mut r);
        let y = scenario.labels.sample(&x, &mut r);
        tgt.push(Point::labeled(scenario.transform.apply(&x), y));
        src.push(Point::labeled(x, y));
    }
    let p_n = EmpiricalDistribution::uniform(src)?;
    let q_n = EmpiricalDistribution::uniform(tgt)?;
    let space = scenario.space(p)?;
    let joint = wasserstein(p, &p_n, &q_n, &space)?.0;
    let marginal = feature_wasserstein(&p_n, &q_n, p, scenario.feature_bound)?;
    Ok(PushforwardCheck {
        joint,
        marginal,
        gap: (joint - marginal).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(t: Transform) -> DriftScenario {
        let mut s = AdaptationConfig::shift_trap().scenario;
        s.transform = t;
        s
    }

    #[test]
    fn transforms_invert() {
        let xs: Vec<Vec<f64>> = vec![vec![0.3, -0.7], vec![1.2, 0.0], vec![-0.4, 0.9]];
        let ts = [
            Transform::Shift {
                offset: vec![0.1, -0.2],
            },
            Transform::Affine {
                matrix: vec![vec![2.0, 1.0], vec![0.5, 3.0]],
                offset: vec![0.0, 1.0],
            },
            Transform::Power {
                exponents: vec![2.0, 0.5],
            },
        ];
        for t in &ts {
            t.validate(2).unwrap();
            assert!(t.roundtrip_error(xs.iter().map(Vec::as_slice)) < 1e-9);
        }
        let singular = Transform::Affine {
            matrix: vec![vec![1.0, 2.0], vec![2.0, 4.0]],
            offset: vec![0.0, 0.0],
        };
        assert!(singular.validate(2).is_err());
    }

    #[test]
    fn radius_unit_case() {
        // log(4 C_a/delta) = 1 needs delta = 4 C_a/e; with C_a = 1 that is
        // outside (0, 1), so scale C_a down instead.
        assert!(adaptation_radius(0.25, 1, 1, 1.0, 3, 4.0 / std::f64::consts::E, 1.0, 1.0).is_err());
        let delta = 0.5;
        let c_a = delta * std::f64::consts::E / 4.0;
        let r = adaptation_radius(0.25, 1, 1, 1.0, 3, delta, c_a, 1.0).unwrap();
        assert!((r.value - 2.25).abs() < 1e-12);
        assert!(!r.low_dimension);
        assert!(adaptation_radius(0.0, 1, 1, 1.0, 1, 1.5, 1.0, 1.0).is_err());
        assert!(adaptation_radius(0.0, 1, 1, 1.0, 1, 0.5, 0.0, 1.0).is_err());
        assert!(adaptation_radius(0.0, 1, 1, 1.0, 2, 0.5, 1.0, 1.0).unwrap().low_dimension);
    }

    #[test]
    fn identity_drift_pushforward_is_zero() {
        let c = verify_pushforward_identity(&scenario(Transform::identity(1)), 6, 2.0, 4).unwrap();
        assert!(c.joint.abs() < 1e-12 && c.marginal.abs() < 1e-12);
    }

    #[test]
    fn shift_pushforward_matches() {
        let c = verify_pushforward_identity(&scenario(Transform::Shift { offset: vec![0.4] }), 5, 1.0, 8).unwrap();
        assert!(c.gap < 1e-9, "{c:?}");
        assert!((c.marginal - 0.4).abs() < 1e-9);
    }

    #[test]
    fn generation_is_deterministic_and_shifted() {
        let s = scenario(Transform::Shift { offset: vec![0.3] });
        let a = generate_drift(&s, 5, 5, 5, 11).unwrap();
        let b = generate_drift(&s, 5, 5, 5, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.target_features.support().iter().all(|z| z.features[0] >= 0.3));
    }

    #[test]
    fn grid_covers_ball() {
        let space = InstanceSpace::lp_product(2, 1.0, 1.0, 1.0).unwrap();
        let g = candidate_grid(&space, 3, 2).unwrap();
        // (0, +-1), (+-1, 0), (0, 0) lie in the unit disc.
        assert_eq!(g.len(), 5 * 2);
    }

    #[test]
    fn sign_test_values() {
        assert!((sign_test(3, 0) - 0.125).abs() < 1e-12);
        assert!((sign_test(0, 3) - 1.0).abs() < 1e-12);
        assert_eq!(sign_test(0, 0), 1.0);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = AdaptationConfig::shift_trap();
        let back = AdaptationConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
