//! Instance spaces, points and finitely supported distributions.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Slack allowed when checking points against the declared bounds.
const BOUND_SLACK: f64 = 1e-12;

/// Metric on `Z = X x Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    /// `sqrt(|x - x'|_2^2 + |y - y'|^2)`.
    EuclideanProduct,
    /// `(|x - x'|_p^p + |y - y'|^p)^(1/p)`.
    LpProduct { p: f64 },
    /// `|x - x'|_p`, labels ignored.
    FeatureOnly { p: f64 },
    /// `|z - z'|` on a closed interval of the real line; points are unlabeled.
    Interval { low: f64, high: f64 },
    /// `|x - x'|_2 + 1{y != y'}`, the product metric used for hinge losses.
    Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub features: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<f64>,
}

impl Point {
    pub fn new(features: Vec<f64>, label: Option<f64>) -> Self {
        Point { features, label }
    }

    pub fn labeled(features: Vec<f64>, label: f64) -> Self {
        Point {
            features,
            label: Some(label),
        }
    }

    pub fn unlabeled(features: Vec<f64>) -> Self {
        Point {
            features,
            label: None,
        }
    }

    /// A point on the real line.
    pub fn scalar(x: f64) -> Self {
        Point::unlabeled(vec![x])
    }

    pub fn without_label(&self) -> Point {
        Point::unlabeled(self.features.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpace {
    dimension: usize,
    feature_bound: f64,
    label_bound: Option<f64>,
    metric: MetricKind,
    diameter: f64,
}

fn lp_norm(v: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 1.0 {
        v.map(f64::abs).sum()
    } else if p == 2.0 {
        v.map(|t| t * t).sum::<f64>().sqrt()
    } else {
        v.map(|t| t.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn check_order(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!(
            "metric order must be >= 1, got {p}"
        )));
    }
    Ok(())
}

fn check_bound(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::invalid(format!(
            "{name} must be finite and >= 0, got {value}"
        )));
    }
    Ok(())
}

/// Upper bound on the l_p diameter of the Euclidean ball of radius `r0` in R^d.
fn ball_lp_diameter(d: usize, r0: f64, p: f64) -> f64 {
    let expo = (1.0 / p - 0.5).max(0.0);
    2.0 * r0 * (d as f64).powf(expo)
}

impl InstanceSpace {
    /// `X = {|x|_2 <= r0} in R^d`, `Y = [-B, B]`, Euclidean product metric.
    /// The diameter is the `2 sqrt(r0^2 + B^2)` bound.
    pub fn euclidean(dimension: usize, feature_bound: f64, label_bound: f64) -> Result<Self> {
        Self::check_dim(dimension)?;
        check_bound("feature bound", feature_bound)?;
        check_bound("label bound", label_bound)?;
        Ok(InstanceSpace {
            dimension,
            feature_bound,
            label_bound: Some(label_bound),
            metric: MetricKind::EuclideanProduct,
            diameter: 2.0 * (feature_bound * feature_bound + label_bound * label_bound).sqrt(),
        })
    }

    /// l_p product metric with `d_X = |.|_p` and `d_Y = |.|`.
    pub fn lp_product(
        dimension: usize,
        feature_bound: f64,
        label_bound: f64,
        p: f64,
    ) -> Result<Self> {
        Self::check_dim(dimension)?;
        check_order(p)?;
        check_bound("feature bound", feature_bound)?;
        check_bound("label bound", label_bound)?;
        let dx = ball_lp_diameter(dimension, feature_bound, p);
        let dy = 2.0 * label_bound;
        Ok(InstanceSpace {
            dimension,
            feature_bound,
            label_bound: Some(label_bound),
            metric: MetricKind::LpProduct { p },
            diameter: (dx.powf(p) + dy.powf(p)).powf(1.0 / p),
        })
    }

    pub fn feature_only(dimension: usize, feature_bound: f64, p: f64) -> Result<Self> {
        Self::check_dim(dimension)?;
        check_order(p)?;
        check_bound("feature bound", feature_bound)?;
        Ok(InstanceSpace {
            dimension,
            feature_bound,
            label_bound: None,
            metric: MetricKind::FeatureOnly { p },
            diameter: ball_lp_diameter(dimension, feature_bound, p),
        })
    }

    /// The real interval `[low, high]` with `|z - z'|`.
    pub fn interval(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low <= high) {
            return Err(Error::invalid(format!("invalid interval [{low}, {high}]")));
        }
        Ok(InstanceSpace {
            dimension: 1,
            feature_bound: low.abs().max(high.abs()),
            label_bound: None,
            metric: MetricKind::Interval { low, high },
            diameter: high - low,
        })
    }

    /// Binary classification: labels in `{-1, +1}`, metric `|x - x'|_2 + 1{y != y'}`.
    pub fn classification(dimension: usize, feature_bound: f64) -> Result<Self> {
        Self::check_dim(dimension)?;
        check_bound("feature bound", feature_bound)?;
        Ok(InstanceSpace {
            dimension,
            feature_bound,
            label_bound: Some(1.0),
            metric: MetricKind::Classification,
            diameter: 2.0 * feature_bound + 1.0,
        })
    }

    fn check_dim(d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn feature_bound(&self) -> f64 {
        self.feature_bound
    }

    pub fn label_bound(&self) -> Option<f64> {
        self.label_bound
    }

    pub fn metric(&self) -> &MetricKind {
        &self.metric
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Whether points of this space carry a label coordinate.
    pub fn is_labeled(&self) -> bool {
        self.label_bound.is_some()
    }

    /// The feature-marginal space paired with this one: `d_X = |.|_p`, same
    /// feature ball.
    pub fn feature_space(&self, p: f64) -> Result<InstanceSpace> {
        match self.metric {
            MetricKind::Interval { low, high } => InstanceSpace::interval(low, high),
            _ => InstanceSpace::feature_only(self.dimension, self.feature_bound, p),
        }
    }

    /// Checks that `z` is a member of the space.
    pub fn validate(&self, z: &Point) -> Result<()> {
        if z.features.len() != self.dimension {
            return Err(Error::structural(format!(
                "point has {} features, space has dimension {}",
                z.features.len(),
                self.dimension
            )));
        }
        if z.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::structural("non-finite feature value"));
        }
        match self.metric {
            MetricKind::Interval { low, high } => {
                if z.label.is_some() {
                    return Err(Error::structural("interval space points are unlabeled"));
                }
                let x = z.features[0];
                if x < low - BOUND_SLACK || x > high + BOUND_SLACK {
                    return Err(Error::structural(format!("{x} outside [{low}, {high}]")));
                }
                return Ok(());
            }
            _ => {
                let norm = lp_norm(z.features.iter().copied(), 2.0);
                if norm > self.feature_bound + BOUND_SLACK {
                    return Err(Error::structural(format!(
                        "feature norm {norm} exceeds bound {}",
                        self.feature_bound
                    )));
                }
            }
        }
        match (self.label_bound, z.label) {
            (Some(b), Some(y)) => {
                if !y.is_finite() || y.abs() > b + BOUND_SLACK {
                    return Err(Error::structural(format!("label {y} exceeds bound {b}")));
                }
            }
            (Some(_), None) => return Err(Error::structural("labeled space requires a label")),
            _ => {}
        }
        Ok(())
    }

    /// Distance between two points of the space.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        if a.features.len() != self.dimension || b.features.len() != self.dimension {
            return Err(Error::structural(format!(
                "dimension mismatch: {} and {} vs space dimension {}",
                a.features.len(),
                b.features.len(),
                self.dimension
            )));
        }
        if self.is_labeled() && a.label.is_some() != b.label.is_some() {
            return Err(Error::structural(
                "cannot compare labeled and unlabeled points",
            ));
        }
        Ok(self.dist(a, b))
    }

    /// Distance without shape checks. Callers must have validated both points.
    pub(crate) fn dist(&self, a: &Point, b: &Point) -> f64 {
        let diff = a.features.iter().zip(&b.features).map(|(u, v)| u - v);
        let dy = match (a.label, b.label) {
            (Some(u), Some(v)) => (u - v).abs(),
            _ => 0.0,
        };
        match self.metric {
            MetricKind::EuclideanProduct => (diff.map(|t| t * t).sum::<f64>() + dy * dy).sqrt(),
            MetricKind::LpProduct { p } => {
                if p == 1.0 {
                    diff.map(f64::abs).sum::<f64>() + dy
                } else {
                    (diff.map(|t| t.abs().powf(p)).sum::<f64>() + dy.powf(p)).powf(1.0 / p)
                }
            }
            MetricKind::FeatureOnly { p } => lp_norm(diff, p),
            MetricKind::Interval { .. } => (a.features[0] - b.features[0]).abs(),
            MetricKind::Classification => {
                let indicator = if a.label != b.label { 1.0 } else { 0.0 };
                lp_norm(diff, 2.0) + indicator
            }
        }
    }

    /// `d(a_i, b_j)^p` for all pairs, row-major.
    pub fn cost_matrix(&self, a: &[Point], b: &[Point], p: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(a.len() * b.len());
        for u in a {
            for v in b {
                out.push(pow_order(self.distance(u, v)?, p));
            }
        }
        Ok(out)
    }

    /// A uniformly distributed point of the space (uniform in the feature
    /// ball, uniform label in `[-B, B]`, or `{-1, +1}` for classification).
    pub fn sample_point(&self, rng: &mut Rng) -> Point {
        if let MetricKind::Interval { low, high } = self.metric {
            return Point::scalar(rng.random_range(low..=high));
        }
        let d = self.dimension;
        let mut dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = lp_norm(dir.iter().copied(), 2.0).max(f64::MIN_POSITIVE);
        let radius = self.feature_bound * rng.random::<f64>().powf(1.0 / d as f64);
        for v in &mut dir {
            *v *= radius / norm;
        }
        let label = match (&self.metric, self.label_bound) {
            (MetricKind::Classification, _) => Some(if rng.random::<bool>() { 1.0 } else { -1.0 }),
            (_, Some(b)) => Some(rng.random_range(-b..=b)),
            (_, None) => None,
        };
        Point::new(dir, label)
    }
}

/// `t^p` with the common orders special-cased.
pub fn pow_order(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        t
    } else if p == 2.0 {
        t * t
    } else {
        t.powf(p)
    }
}

/// A finitely supported probability measure. Duplicate atoms are kept as
/// separate entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if support.len() != weights.len() {
            return Err(Error::structural(format!(
                "{} atoms but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!(
                "weight {w} is not a nonnegative number"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(EmpiricalDistribution { support, weights })
    }

    /// Weights `1/n` on each point.
    pub fn uniform(support: Vec<Point>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let w = 1.0 / support.len() as f64;
        let weights = vec![w; support.len()];
        Ok(EmpiricalDistribution { support, weights })
    }

    pub fn dirac(point: Point) -> Self {
        EmpiricalDistribution {
            support: vec![point],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.support.iter().zip(self.weights.iter().copied())
    }

    /// `E[g(Z)]`.
    pub fn expect(&self, mut g: impl FnMut(&Point) -> f64) -> f64 {
        self.iter().map(|(z, w)| w * g(z)).sum()
    }

    pub fn validate_in(&self, space: &InstanceSpace) -> Result<()> {
        for (row, z) in self.support.iter().enumerate() {
            space.validate(z).map_err(|e| Error::BoundViolation {
                row,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Feature marginal: the same atoms with their labels dropped.
    pub fn features(&self) -> EmpiricalDistribution {
        EmpiricalDistribution {
            support: self.support.iter().map(Point::without_label).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn max_feature(&self, coord: usize) -> f64 {
        self.support
            .iter()
            .map(|z| z.features[coord])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `n` i.i.d. draws from `Unif[0, 1)` on the real line, uniform weights.
pub fn sample_uniform_interval(n: usize, seed: u64) -> Result<EmpiricalDistribution> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let mut rng = rng::seeded(seed);
    sample_uniform_interval_with(n, &mut rng)
}

pub(crate) fn sample_uniform_interval_with(
    n: usize,
    rng: &mut Rng,
) -> Result<EmpiricalDistribution> {
    let pts = (0..n).map(|_| Point::scalar(rng.random::<f64>())).collect();
    EmpiricalDistribution::uniform(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], y: f64) -> Point {
        Point::labeled(x.to_vec(), y)
    }

    #[test]
    fn euclidean_identity_and_pythagoras() {
        let s = InstanceSpace::euclidean(1, 5.0, 5.0).unwrap();
        let a = pt(&[0.0], 0.0);
        assert_eq!(s.distance(&a, &a).unwrap(), 0.0);
        assert_eq!(s.distance(&a, &pt(&[3.0], 4.0)).unwrap(), 5.0);
    }

    #[test]
    fn l1_product_distance() {
        let s = InstanceSpace::lp_product(2, 3.0, 3.0, 1.0).unwrap();
        let d = s
            .distance(&pt(&[1.0, 0.0], 2.0), &pt(&[0.0, 0.0], 0.0))
            .unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn classification_metric_adds_label_flip() {
        let s = InstanceSpace::classification(1, 1.0).unwrap();
        let d = s.distance(&pt(&[0.5], 1.0), &pt(&[0.0], -1.0)).unwrap();
        assert_eq!(d, 1.5);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let s = InstanceSpace::euclidean(2, 1.0, 1.0).unwrap();
        let err = s
            .distance(&pt(&[0.0], 0.0), &pt(&[0.0, 0.0], 0.0))
            .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn euclidean_diameter_is_the_product_bound() {
        let s = InstanceSpace::euclidean(3, 1.0, 2.0).unwrap();
        assert_eq!(s.diameter(), 2.0 * 5f64.sqrt());
    }

    #[test]
    fn validate_rejects_out_of_bound_points() {
        let s = InstanceSpace::euclidean(1, 1.0, 1.0).unwrap();
        assert!(s.validate(&pt(&[0.5], 0.5)).is_ok());
        assert!(s.validate(&pt(&[1.5], 0.5)).is_err());
        assert!(s.validate(&pt(&[0.5], 1.5)).is_err());
        assert!(s.validate(&Point::unlabeled(vec![0.5])).is_err());
        let iv = InstanceSpace::interval(0.0, 2.0).unwrap();
        assert!(iv.validate(&Point::scalar(2.0)).is_ok());
        assert!(iv.validate(&Point::scalar(2.5)).is_err());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let pts = vec![Point::scalar(0.0), Point::scalar(1.0)];
        assert!(EmpiricalDistribution::new(pts.clone(), vec![0.5, 0.5]).is_ok());
        assert!(EmpiricalDistribution::new(pts.clone(), vec![0.5, 0.6]).is_err());
        assert!(EmpiricalDistribution::new(pts, vec![1.5, -0.5]).is_err());
        assert!(matches!(
            EmpiricalDistribution::uniform(vec![]),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn uniform_interval_sampling() {
        let a = sample_uniform_interval(5, 7).unwrap();
        let b = sample_uniform_interval(5, 7).unwrap();
        assert_eq!(a, b);

        let one = sample_uniform_interval(1, 0).unwrap();
        assert_eq!(one.weights(), &[1.0]);

        // Seed is fixed, so this is deterministic.
        let big = sample_uniform_interval(1000, 3).unwrap();
        let mean = big.expect(|z| z.features[0]);
        assert!((0.45..=0.55).contains(&mean), "mean {mean}");

        assert!(sample_uniform_interval(0, 1).is_err());
    }

    #[test]
    fn sampled_points_are_members() {
        let mut rng = rng::seeded(1);
        for space in [
            InstanceSpace::euclidean(3, 1.5, 2.0).unwrap(),
            InstanceSpace::lp_product(2, 1.0, 1.0, 1.0).unwrap(),
            InstanceSpace::feature_only(4, 2.0, 3.0).unwrap(),
            InstanceSpace::interval(0.0, 2.0).unwrap(),
            InstanceSpace::classification(2, 1.0).unwrap(),
        ] {
            for _ in 0..200 {
                let z = space.sample_point(&mut rng);
                space.validate(&z).unwrap();
            }
        }
    }
}
