//! Built-in hypothesis classes with their regularity constants.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::erm::HypothesisClass;
use crate::error::{Error, Result};
use crate::hypothesis::{
    HingeLoss, Hypothesis, KernelExpansion, LinearPredictor, Nonlinearity, Predictor, SigmoidUnit,
    SmoothAnchor, SquaredLoss,
};
use crate::space::{InstanceSpace, MetricKind, Point};

fn label_bound(space: &InstanceSpace) -> Result<f64> {
    space
        .label_bound()
        .ok_or_else(|| Error::structural("class needs a labeled instance space"))
}

/// Hinge losses `max(0, 1 - y h(x))` on `X x {-1, +1}` with the metric
/// `|x - x'|_2 + 1{y != y'}`. A predictor with sup norm `S` and Lipschitz
/// constant `L_0` gives a loss bounded by `1 + S` and Lipschitz with constant
/// `max(2 S, L_0)`.
pub fn make_hinge_class(
    predictors: Vec<Arc<dyn Predictor>>,
    space: &InstanceSpace,
) -> Result<HypothesisClass> {
    if predictors.is_empty() {
        return Err(Error::invalid("predictor grid is empty"));
    }
    if *space.metric() != MetricKind::Classification {
        return Err(Error::structural(
            "hinge class needs the classification metric",
        ));
    }
    let r0 = space.feature_bound();
    let members = predictors
        .into_iter()
        .enumerate()
        .map(|(i, h)| {
            let sup = h.sup_norm(r0);
            let l = (2.0 * sup).max(h.lipschitz());
            Hypothesis::new(format!("hinge-{i}"), "hinge", HingeLoss(h), 1.0 + sup)
                .with_lipschitz(l)
        })
        .collect();
    HypothesisClass::new("hinge", members)
}

/// Squared losses `(y - h(x))^2` on the Euclidean product space. A predictor
/// with sup norm `S` and Lipschitz constant `L_h` gives `M = (B + S)^2` and
/// `L = 2 (B + S) sqrt(1 + L_h^2)`. Zero predictors also carry the anchor
/// `(y - 0)^2 <= d(z, (0, 0))^2`.
pub fn make_quadratic_class(
    predictors: Vec<Arc<dyn Predictor>>,
    space: &InstanceSpace,
) -> Result<HypothesisClass> {
    if predictors.is_empty() {
        return Err(Error::invalid("predictor grid is empty"));
    }
    let b = label_bound(space)?;
    let r0 = space.feature_bound();
    let origin = Point::labeled(vec![0.0; space.dimension()], 0.0);
    let members = predictors
        .into_iter()
        .enumerate()
        .map(|(i, h)| {
            let sup = h.sup_norm(r0);
            let l = 2.0 * (b + sup) * (1.0 + h.lipschitz().powi(2)).sqrt();
            let zero = h.is_zero();
            let f = Hypothesis::new(
                format!("quadratic-{i}"),
                "quadratic",
                SquaredLoss(h),
                (b + sup).powi(2),
            )
            .with_lipschitz(l);
            if zero {
                f.with_anchor(SmoothAnchor {
                    c0: 1.0,
                    z0: origin.clone(),
                    order: 2.0,
                })
            } else {
                f
            }
        })
        .collect();
    HypothesisClass::new("quadratic", members)
}

/// Linear predictors `x -> w.x + b` from a weight grid.
pub fn linear_predictors(grid: &[(Vec<f64>, f64)]) -> Vec<Arc<dyn Predictor>> {
    grid.iter()
        .map(|(w, b)| {
            Arc::new(LinearPredictor {
                weights: w.clone(),
                bias: *b,
            }) as Arc<dyn Predictor>
        })
        .collect()
}

/// `(y - s(w.x))^2` for weights `w` in the closed unit ball, with
/// `L = 2 sqrt(2) (B + |s|) (1 + |s'|)` and `M = (|s| + B)^2` for every member.
pub fn make_sigmoid_network_class(
    weight_grid: &[Vec<f64>],
    nonlinearity: Nonlinearity,
    space: &InstanceSpace,
) -> Result<HypothesisClass> {
    if weight_grid.is_empty() {
        return Err(Error::invalid("weight grid is empty"));
    }
    let b = label_bound(space)?;
    let (s, ds) = (nonlinearity.sup_norm(), nonlinearity.derivative_sup());
    let l = 2.0 * SQRT_2 * (b + s) * (1.0 + ds);
    let m = (s + b).powi(2);
    let mut members = Vec::with_capacity(weight_grid.len());
    for (i, w) in weight_grid.iter().enumerate() {
        if w.len() != space.dimension() {
            return Err(Error::structural(format!(
                "weight {i} has length {}",
                w.len()
            )));
        }
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "weight {w:?} lies outside the unit ball"
            )));
        }
        let unit = SigmoidUnit {
            weights: w.clone(),
            nonlinearity,
        };
        members.push(
            Hypothesis::new(
                format!("network-{i}"),
                "sigmoid_network",
                SquaredLoss(Arc::new(unit)),
                m,
            )
            .with_lipschitz(l),
        );
    }
    HypothesisClass::new("sigmoid_network", members)
}

/// `(y - h(x))^2` for Gaussian-kernel expansions `h = sum_k a_k K(c_k, .)`
/// with `|h|_K <= r` (checked through the Gram quadratic form, slack 1e-9).
/// Every member gets `L = 2 sqrt(2) (r + B) (1 + r sqrt(2) / sigma)` and
/// `M = 2 (r^2 + B^2)`.
pub fn make_rkhs_ball_class(
    centers: &[Vec<f64>],
    coefficient_grid: &[Vec<f64>],
    sigma: f64,
    radius: f64,
    space: &InstanceSpace,
) -> Result<HypothesisClass> {
    if coefficient_grid.is_empty() || centers.is_empty() {
        return Err(Error::invalid("coefficient grid is empty"));
    }
    if !(sigma > 0.0) || !(radius >= 0.0) {
        return Err(Error::invalid("kernel width must be > 0 and radius >= 0"));
    }
    let b = label_bound(space)?;
    let l = 2.0 * SQRT_2 * (radius + b) * (1.0 + radius * SQRT_2 / sigma);
    let m = 2.0 * (radius * radius + b * b);
    let mut members = Vec::with_capacity(coefficient_grid.len());
    for (i, a) in coefficient_grid.iter().enumerate() {
        if a.len() != centers.len() {
            return Err(Error::structural(format!(
                "coefficient vector {i} has {} entries for {} centers",
                a.len(),
                centers.len()
            )));
        }
        let h = KernelExpansion {
            centers: centers.to_vec(),
            coefficients: a.clone(),
            sigma,
        };
        let norm = h.rkhs_norm();
        if norm * norm > radius * radius + 1e-9 {
            return Err(Error::invalid(format!(
                "coefficients {a:?} have RKHS norm {norm} > {radius}"
            )));
        }
        members.push(
            Hypothesis::new(
                format!("rkhs-{i}"),
                "gaussian_rkhs",
                SquaredLoss(Arc::new(h)),
                m,
            )
            .with_lipschitz(l),
        );
    }
    HypothesisClass::new("gaussian_rkhs", members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn sigmoid_constants() {
        let space = InstanceSpace::euclidean(2, 1.0, 1.0).unwrap();
        let class = make_sigmoid_network_class(
            &[vec![0.6, 0.8], vec![0.0, 0.0]],
            Nonlinearity::Tanh,
            &space,
        )
        .unwrap();
        let f = class.get(0);
        assert!((f.lipschitz().unwrap() - 8.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(f.upper_bound(), 4.0);
        let mut r = rng::seeded(1);
        for f in class.members() {
            f.check(&space, 1000, &mut r).unwrap();
        }
        assert!(make_sigmoid_network_class(&[vec![1.0, 1.0]], Nonlinearity::Tanh, &space).is_err());
    }

    #[test]
    fn rkhs_norm_is_enforced() {
        let space = InstanceSpace::euclidean(1, 1.0, 1.0).unwrap();
        let centers = vec![vec![0.0], vec![0.5]];
        let class = make_rkhs_ball_class(
            &centers,
            &[vec![0.5, 0.2], vec![0.0, 0.0]],
            1.0,
            1.0,
            &space,
        )
        .unwrap();
        let l = 2.0 * SQRT_2 * 2.0 * (1.0 + SQRT_2);
        assert!((class.lipschitz().unwrap() - l).abs() < 1e-12);
        assert_eq!(class.upper_bound(), 4.0);
        let mut r = rng::seeded(2);
        for f in class.members() {
            f.check(&space, 1000, &mut r).unwrap();
        }
        let err = make_rkhs_ball_class(&centers, &[vec![2.0, 2.0]], 1.0, 1.0, &space).unwrap_err();
        assert!(err.to_string().contains("[2.0, 2.0]"));
    }

    #[test]
    fn hinge_and_quadratic_constants() {
        let space = InstanceSpace::classification(2, 1.0).unwrap();
        let preds = linear_predictors(&[(vec![0.5, 0.0], 0.1), (vec![0.0, 0.0], 0.0)]);
        let class = make_hinge_class(preds.clone(), &space).unwrap();
        assert!((class.get(0).lipschitz().unwrap() - 1.2).abs() < 1e-12);
        assert!((class.get(0).upper_bound() - 1.6).abs() < 1e-12);
        let mut r = rng::seeded(3);
        for f in class.members() {
            f.check(&space, 1000, &mut r).unwrap();
        }

        let space = InstanceSpace::euclidean(2, 1.0, 1.0).unwrap();
        let class = make_quadratic_class(preds, &space).unwrap();
        assert!(class.get(1).anchor().is_some());
        assert!(class.get(0).anchor().is_none());
        for f in class.members() {
            f.check(&space, 1000, &mut r).unwrap();
        }
    }
}
