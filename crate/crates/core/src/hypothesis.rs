//! Hypotheses: nonnegative bounded losses `f: Z -> [0, M]` with optional
//! regularity metadata, and the predictors the built-in losses wrap.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::space::{pow_order, InstanceSpace, Point};

pub trait Loss: Send + Sync + fmt::Debug {
    fn eval(&self, z: &Point) -> f64;

    /// `Some(c)` when the loss is identically `c`.
    fn constant_value(&self) -> Option<f64> {
        None
    }
}

/// `f(z) <= c0 * d(z, z0)^order` for every `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothAnchor {
    pub c0: f64,
    pub z0: Point,
    pub order: f64,
}

impl SmoothAnchor {
    /// Constant valid for exponent `p` on a space of diameter `diam`.
    /// An anchor of order `q >= p` converts via `d^q <= diam^(q-p) d^p`.
    pub fn constant_for(&self, p: f64, diam: f64) -> Option<f64> {
        if self.order == p {
            Some(self.c0)
        } else if self.order > p {
            Some(self.c0 * diam.powf(self.order - p))
        } else {
            None
        }
    }
}

#[derive(Clone)]
pub struct Hypothesis {
    id: String,
    family: String,
    loss: Arc<dyn Loss>,
    upper_bound: f64,
    lipschitz: Option<f64>,
    anchor: Option<SmoothAnchor>,
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypothesis")
            .field("id", &self.id)
            .field("family", &self.family)
            .field("loss", &self.loss)
            .field("upper_bound", &self.upper_bound)
            .field("lipschitz", &self.lipschitz)
            .field("anchor", &self.anchor)
            .finish()
    }
}

impl Hypothesis {
    pub fn new(
        id: impl Into<String>,
        family: impl Into<String>,
        loss: impl Loss + 'static,
        upper_bound: f64,
    ) -> Self {
        Hypothesis {
            id: id.into(),
            family: family.into(),
            loss: Arc::new(loss),
            upper_bound,
            lipschitz: None,
            anchor: None,
        }
    }

    pub fn from_fn<F>(id: impl Into<String>, upper_bound: f64, f: F) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        Self::new(id, "custom", FnLoss(Arc::new(f)), upper_bound)
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_anchor(mut self, anchor: SmoothAnchor) -> Self {
        self.anchor = Some(anchor);
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn anchor(&self) -> Option<&SmoothAnchor> {
        self.anchor.as_ref()
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.loss.constant_value()
    }

    pub fn eval(&self, z: &Point) -> f64 {
        self.loss.eval(z)
    }

    /// Spot-checks the declared metadata on `samples` random points (and
    /// random pairs) of `space`: range `[0, M]`, Lipschitz constant (slack
    /// 1e-9) and smooth anchor.
    pub fn check(&self, space: &InstanceSpace, samples: usize, rng: &mut Rng) -> Result<()> {
        let m = self.upper_bound;
        for _ in 0..samples {
            let z = space.sample_point(rng);
            let v = self.eval(&z);
            if !(v >= -1e-12 && v <= m + 1e-9) {
                return Err(Error::invalid(format!(
                    "{}: value {v} outside [0, {m}] at {z:?}",
                    self.id
                )));
            }
            if let Some(l) = self.lipschitz {
                let w = space.sample_point(rng);
                let gap = (v - self.eval(&w)).abs();
                let allowed = l * space.dist(&z, &w) + 1e-9;
                if gap > allowed {
                    return Err(Error::invalid(format!(
                        "{}: Lipschitz violation {gap} > {allowed}",
                        self.id
                    )));
                }
            }
            if let Some(a) = &self.anchor {
                let cap = a.c0 * pow_order(space.dist(&z, &a.z0), a.order) + 1e-9;
                if v > cap {
                    return Err(Error::invalid(format!(
                        "{}: anchor violation {v} > {cap}",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct FnLoss(pub Arc<dyn Fn(&Point) -> f64 + Send + Sync>);

impl fmt::Debug for FnLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnLoss")
    }
}

impl Loss for FnLoss {
    fn eval(&self, z: &Point) -> f64 {
        (self.0)(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantLoss(pub f64);

impl Loss for ConstantLoss {
    fn eval(&self, _: &Point) -> f64 {
        self.0
    }

    fn constant_value(&self) -> Option<f64> {
        Some(self.0)
    }
}

/// `below` when `x[coord] < threshold`, `above` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLoss {
    pub coord: usize,
    pub threshold: f64,
    pub below: f64,
    pub above: f64,
}

impl Loss for StepLoss {
    fn eval(&self, z: &Point) -> f64 {
        if z.features[self.coord] < self.threshold {
            self.below
        } else {
            self.above
        }
    }
}

/// `|x|_2`, used to maximize `E_Q |X|_2` over a ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureNormLoss;

impl Loss for FeatureNormLoss {
    fn eval(&self, z: &Point) -> f64 {
        z.features.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `max(0, 1 - y h(x))`.
#[derive(Clone, Debug)]
pub struct HingeLoss(pub Arc<dyn Predictor>);

impl Loss for HingeLoss {
    fn eval(&self, z: &Point) -> f64 {
        let y = z.label.unwrap_or(0.0);
        (1.0 - y * self.0.predict(&z.features)).max(0.0)
    }
}

/// `(y - h(x))^2`.
#[derive(Clone, Debug)]
pub struct SquaredLoss(pub Arc<dyn Predictor>);

impl Loss for SquaredLoss {
    fn eval(&self, z: &Point) -> f64 {
        let r = z.label.unwrap_or(0.0) - self.0.predict(&z.features);
        r * r
    }
}

/// Real-valued predictor `h: X -> R`.
pub trait Predictor: Send + Sync + fmt::Debug {
    fn predict(&self, x: &[f64]) -> f64;
    /// `sup_{|x|_2 <= r0} |h(x)|`, or an upper bound on it.
    fn sup_norm(&self, r0: f64) -> f64;
    /// Lipschitz constant with respect to `|.|_2`.
    fn lipschitz(&self) -> f64;
    fn is_zero(&self) -> bool {
        false
    }
}

/// `h(x) = w.x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearPredictor {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

impl Predictor for LinearPredictor {
    fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    fn sup_norm(&self, r0: f64) -> f64 {
        norm2(&self.weights) * r0 + self.bias.abs()
    }

    fn lipschitz(&self) -> f64 {
        norm2(&self.weights)
    }

    fn is_zero(&self) -> bool {
        self.bias == 0.0 && self.weights.iter().all(|w| *w == 0.0)
    }
}

/// `h(x) = w.x + b + height * clamp((x[coord] - start) / width, 0, 1)`: a
/// linear predictor plus a ramp that switches on past `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampPredictor {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub coord: usize,
    pub start: f64,
    pub width: f64,
    pub height: f64,
}

impl Predictor for RampPredictor {
    fn predict(&self, x: &[f64]) -> f64 {
        let t = ((x[self.coord] - self.start) / self.width).clamp(0.0, 1.0);
        dot(&self.weights, x) + self.bias + self.height * t
    }

    fn sup_norm(&self, r0: f64) -> f64 {
        norm2(&self.weights) * r0 + self.bias.abs() + self.height.abs()
    }

    fn lipschitz(&self) -> f64 {
        norm2(&self.weights) + self.height.abs() / self.width
    }
}

/// Bounded smooth nonlinearity with `s(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    Tanh,
    /// `2 sigmoid(t) - 1 = tanh(t / 2)`.
    CenteredLogistic,
}

impl Nonlinearity {
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Nonlinearity::Tanh => t.tanh(),
            Nonlinearity::CenteredLogistic => (0.5 * t).tanh(),
        }
    }

    /// `|s|_inf`.
    pub fn sup_norm(self) -> f64 {
        1.0
    }

    /// `|s'|_inf`.
    pub fn derivative_sup(self) -> f64 {
        match self {
            Nonlinearity::Tanh => 1.0,
            Nonlinearity::CenteredLogistic => 0.5,
        }
    }
}

/// `h(x) = s(w.x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmoidUnit {
    pub weights: Vec<f64>,
    pub nonlinearity: Nonlinearity,
}

impl Predictor for SigmoidUnit {
    fn predict(&self, x: &[f64]) -> f64 {
        self.nonlinearity.apply(dot(&self.weights, x))
    }

    fn sup_norm(&self, r0: f64) -> f64 {
        self.nonlinearity
            .apply(norm2(&self.weights) * r0)
            .abs()
            .min(self.nonlinearity.sup_norm())
    }

    fn lipschitz(&self) -> f64 {
        self.nonlinearity.derivative_sup() * norm2(&self.weights)
    }

    fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| *w == 0.0)
    }
}

/// Gaussian kernel `K(a, b) = exp(-|a - b|^2 / sigma^2)`.
pub fn gaussian_kernel(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
    (-sq / (sigma * sigma)).exp()
}

/// `h(x) = sum_k a_k K(c_k, x)` in the Gaussian RKHS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    pub centers: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub sigma: f64,
}

impl KernelExpansion {
    /// `|h|_K = sqrt(a^T G a)` with `G` the Gram matrix of the centers.
    pub fn rkhs_norm(&self) -> f64 {
        let mut q = 0.0;
        for (i, ci) in self.centers.iter().enumerate() {
            for (j, cj) in self.centers.iter().enumerate() {
                q += self.coefficients[i]
                    * self.coefficients[j]
                    * gaussian_kernel(ci, cj, self.sigma);
            }
        }
        q.max(0.0).sqrt()
    }
}

impl Predictor for KernelExpansion {
    fn predict(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, a)| a * gaussian_kernel(c, x, self.sigma))
            .sum()
    }

    /// Reproducing property: `|h(x)| <= |h|_K sqrt(K(x, x)) = |h|_K`.
    fn sup_norm(&self, _r0: f64) -> f64 {
        self.rkhs_norm()
    }

    /// `|K_x - K_x'|_K <= sqrt(2)/sigma |x - x'|_2`.
    fn lipschitz(&self) -> f64 {
        self.rkhs_norm() * std::f64::consts::SQRT_2 / self.sigma
    }

    fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|a| *a == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn constant_and_step() {
        let z = Point::scalar(0.5);
        assert_eq!(ConstantLoss(1.0).eval(&z), 1.0);
        let s = StepLoss {
            coord: 0,
            threshold: 1.0,
            below: 0.0,
            above: 10.0,
        };
        assert_eq!(s.eval(&z), 0.0);
        assert_eq!(s.eval(&Point::scalar(1.0)), 10.0);
    }

    #[test]
    fn anchor_order_conversion() {
        let a = SmoothAnchor {
            c0: 1.0,
            z0: Point::labeled(vec![0.0], 0.0),
            order: 2.0,
        };
        assert_eq!(a.constant_for(2.0, 3.0), Some(1.0));
        assert_eq!(a.constant_for(1.0, 3.0), Some(3.0));
        assert_eq!(a.constant_for(3.0, 3.0), None);
    }

    #[test]
    fn check_catches_wrong_lipschitz_constant() {
        let space = InstanceSpace::euclidean(1, 1.0, 1.0).unwrap();
        let pred = Arc::new(LinearPredictor {
            weights: vec![2.0],
            bias: 0.0,
        });
        let mut r = rng::seeded(4);
        let honest = Hypothesis::new("q", "quadratic", SquaredLoss(pred.clone()), 9.0)
            .with_lipschitz(2.0 * std::f64::consts::SQRT_2 * (1.0 + 2.0) * (1.0 + 2.0));
        honest.check(&space, 500, &mut r).unwrap();
        let liar = Hypothesis::new("q", "quadratic", SquaredLoss(pred), 9.0).with_lipschitz(0.1);
        assert!(liar.check(&space, 500, &mut r).is_err());
    }

    #[test]
    fn kernel_sup_norm_bounds_values() {
        let h = KernelExpansion {
            centers: vec![vec![0.0], vec![0.5]],
            coefficients: vec![0.7, -0.3],
            sigma: 0.8,
        };
        let norm = h.rkhs_norm();
        for k in 0..=100 {
            let x = -1.0 + 0.02 * k as f64;
            assert!(h.predict(&[x]).abs() <= norm + 1e-12);
        }
    }
}
