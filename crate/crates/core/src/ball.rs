use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::pow_order;

/// The Wasserstein ball `{Q : W_p(P, Q) <= rho}` around a reference measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityBall {
    pub p: f64,
    pub rho: f64,
}

impl AmbiguityBall {
    pub fn new(p: f64, rho: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid(format!("order p must be >= 1, got {p}")));
        }
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::invalid(format!(
                "radius must be finite and >= 0, got {rho}"
            )));
        }
        Ok(AmbiguityBall { p, rho })
    }

    /// Transport budget `rho^p`.
    pub fn budget(&self) -> f64 {
        pow_order(self.rho, self.p)
    }
}
