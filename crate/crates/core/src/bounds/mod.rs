//! Risk sandwiches, generalization and excess-risk bounds, and the
//! constants of the worked network and Gaussian-RKHS classes.
//!
//! Every calculator returns a [`BoundReport`] whose terms add up to its
//! value. Values are never capped at `M`; `vacuous` marks reports that
//! exceed it.

mod entropy;
mod rademacher;

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

pub use entropy::{
    adaptive_simpson, comp_entropy_integral, network_scale, rkhs_c1, upper_incomplete_gamma,
    EntropyProfile,
};
pub use rademacher::exact_rademacher;

use crate::error::{Error, Result};
use crate::space::pow_order;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
    pub term_breakdown: Vec<Term>,
    /// `value > M`, when `M` is among the inputs.
    pub vacuous: bool,
}

impl BoundReport {
    fn build(name: &str, inputs: &[(&str, f64)], terms: Vec<(&str, f64)>) -> Self {
        let inputs: BTreeMap<String, f64> =
            inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let value = terms.iter().map(|(_, v)| v).sum();
        let vacuous = inputs.get("m").is_some_and(|m| value > *m);
        BoundReport {
            bound_name: name.to_string(),
            inputs,
            value,
            term_breakdown: terms
                .into_iter()
                .map(|(n, v)| Term {
                    name: n.to_string(),
                    value: v,
                })
                .collect(),
            vacuous,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.term_breakdown
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.value)
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}

fn check_common(n: usize, rho: f64, p: f64) -> Result<()> {
    require(n >= 1, "sample size must be at least 1")?;
    require(rho.is_finite() && rho >= 0.0, "radius must be finite and >= 0")?;
    require(p.is_finite() && p >= 1.0, "order p must be >= 1")
}

fn check_delta(delta: f64) -> Result<()> {
    require(delta > 0.0 && delta < 1.0, "confidence delta must lie in (0, 1)")
}

/// `2 L rho`: `R(Q, f) <= R_{rho,p}(P, f) <= R(Q, f) + 2 L rho` for any
/// `Q` in the ball and `L`-Lipschitz `f`.
pub fn sandwich_lipschitz(l: f64, rho: f64) -> f64 {
    2.0 * l * rho
}

/// `4 rho (B + M) (1 + L sigma_sup)` for quadratic losses at order 2, where
/// `sigma_sup` bounds `E_Q |X|_2` over the ball.
pub fn sandwich_regression(b: f64, m: f64, l: f64, rho: f64, sigma_sup: f64) -> f64 {
    4.0 * rho * (b + m) * (1.0 + l * sigma_sup)
}

/// `t` with `2 exp(-2 t^2) = prob`.
pub fn t_for_failure_probability(prob: f64) -> f64 {
    ((2.0 / prob).ln() / 2.0).sqrt()
}

/// Data-dependent bound on `R_{rho,p}(P, f)`, holding for all `f` with
/// probability at least `1 - 2 exp(-2 t^2)`:
/// `min_lambda {(lambda + 1) rho^p + E_{P_n} phi_lambda + M sqrt(ln(lambda + 1)/n)}
///  + 24 Comp / sqrt(n) + M t / sqrt(n)`.
/// The minimum runs over `grid`, paired with `E_{P_n} phi_lambda` values.
#[allow(clippy::too_many_arguments)]
pub fn theorem1_bound(
    grid: &[(f64, f64)],
    rho: f64,
    p: f64,
    m: f64,
    comp: f64,
    n: usize,
    t: f64,
) -> Result<BoundReport> {
    check_common(n, rho, p)?;
    require(!grid.is_empty(), "lambda grid is empty")?;
    require(t > 0.0, "t must be positive")?;
    let sn = (n as f64).sqrt();
    let budget = pow_order(rho, p);
    let mut best = (f64::INFINITY, 0.0);
    for &(lambda, e_phi) in grid {
        require(lambda >= 0.0, "lambda grid values must be >= 0")?;
        let v = (lambda + 1.0) * budget + e_phi + m * (lambda + 1.0).ln().sqrt() / sn;
        if v < best.0 {
            best = (v, lambda);
        }
    }
    Ok(BoundReport::build(
        "data_dependent",
        &[
            ("n", n as f64),
            ("rho", rho),
            ("p", p),
            ("m", m),
            ("comp", comp),
            ("t", t),
            ("failure_probability", 2.0 * (-2.0 * t * t).exp()),
            ("lambda_selected", best.1),
            ("grid_size", grid.len() as f64),
        ],
        vec![
            ("lambda_minimum", best.0),
            ("complexity", 24.0 * comp / sn),
            ("deviation", m * t / sn),
        ],
    ))
}

/// Excess-risk bound for an `L`-Lipschitz class:
/// `48 Comp/sqrt(n) + 48 L diam^p / (sqrt(n) rho^(p-1)) + 3 M sqrt(ln(2/delta)/(2n))`.
#[allow(clippy::too_many_arguments)]
pub fn theorem2_bound(
    comp: f64,
    l: f64,
    diam: f64,
    rho: f64,
    p: f64,
    m: f64,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_common(n, rho, p)?;
    check_delta(delta)?;
    require(p == 1.0 || rho > 0.0, "radius must be positive when p > 1")?;
    let sn = (n as f64).sqrt();
    let nf = n as f64;
    Ok(BoundReport::build(
        "lipschitz_excess_risk",
        &[
            ("comp", comp),
            ("l", l),
            ("diam", diam),
            ("rho", rho),
            ("p", p),
            ("m", m),
            ("n", nf),
            ("delta", delta),
        ],
        vec![
            ("complexity", 48.0 * comp / sn),
            ("lambda_range", 48.0 * l * pow_order(diam, p) / (sn * rho.powf(p - 1.0))),
            ("deviation", 3.0 * m * ((2.0 / delta).ln() / (2.0 * nf)).sqrt()),
        ],
    ))
}

/// `C_0 2^(p-1) (1 + (diam / rho)^p)`, the smooth-anchor range of `lambda`.
fn anchor_range(c0: f64, diam: f64, rho: f64, p: f64) -> f64 {
    c0 * 2f64.powf(p - 1.0) * (1.0 + pow_order(diam / rho, p))
}

/// Excess-risk bound when one member has a smooth anchor `C_0`:
/// `48 Comp/sqrt(n) + 24 C_0 (2 diam)^p / sqrt(n) (1 + (diam/rho)^p)
///  + 3 M sqrt(ln(2/delta)/(2n))`.
#[allow(clippy::too_many_arguments)]
pub fn theorem3_bound(
    comp: f64,
    c0: f64,
    diam: f64,
    rho: f64,
    p: f64,
    m: f64,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_common(n, rho, p)?;
    check_delta(delta)?;
    require(rho > 0.0, "radius must be positive")?;
    let sn = (n as f64).sqrt();
    let nf = n as f64;
    Ok(BoundReport::build(
        "anchored_excess_risk",
        &[
            ("comp", comp),
            ("c0", c0),
            ("diam", diam),
            ("rho", rho),
            ("p", p),
            ("m", m),
            ("n", nf),
            ("delta", delta),
        ],
        vec![
            ("complexity", 48.0 * comp / sn),
            (
                "lambda_range",
                24.0 * c0 * pow_order(2.0 * diam, p) / sn * (1.0 + pow_order(diam / rho, p)),
            ),
            ("deviation", 3.0 * m * ((2.0 / delta).ln() / (2.0 * nf)).sqrt()),
        ],
    ))
}

/// Expected Rademacher complexity of `{phi_{lambda,f}}` over the anchored
/// `lambda` range: `24 Comp/sqrt(n) + 12 C_0 (2 diam)^p / sqrt(n) (1 + (diam/rho)^p)`.
pub fn rademacher_phi_bound(comp: f64, c0: f64, diam: f64, rho: f64, p: f64, n: usize) -> Result<BoundReport> {
    check_common(n, rho, p)?;
    require(rho > 0.0, "radius must be positive")?;
    let sn = (n as f64).sqrt();
    Ok(BoundReport::build(
        "rademacher_phi",
        &[
            ("comp", comp),
            ("c0", c0),
            ("diam", diam),
            ("rho", rho),
            ("p", p),
            ("n", n as f64),
            ("lambda_range", anchor_range(c0, diam, rho, p)),
        ],
        vec![
            ("complexity", 24.0 * comp / sn),
            (
                "lambda_range",
                12.0 * c0 * pow_order(2.0 * diam, p) / sn * (1.0 + pow_order(diam / rho, p)),
            ),
        ],
    ))
}

/// Target-domain excess risk after adaptation at radius `radius`:
/// `2 L radius + 48 Comp/sqrt(n) + 48 L diam^p / (sqrt(n) radius^(p-1))
///  + 3 M sqrt(ln(4/delta)) / sqrt(2n)`.
#[allow(clippy::too_many_arguments)]
pub fn adaptation_bound(
    l: f64,
    radius: f64,
    comp: f64,
    diam: f64,
    p: f64,
    m: f64,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_common(n, radius, p)?;
    check_delta(delta)?;
    require(p == 1.0 || radius > 0.0, "radius must be positive when p > 1")?;
    let sn = (n as f64).sqrt();
    let nf = n as f64;
    Ok(BoundReport::build(
        "adaptation_excess_risk",
        &[
            ("l", l),
            ("radius", radius),
            ("comp", comp),
            ("diam", diam),
            ("p", p),
            ("m", m),
            ("n", nf),
            ("delta", delta),
        ],
        vec![
            ("ambiguity", 2.0 * l * radius),
            ("complexity", 48.0 * comp / sn),
            ("lambda_range", 48.0 * l * pow_order(diam, p) / (sn * radius.powf(p - 1.0))),
            ("deviation", 3.0 * m * (4.0 / delta).ln().sqrt() / (2.0 * nf).sqrt()),
        ],
    ))
}

/// Parameters of the two worked classes (Euclidean product space, `p = 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorollaryParams {
    /// `(y - s(w.x))^2`, `|w|_2 <= 1`.
    Network {
        d: usize,
        r0: f64,
        b: f64,
        s_sup: f64,
        s_prime_sup: f64,
    },
    /// `(y - h(x))^2`, `|h|_K <= r` in the Gaussian RKHS of width `sigma`.
    Rkhs {
        d: usize,
        r0: f64,
        b: f64,
        sigma: f64,
        r: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryConstants {
    pub l: f64,
    pub m: f64,
    pub c1: f64,
    pub comp: f64,
    pub diam: f64,
    pub bound: BoundReport,
}

/// `L`, `M`, `C_1` and the closed-form excess-risk bound at `(n, delta)`.
pub fn corollary_constants(params: &CorollaryParams, n: usize, delta: f64) -> Result<CorollaryConstants> {
    require(n >= 1, "sample size must be at least 1")?;
    check_delta(delta)?;
    let sn = (n as f64).sqrt();
    let log_term = (2.0 / delta).ln().sqrt() / (2.0 * n as f64).sqrt();
    match *params {
        CorollaryParams::Network {
            d,
            r0,
            b,
            s_sup,
            s_prime_sup,
        } => {
            let comp = comp_entropy_integral(&EntropyProfile::EuclideanBallLipschitz {
                d,
                r0,
                b,
                s_sup,
                s_prime_sup,
            })?;
            let l = 2.0 * SQRT_2 * (b + s_sup) * (1.0 + s_prime_sup);
            let m = (s_sup + b).powi(2);
            let c1 = (b + s_sup)
                * (144.0 * r0 * (d as f64).sqrt() * s_prime_sup
                    + 192.0 * (1.0 + s_prime_sup) * (2.0 * (r0 * r0 + b * b)).sqrt());
            let bound = BoundReport::build(
                "network_excess_risk",
                &[
                    ("d", d as f64),
                    ("r0", r0),
                    ("b", b),
                    ("s_sup", s_sup),
                    ("s_prime_sup", s_prime_sup),
                    ("n", n as f64),
                    ("delta", delta),
                    ("m", m),
                ],
                vec![("c1", c1 / sn), ("deviation", 3.0 * m * log_term)],
            );
            Ok(CorollaryConstants {
                l,
                m,
                c1,
                comp,
                diam: 2.0 * (r0 * r0 + b * b).sqrt(),
                bound,
            })
        }
        CorollaryParams::Rkhs { d, r0, b, sigma, r } => {
            let comp = comp_entropy_integral(&EntropyProfile::GaussianRkhs { d, r0, sigma, r, b })?;
            let l = 2.0 * SQRT_2 * (r + b) * (1.0 + r * SQRT_2 / sigma);
            let m = 2.0 * (r * r + b * b);
            let c1 = rkhs_c1(d, r0, sigma);
            let bound = BoundReport::build(
                "rkhs_excess_risk",
                &[
                    ("d", d as f64),
                    ("r0", r0),
                    ("b", b),
                    ("sigma", sigma),
                    ("r", r),
                    ("n", n as f64),
                    ("delta", delta),
                    ("m", m),
                ],
                vec![
                    ("c1", c1 * (r * r + b * r) / sn),
                    (
                        "lambda_range",
                        192.0 * SQRT_2 * (r + b) * (1.0 + r * SQRT_2 / sigma) * (r0 * r0 + b * b).sqrt() / sn,
                    ),
                    ("deviation", 6.0 * (r * r + b * b) * log_term),
                ],
            );
            Ok(CorollaryConstants {
                l,
                m,
                c1,
                comp,
                diam: 2.0 * (r0 * r0 + b * b).sqrt(),
                bound,
            })
        }
    }
}
