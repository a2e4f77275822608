//! Worst-case risk through the dual in `lambda`:
//!
//! `R(Q, f) = min_{lambda >= 0} lambda rho^p + E_Q[phi_lambda(Z)]`,
//! `phi_lambda(z) = max_{z' in C} f(z') - lambda d(z, z')^p`,
//!
//! with `C` a finite candidate set that always contains the support of `Q`.

use serde::{Deserialize, Serialize};

use crate::ball::AmbiguityBall;
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, SmoothAnchor};
use crate::space::{pow_order, EmpiricalDistribution, InstanceSpace, Point};
use crate::transport::merge_candidates;

/// Absolute tolerance of the golden-section search in `lambda`.
pub const LAMBDA_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub lambda_star: f64,
    pub value: f64,
    /// `phi_{lambda*}(Z_i)` per support atom.
    pub surrogate_values: Vec<f64>,
    pub bracket: [f64; 2],
    /// Per support atom, the index of the maximizing candidate in the merged
    /// candidate set (caller candidates, then unseen support points).
    pub inner_argmax: Vec<usize>,
}

/// `phi_lambda(z)` and a maximizing candidate (lowest index on ties). `z`
/// itself is searched last if it is not among `candidates`, so the result is
/// never below `f(z)`.
pub fn phi(
    f: &Hypothesis,
    lambda: f64,
    z: &Point,
    candidates: &[Point],
    p: f64,
    space: &InstanceSpace,
) -> Result<(f64, Point)> {
    if candidates.is_empty() {
        return Err(Error::invalid("candidate set is empty"));
    }
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    let mut best = f64::NEG_INFINITY;
    let mut arg = z;
    for c in candidates.iter().chain(std::iter::once(z)) {
        let v = f.eval(c) - lambda * pow_order(space.distance(z, c)?, p);
        if v > best {
            best = v;
            arg = c;
        }
    }
    Ok((best, arg.clone()))
}

/// Support weights, candidate set and the cost matrix `d(z_i, c_j)^p`
/// shared by every hypothesis evaluated on the same sample.
#[derive(Clone, Debug)]
pub struct Geometry {
    weights: Vec<f64>,
    candidates: Vec<Point>,
    /// Row-major `n x k`.
    cost: Vec<f64>,
    /// Column of each support atom inside `candidates`.
    self_index: Vec<usize>,
    p: f64,
}

impl Geometry {
    pub fn new(
        q: &EmpiricalDistribution,
        candidates: &[Point],
        p: f64,
        space: &InstanceSpace,
    ) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("candidate set is empty"));
        }
        let cands = merge_candidates(q.support(), candidates);
        let cost = space.cost_matrix(q.support(), &cands, p)?;
        let self_index = q
            .support()
            .iter()
            .map(|z| {
                cands
                    .iter()
                    .position(|c| c == z)
                    .expect("support is merged")
            })
            .collect();
        Ok(Geometry {
            weights: q.weights().to_vec(),
            candidates: cands,
            cost,
            self_index,
            p,
        })
    }

    pub fn candidates(&self) -> &[Point] {
        &self.candidates
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Evaluates `f` on the candidate set once.
    pub fn problem<'a>(&'a self, f: &Hypothesis) -> DualProblem<'a> {
        let values = match f.constant_value() {
            Some(c) => vec![c; self.candidates.len()],
            None => self.candidates.iter().map(|c| f.eval(c)).collect(),
        };
        DualProblem {
            geo: self,
            values,
            constant: f.constant_value(),
        }
    }
}

/// The dual objective of one hypothesis on a fixed [`Geometry`].
#[derive(Clone, Debug)]
pub struct DualProblem<'a> {
    geo: &'a Geometry,
    values: Vec<f64>,
    constant: Option<f64>,
}

impl DualProblem<'_> {
    fn k(&self) -> usize {
        self.geo.candidates.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.geo.cost[i * k..(i + 1) * k]
    }

    /// `f(Z_i)` per support atom.
    pub fn support_values(&self) -> Vec<f64> {
        self.geo
            .self_index
            .iter()
            .map(|&j| self.values[j])
            .collect()
    }

    /// `E_Q f`.
    pub fn plain_risk(&self) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        self.geo
            .weights
            .iter()
            .zip(&self.geo.self_index)
            .map(|(w, &j)| w * self.values[j])
            .sum()
    }

    /// `phi_lambda(Z_i)` and its argmax column (lowest index on ties).
    pub fn phi_at(&self, i: usize, lambda: f64) -> (f64, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (j, (v, c)) in self.values.iter().zip(self.row(i)).enumerate() {
            let s = v - lambda * c;
            if s > best {
                best = s;
                arg = j;
            }
        }
        (best, arg)
    }

    /// `E_Q[phi_lambda]`.
    pub fn expected_phi(&self, lambda: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        (0..self.geo.len())
            .map(|i| self.geo.weights[i] * self.phi_at(i, lambda).0)
            .sum()
    }

    /// `g(lambda) = lambda rho^p + E_Q[phi_lambda]`.
    pub fn objective(&self, lambda: f64, budget: f64) -> f64 {
        lambda * budget + self.expected_phi(lambda)
    }

    /// `max (f(c) - f(Z_i)) / d(Z_i, c)^p` over support atoms and candidates
    /// at positive distance, floored at 0. Above it `phi_lambda(Z_i) = f(Z_i)`
    /// for every atom, so every minimizer of the dual lies in `[0, hat]`.
    pub fn empirical_threshold(&self) -> f64 {
        let mut hat: f64 = 0.0;
        for (i, &s) in self.geo.self_index.iter().enumerate() {
            let fz = self.values[s];
            for (v, c) in self.values.iter().zip(self.row(i)) {
                if *c > 0.0 && *v > fz {
                    hat = hat.max((v - fz) / c);
                }
            }
        }
        hat
    }

    /// Minimizes the dual on `[0, lambda_max]`; `lambda_max = None` uses
    /// [`Self::empirical_threshold`].
    pub fn solve(&self, rho: f64, lambda_max: Option<f64>) -> Result<DualSolution> {
        let p = self.geo.p;
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::invalid(format!("radius must be >= 0, got {rho}")));
        }
        let hat = self.empirical_threshold();
        if rho == 0.0 {
            let surrogate_values = self.support_values();
            return Ok(DualSolution {
                lambda_star: hat,
                value: self.plain_risk(),
                surrogate_values,
                bracket: [0.0, hat],
                inner_argmax: self.geo.self_index.clone(),
            });
        }
        let budget = pow_order(rho, p);
        let hi = lambda_max.unwrap_or(hat);
        if !(hi.is_finite() && hi >= 0.0) {
            return Err(Error::invalid(format!(
                "invalid lambda bracket upper end {hi}"
            )));
        }
        let g = |l: f64| self.objective(l, budget);
        let lambda_star = if self.constant.is_some() {
            0.0
        } else {
            golden_section(g, 0.0, hi, LAMBDA_TOL)
        };
        let mut phis = Vec::with_capacity(self.geo.len());
        let mut args = Vec::with_capacity(self.geo.len());
        for i in 0..self.geo.len() {
            let (v, j) = self.phi_at(i, lambda_star);
            phis.push(v);
            args.push(j);
        }
        let value = match self.constant {
            Some(c) => c,
            None => {
                lambda_star * budget
                    + phis
                        .iter()
                        .zip(&self.geo.weights)
                        .map(|(v, w)| v * w)
                        .sum::<f64>()
            }
        };
        Ok(DualSolution {
            lambda_star,
            value,
            surrogate_values: phis,
            bracket: [0.0, hi],
            inner_argmax: args,
        })
    }
}

/// Golden-section minimization of a convex `g` on `[a, b]` down to an
/// interval of width `tol`, followed by a comparison with both endpoints.
/// Ties go to the smaller argument.
pub fn golden_section(g: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    let mut iters = 0;
    while hi - lo > tol && iters < 400 {
        iters += 1;
        if g1 <= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = g(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = (g(a), a);
    for x in [mid, b] {
        let v = g(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Upper end of the `lambda` search interval from the hypothesis metadata:
/// `L rho^(1-p)` for an `L`-Lipschitz loss, and
/// `C_0 2^(p-1) (1 + (diam/rho)^p)` for a loss with a smooth anchor, taking
/// the smaller when both apply. `Ok(None)` when neither is declared.
pub fn lambda_bracket(
    f: &Hypothesis,
    ball: &AmbiguityBall,
    space: &InstanceSpace,
) -> Result<Option<f64>> {
    if ball.rho == 0.0 {
        return Err(Error::invalid("lambda bracket is undefined at radius 0"));
    }
    let mut out = f.lipschitz().map(|l| lipschitz_bracket(l, ball));
    if let Some(b) = f.anchor().and_then(|a| anchor_bracket(a, ball, space)) {
        out = Some(out.map_or(b, |v| v.min(b)));
    }
    Ok(out)
}

/// `L rho^(1-p)`.
pub fn lipschitz_bracket(l: f64, ball: &AmbiguityBall) -> f64 {
    l * ball.rho.powf(1.0 - ball.p)
}

/// `C_0 2^(p-1) (1 + (diam/rho)^p)` for an anchor usable at order `p`. This
/// also bounds `lambda*` of the minimax selection in any class containing
/// the anchored hypothesis, as long as all losses are nonnegative.
pub fn anchor_bracket(anchor: &SmoothAnchor, ball: &AmbiguityBall, space: &InstanceSpace) -> Option<f64> {
    let p = ball.p;
    anchor
        .constant_for(p, space.diameter())
        .map(|c0| c0 * 2f64.powf(p - 1.0) * (1.0 + pow_order(space.diameter() / ball.rho, p)))
}

/// How [`local_worst_case_risk_with`] picks the upper end of the search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bracket {
    /// Lipschitz/anchor bound when declared, empirical threshold otherwise.
    Auto,
    /// Always the empirical threshold.
    Empirical,
    Fixed(f64),
}

/// `R_{rho,p}(Q, f)` over the candidate set via the dual.
pub fn local_worst_case_risk(
    f: &Hypothesis,
    q: &EmpiricalDistribution,
    ball: &AmbiguityBall,
    candidates: &[Point],
    space: &InstanceSpace,
) -> Result<DualSolution> {
    local_worst_case_risk_with(f, q, ball, candidates, space, Bracket::Auto)
}

pub fn local_worst_case_risk_with(
    f: &Hypothesis,
    q: &EmpiricalDistribution,
    ball: &AmbiguityBall,
    candidates: &[Point],
    space: &InstanceSpace,
    bracket: Bracket,
) -> Result<DualSolution> {
    q.validate_in(space)?;
    let geo = Geometry::new(q, candidates, ball.p, space)?;
    solve_on(&geo, f, ball, space, bracket)
}

pub(crate) fn solve_on(
    geo: &Geometry,
    f: &Hypothesis,
    ball: &AmbiguityBall,
    space: &InstanceSpace,
    bracket: Bracket,
) -> Result<DualSolution> {
    let prob = geo.problem(f);
    if ball.rho == 0.0 {
        return prob.solve(0.0, None);
    }
    let hi = match bracket {
        Bracket::Auto => lambda_bracket(f, ball, space)?,
        Bracket::Empirical => None,
        Bracket::Fixed(v) => Some(v),
    };
    prob.solve(ball.rho, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{ConstantLoss, StepLoss};
    use crate::transport::primal_worst_case_risk;

    fn line() -> InstanceSpace {
        InstanceSpace::interval(0.0, 2.0).unwrap()
    }

    fn step(alpha: f64) -> Hypothesis {
        Hypothesis::new(
            "f1",
            "casebook",
            StepLoss {
                coord: 0,
                threshold: 1.0,
                below: 0.0,
                above: alpha,
            },
            alpha,
        )
    }

    #[test]
    fn phi_at_zero_lambda_is_the_max() {
        let cands = [Point::scalar(0.2), Point::scalar(1.5)];
        let (v, arg) = phi(&step(3.0), 0.0, &Point::scalar(0.1), &cands, 1.0, &line()).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(arg, Point::scalar(1.5));
    }

    #[test]
    fn phi_of_constant_is_constant() {
        let f = Hypothesis::new("c", "t", ConstantLoss(0.4), 1.0);
        let cands = [Point::scalar(0.2), Point::scalar(1.5)];
        for lam in [0.0, 0.3, 10.0] {
            let (v, _) = phi(&f, lam, &Point::scalar(0.2), &cands, 2.0, &line()).unwrap();
            assert_eq!(v, 0.4);
        }
    }

    #[test]
    fn phi_past_threshold_is_the_loss() {
        // (f(1) - f(0.5)) / d = 3 / 0.5 = 6.
        let cands = [Point::scalar(0.5), Point::scalar(1.0)];
        let (v, _) = phi(&step(3.0), 6.0, &Point::scalar(0.5), &cands, 1.0, &line()).unwrap();
        assert_eq!(v, 0.0);
        let (v, _) = phi(&step(3.0), 5.9, &Point::scalar(0.5), &cands, 1.0, &line()).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn zero_radius_returns_plain_risk() {
        let q =
            EmpiricalDistribution::uniform(vec![Point::scalar(0.5), Point::scalar(1.2)]).unwrap();
        let ball = AmbiguityBall::new(1.0, 0.0).unwrap();
        let sol =
            local_worst_case_risk(&step(4.0), &q, &ball, &[Point::scalar(1.0)], &line()).unwrap();
        assert_eq!(sol.value, 2.0);
        assert_eq!(sol.lambda_star, 8.0);
    }

    #[test]
    fn matches_primal_on_step() {
        let q = EmpiricalDistribution::uniform(
            [0.1, 0.4, 0.9].iter().map(|x| Point::scalar(*x)).collect(),
        )
        .unwrap();
        let cands = [Point::scalar(1.0), Point::scalar(1.5)];
        for p in [1.0, 2.0] {
            for rho in [0.01, 0.1, 0.5] {
                let ball = AmbiguityBall::new(p, rho).unwrap();
                let d = local_worst_case_risk(&step(10.0), &q, &ball, &cands, &line()).unwrap();
                let pr = primal_worst_case_risk(&step(10.0), &q, &ball, &cands, &line()).unwrap();
                assert!(
                    (d.value - pr.value).abs() < 1e-6,
                    "p={p} rho={rho}: {} vs {}",
                    d.value,
                    pr.value
                );
            }
        }
    }

    #[test]
    fn bracket_formulas() {
        let s = line();
        let lip = step(1.0).with_lipschitz(3.0);
        let b = lambda_bracket(&lip, &AmbiguityBall::new(1.0, 0.7).unwrap(), &s).unwrap();
        assert_eq!(b, Some(3.0));
        let lip = step(1.0).with_lipschitz(1.0);
        let b = lambda_bracket(&lip, &AmbiguityBall::new(2.0, 0.5).unwrap(), &s).unwrap();
        assert_eq!(b, Some(2.0));
        let anchored = step(1.0).with_anchor(crate::hypothesis::SmoothAnchor {
            c0: 1.0,
            z0: Point::scalar(0.0),
            order: 1.0,
        });
        let b = lambda_bracket(&anchored, &AmbiguityBall::new(1.0, 0.5).unwrap(), &s).unwrap();
        assert_eq!(b, Some(5.0));
        assert_eq!(
            lambda_bracket(&step(1.0), &AmbiguityBall::new(1.0, 0.5).unwrap(), &s).unwrap(),
            None
        );
        assert!(lambda_bracket(&step(1.0), &AmbiguityBall::new(1.0, 0.0).unwrap(), &s).is_err());
    }

    #[test]
    fn golden_section_finds_kink() {
        let x = golden_section(|l| (l - 0.3).abs() + 1.0, 0.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        // Flat bottom: ties resolve toward the left end.
        let x = golden_section(|l| (l - 1.0).max(0.0), 0.0, 4.0, 1e-10);
        assert!(x < 1.0 + 1e-9);
    }
}
