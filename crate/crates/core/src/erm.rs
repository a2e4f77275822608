//! Ordinary ERM, local minimax ERM and the fixed-`lambda` relaxation over a
//! finite hypothesis class. Ties always go to the lowest hypothesis index.

use serde::{Deserialize, Serialize};

use crate::ball::AmbiguityBall;
use crate::dual::{anchor_bracket, lipschitz_bracket, solve_on, Bracket, DualSolution, Geometry};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::space::{EmpiricalDistribution, InstanceSpace, Point};

/// A finite, ordered hypothesis class.
#[derive(Clone, Debug)]
pub struct HypothesisClass {
    name: String,
    members: Vec<Hypothesis>,
}

impl HypothesisClass {
    pub fn new(name: impl Into<String>, members: Vec<Hypothesis>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("hypothesis class is empty"));
        }
        Ok(HypothesisClass {
            name: name.into(),
            members,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, index: usize) -> &Hypothesis {
        &self.members[index]
    }

    /// Largest member bound `M`.
    pub fn upper_bound(&self) -> f64 {
        self.members
            .iter()
            .map(Hypothesis::upper_bound)
            .fold(0.0, f64::max)
    }

    /// Upper end for `lambda*` of the minimax selection: the Lipschitz
    /// bracket when every member is Lipschitz, the anchor bracket of any
    /// anchored member, the smaller of the two when both apply.
    pub fn lambda_bracket(&self, ball: &AmbiguityBall, space: &InstanceSpace) -> Result<Option<f64>> {
        if ball.rho == 0.0 {
            return Err(Error::invalid("lambda bracket is undefined at radius 0"));
        }
        let mut out = self.lipschitz().map(|l| lipschitz_bracket(l, ball));
        for h in &self.members {
            if let Some(b) = h.anchor().and_then(|a| anchor_bracket(a, ball, space)) {
                out = Some(out.map_or(b, |v| v.min(b)));
            }
        }
        Ok(out)
    }

    /// Uniform Lipschitz constant, if every member declares one.
    pub fn lipschitz(&self) -> Option<f64> {
        self.members
            .iter()
            .map(Hypothesis::lipschitz)
            .try_fold(0.0, |acc: f64, l| l.map(|l| acc.max(l)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisValue {
    pub id: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErmResult {
    pub selected_index: usize,
    pub selected_id: String,
    pub objective: f64,
    pub per_hypothesis: Vec<HypothesisValue>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ball: Option<AmbiguityBall>,
    /// Dual solution of the selected hypothesis.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dual: Option<DualSolution>,
    /// Grid value of `lambda` chosen by the fixed-`lambda` relaxation.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

fn table(class: &HypothesisClass, values: &[f64]) -> Vec<HypothesisValue> {
    class
        .members
        .iter()
        .zip(values)
        .map(|(h, v)| HypothesisValue {
            id: h.id().to_string(),
            value: *v,
        })
        .collect()
}

/// `E_{P_n} f`, exact for constant losses.
pub fn empirical_risk(h: &Hypothesis, sample: &EmpiricalDistribution) -> f64 {
    h.constant_value()
        .unwrap_or_else(|| sample.expect(|z| h.eval(z)))
}

/// `argmin_f E_{P_n} f`.
pub fn ordinary_erm(class: &HypothesisClass, sample: &EmpiricalDistribution) -> Result<ErmResult> {
    let values: Vec<f64> = class
        .members
        .iter()
        .map(|h| empirical_risk(h, sample))
        .collect();
    let best = argmin(&values);
    Ok(ErmResult {
        selected_index: best,
        selected_id: class.members[best].id().to_string(),
        objective: values[best],
        per_hypothesis: table(class, &values),
        ball: None,
        dual: None,
        lambda: None,
    })
}

/// `argmin_f R_{rho,p}(P_n, f)` with the worst case taken over `candidates`
/// plus the sample support.
pub fn minimax_erm(
    class: &HypothesisClass,
    sample: &EmpiricalDistribution,
    ball: &AmbiguityBall,
    candidates: &[Point],
    space: &InstanceSpace,
) -> Result<ErmResult> {
    sample.validate_in(space)?;
    let geo = Geometry::new(sample, candidates, ball.p, space)?;
    minimax_erm_on(class, &geo, ball, space)
}

/// [`minimax_erm`] on a precomputed geometry.
pub fn minimax_erm_on(
    class: &HypothesisClass,
    geo: &Geometry,
    ball: &AmbiguityBall,
    space: &InstanceSpace,
) -> Result<ErmResult> {
    let mut duals = Vec::with_capacity(class.len());
    for h in &class.members {
        duals.push(solve_on(geo, h, ball, space, Bracket::Auto)?);
    }
    let values: Vec<f64> = duals.iter().map(|d| d.value).collect();
    let best = argmin(&values);
    Ok(ErmResult {
        selected_index: best,
        selected_id: class.members[best].id().to_string(),
        objective: values[best],
        per_hypothesis: table(class, &values),
        ball: Some(*ball),
        dual: Some(duals.swap_remove(best)),
        lambda: None,
    })
}

/// Minimizes `lambda rho^p + E_{P_n}[phi_lambda]` jointly over the class and a
/// finite `lambda` grid. Never below the exact minimax objective.
pub fn fixed_lambda_erm(
    class: &HypothesisClass,
    sample: &EmpiricalDistribution,
    lambda_grid: &[f64],
    ball: &AmbiguityBall,
    candidates: &[Point],
    space: &InstanceSpace,
) -> Result<ErmResult> {
    if lambda_grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::invalid(format!(
            "lambda grid value {l} is not a nonnegative number"
        )));
    }
    sample.validate_in(space)?;
    let geo = Geometry::new(sample, candidates, ball.p, space)?;
    let budget = ball.budget();
    let mut values = Vec::with_capacity(class.len());
    let mut lambdas = Vec::with_capacity(class.len());
    for h in &class.members {
        let prob = geo.problem(h);
        let objs: Vec<f64> = lambda_grid
            .iter()
            .map(|l| prob.objective(*l, budget))
            .collect();
        let k = argmin(&objs);
        values.push(objs[k]);
        lambdas.push(lambda_grid[k]);
    }
    let best = argmin(&values);
    Ok(ErmResult {
        selected_index: best,
        selected_id: class.members[best].id().to_string(),
        objective: values[best],
        per_hypothesis: table(class, &values),
        ball: Some(*ball),
        dual: None,
        lambda: Some(lambdas[best]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{ConstantLoss, StepLoss};

    fn casebook_class(alpha: f64) -> HypothesisClass {
        HypothesisClass::new(
            "casebook",
            vec![
                Hypothesis::new("f0", "casebook", ConstantLoss(1.0), 1.0),
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
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ordinary_erm_picks_the_step() {
        let s = crate::space::sample_uniform_interval(20, 5).unwrap();
        let r = ordinary_erm(&casebook_class(10.0), &s).unwrap();
        assert_eq!(r.selected_id, "f1");
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn ties_go_to_the_first_member() {
        let class = HypothesisClass::new(
            "pair",
            vec![
                Hypothesis::new("a", "c", ConstantLoss(0.5), 1.0),
                Hypothesis::new("b", "c", ConstantLoss(0.5), 1.0),
            ],
        )
        .unwrap();
        let s = crate::space::sample_uniform_interval(3, 1).unwrap();
        assert_eq!(ordinary_erm(&class, &s).unwrap().selected_index, 0);
    }

    #[test]
    fn large_radius_selects_the_constant() {
        let space = InstanceSpace::interval(0.0, 2.0).unwrap();
        let s = crate::space::sample_uniform_interval(20, 9).unwrap();
        let ball = AmbiguityBall::new(1.0, 0.4).unwrap();
        let r = minimax_erm(
            &casebook_class(10.0),
            &s,
            &ball,
            &[Point::scalar(1.0)],
            &space,
        )
        .unwrap();
        assert_eq!(r.selected_id, "f0");
        assert_eq!(r.objective, 1.0);
    }

    #[test]
    fn empty_class_and_grid_rejected() {
        assert!(HypothesisClass::new("e", vec![]).is_err());
        let space = InstanceSpace::interval(0.0, 2.0).unwrap();
        let s = crate::space::sample_uniform_interval(3, 1).unwrap();
        let ball = AmbiguityBall::new(1.0, 0.1).unwrap();
        assert!(fixed_lambda_erm(
            &casebook_class(2.0),
            &s,
            &[],
            &ball,
            &[Point::scalar(1.0)],
            &space
        )
        .is_err());
    }
}
