//! Exact optimal transport between finite supports and the primal worst-case
//! risk over a Wasserstein ball restricted to a finite candidate set.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ball::AmbiguityBall;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::lp::{LinearProgram, Relation};
use crate::network_simplex::solve_transport;
use crate::space::{EmpiricalDistribution, InstanceSpace, Point};

/// A coupling between two finite supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub source_support: Vec<Point>,
    pub target_support: Vec<Point>,
    /// `plan[i][j]`: mass moved from source atom `i` to target atom `j`.
    pub plan: Vec<Vec<f64>>,
    /// `sum_ij plan[i][j] d(z_i, z_j)^p`.
    pub cost: f64,
    pub p: f64,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.target_support.len()];
        for row in &self.plan {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    /// Recomputes `<plan, C>` with `C_ij = d(z_i, z_j)^p`.
    pub fn recompute_cost(&self, space: &InstanceSpace) -> Result<f64> {
        let c = space.cost_matrix(&self.source_support, &self.target_support, self.p)?;
        let k = self.target_support.len();
        Ok(self
            .plan
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| v * c[i * k + j])
                    .sum::<f64>()
            })
            .sum())
    }

    /// Checks nonnegativity, both marginals (within `tol`) and the stored cost.
    pub fn verify(
        &self,
        source_weights: &[f64],
        target_weights: &[f64],
        space: &InstanceSpace,
        tol: f64,
    ) -> Result<()> {
        if self.plan.iter().flatten().any(|v| *v < 0.0) {
            return Err(Error::Solver("negative plan entry".into()));
        }
        for (i, (r, w)) in self.row_sums().iter().zip(source_weights).enumerate() {
            if (r - w).abs() > tol {
                return Err(Error::Solver(format!("row {i} sums to {r}, expected {w}")));
            }
        }
        for (j, (c, w)) in self.col_sums().iter().zip(target_weights).enumerate() {
            if (c - w).abs() > tol {
                return Err(Error::Solver(format!(
                    "column {j} sums to {c}, expected {w}"
                )));
            }
        }
        let cost = self.recompute_cost(space)?;
        if (cost - self.cost).abs() > tol {
            return Err(Error::Solver(format!(
                "stored cost {} but recomputed {cost}",
                self.cost
            )));
        }
        Ok(())
    }

    /// CSV matrix: a header of target indices, then one row per source atom.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source");
        for j in 0..self.target_support.len() {
            let _ = write!(out, ",t{j}");
        }
        out.push('\n');
        for (i, row) in self.plan.iter().enumerate() {
            let _ = write!(out, "s{i}");
            for v in row {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }
}

fn check_same_space(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    space: &InstanceSpace,
) -> Result<()> {
    a.validate_in(space)?;
    b.validate_in(space)?;
    if space.is_labeled() && a.support()[0].label.is_some() != b.support()[0].label.is_some() {
        return Err(Error::structural(
            "one distribution is labeled and the other is not",
        ));
    }
    Ok(())
}

/// `W_p(A, B)` and an optimal coupling.
pub fn wasserstein(
    p: f64,
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    space: &InstanceSpace,
) -> Result<(f64, TransportPlan)> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("order p must be >= 1, got {p}")));
    }
    check_same_space(a, b, space)?;
    let cost = space.cost_matrix(a.support(), b.support(), p)?;
    let sol = solve_transport(a.weights(), b.weights(), &cost)?;
    let k = b.len();
    let plan: Vec<Vec<f64>> = sol.flow.chunks(k).map(<[f64]>::to_vec).collect();
    let value = sol.cost.max(0.0).powf(1.0 / p);
    Ok((
        value,
        TransportPlan {
            source_support: a.support().to_vec(),
            target_support: b.support().to_vec(),
            plan,
            cost: sol.cost,
            p,
        },
    ))
}

/// Caller candidates followed by every support point not already among them.
/// Both the primal and the dual routes search this same set, in this order.
pub fn merge_candidates(support: &[Point], candidates: &[Point]) -> Vec<Point> {
    let mut out = candidates.to_vec();
    for z in support {
        if !out.contains(z) {
            out.push(z.clone());
        }
    }
    out
}

/// The maximizing distribution of a primal worst-case solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseCertificate {
    pub distribution: EmpiricalDistribution,
    pub value: f64,
    pub plan: TransportPlan,
    /// Size of the candidate set searched (support points included).
    pub candidate_count: usize,
}

/// `sup { E_Q f : W_p(P, Q) <= rho, supp Q in candidates }` as a linear
/// program over couplings with a free second marginal. Support points of `P`
/// are added to the candidates so every atom can stay put.
pub fn primal_worst_case_risk(
    f: &Hypothesis,
    p_dist: &EmpiricalDistribution,
    ball: &AmbiguityBall,
    candidates: &[Point],
    space: &InstanceSpace,
) -> Result<WorstCaseCertificate> {
    if candidates.is_empty() {
        return Err(Error::invalid("candidate set is empty"));
    }
    p_dist.validate_in(space)?;
    let cands = merge_candidates(p_dist.support(), candidates);
    let (n, k) = (p_dist.len(), cands.len());
    let cost = space.cost_matrix(p_dist.support(), &cands, ball.p)?;
    let values: Vec<f64> = cands.iter().map(|c| f.eval(c)).collect();

    let objective: Vec<f64> = (0..n * k).map(|e| values[e % k]).collect();
    let mut lp = LinearProgram::maximize(objective);
    for (i, w) in p_dist.weights().iter().enumerate() {
        let mut row = vec![0.0; n * k];
        row[i * k..(i + 1) * k].iter_mut().for_each(|v| *v = 1.0);
        lp.constraint(row, Relation::Eq, *w);
    }
    lp.constraint(cost.clone(), Relation::Le, ball.budget());
    let sol = lp.solve()?;

    let mut mass = vec![0.0; k];
    for (e, x) in sol.x.iter().enumerate() {
        mass[e % k] += x;
    }
    let keep: Vec<usize> = (0..k).filter(|&j| mass[j] > 0.0).collect();
    let total: f64 = keep.iter().map(|&j| mass[j]).sum();
    let distribution = EmpiricalDistribution::new(
        keep.iter().map(|&j| cands[j].clone()).collect(),
        keep.iter().map(|&j| mass[j] / total).collect(),
    )?;
    let plan: Vec<Vec<f64>> = (0..n)
        .map(|i| keep.iter().map(|&j| sol.x[i * k + j]).collect())
        .collect();
    let plan_cost = (0..n)
        .flat_map(|i| keep.iter().map(move |&j| (i, j)))
        .map(|(i, j)| sol.x[i * k + j] * cost[i * k + j])
        .sum();
    let value = distribution.expect(|z| f.eval(z));
    Ok(WorstCaseCertificate {
        distribution,
        value,
        plan: TransportPlan {
            source_support: p_dist.support().to_vec(),
            target_support: keep.iter().map(|&j| cands[j].clone()).collect(),
            plan,
            cost: plan_cost,
            p: ball.p,
        },
        candidate_count: k,
    })
}
