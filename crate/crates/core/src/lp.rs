//! Dense two-phase simplex for small linear programs.
//!
//! Used as the exact oracle for the primal worst-case risk and as an
//! independent cross-check of the transport solver. Problems here have at
//! most a few hundred columns, so a full tableau is fine.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `maximize c^T x` subject to linear rows and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::maximize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "constraint width");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Solves the program. The reported objective is recomputed from `x` in
    /// the caller's sense (maximization unless built with [`Self::minimize`],
    /// in which case it is the negated minimum).
    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.objective.len();
        let m = self.rows.len();

        // Column layout: structural | slack/surplus | artificial | rhs.
        let n_slack = self
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let n_art = self
            .rows
            .iter()
            .filter(|r| {
                let flip = r.rhs < 0.0;
                match r.relation {
                    Relation::Eq => true,
                    Relation::Le => flip,
                    Relation::Ge => !flip,
                }
            })
            .count();
        let width = n + n_slack + n_art;
        let rhs_col = width;
        let mut t = vec![vec![0.0; width + 1]; m];
        let mut basis = vec![0usize; m];
        let mut is_art = vec![false; width];

        let mut next_slack = n;
        let mut next_art = n + n_slack;
        for (i, row) in self.rows.iter().enumerate() {
            let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i][j] = sign * row.coeffs[j];
            }
            t[i][rhs_col] = sign * row.rhs;
            let relation = match (row.relation, sign < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            match relation {
                Relation::Le => {
                    t[i][next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    t[i][next_slack] = -1.0;
                    next_slack += 1;
                    t[i][next_art] = 1.0;
                    is_art[next_art] = true;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    t[i][next_art] = 1.0;
                    is_art[next_art] = true;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }

        let mut tab = Tableau {
            t,
            basis,
            width,
            allowed: vec![true; width],
        };

        if n_art > 0 {
            let phase1: Vec<f64> = (0..width)
                .map(|j| if is_art[j] { -1.0 } else { 0.0 })
                .collect();
            let value = tab.optimize(&phase1)?;
            if value < -1e-9 * (1.0 + self.rhs_scale()) {
                return Err(Error::Solver(format!(
                    "linear program infeasible (phase one {value:e})"
                )));
            }
            tab.evict_artificials(&is_art);
            for (j, a) in is_art.iter().enumerate() {
                if *a {
                    tab.allowed[j] = false;
                }
            }
        }

        let mut phase2 = vec![0.0; width];
        phase2[..n].copy_from_slice(&self.objective);
        tab.optimize(&phase2)?;

        let mut x = vec![0.0; n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.t[i][rhs_col].max(0.0);
            }
        }
        let objective = x.iter().zip(&self.objective).map(|(a, c)| a * c).sum();
        Ok(LpSolution { x, objective })
    }

    fn rhs_scale(&self) -> f64 {
        self.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max)
    }
}

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    allowed: Vec<bool>,
}

impl Tableau {
    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let mut r = c.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for (rj, tij) in r.iter_mut().zip(&self.t[i][..self.width]) {
                    *rj -= cb * tij;
                }
            }
        }
        r
    }

    /// Maximizes `c^T x` from the current basic feasible solution.
    fn optimize(&mut self, c: &[f64]) -> Result<f64> {
        let rhs = self.width;
        let mut degenerate = 0usize;
        let max_iter = 50 * (self.width + self.t.len()) + 1000;
        for _ in 0..max_iter {
            let r = self.reduced_costs(c);
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = EPS;
            for j in 0..self.width {
                if !self.allowed[j] || r[j] <= EPS {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if r[j] > best {
                    best = r[j];
                    enter = Some(j);
                }
            }
            let Some(q) = enter else {
                return Ok(self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| c[b] * self.t[i][rhs])
                    .sum());
            };

            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.t.len() {
                let a = self.t[i][q];
                if a > EPS {
                    let ratio = self.t[i][rhs].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-14
                                || (ratio <= best_ratio + 1e-14 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(p) = leave else {
                return Err(Error::Solver("linear program unbounded".into()));
            };
            if best_ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(p, q);
        }
        Err(Error::Solver("simplex iteration limit reached".into()))
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.t[p][q];
        for v in self.t[p].iter_mut() {
            *v /= piv;
        }
        let prow = self.t[p].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        self.basis[p] = q;
    }

    /// Pivots zero-valued artificial variables out of the basis where a
    /// structural or slack column can replace them.
    fn evict_artificials(&mut self, is_art: &[bool]) {
        for i in 0..self.t.len() {
            if !is_art[self.basis[i]] {
                continue;
            }
            if let Some(q) = (0..self.width).find(|&j| !is_art[j] && self.t[i][j].abs() > 1e-9) {
                self.pivot(i, q);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constraint(vec![1.0, 0.0], Relation::Le, 4.0)
            .constraint(vec![0.0, 2.0], Relation::Le, 12.0)
            .constraint(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y, x + y = 1, x >= 0.3 -> 1
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0]);
        lp.constraint(vec![1.0, 1.0], Relation::Eq, 1.0).constraint(
            vec![1.0, 0.0],
            Relation::Ge,
            0.3,
        );
        let s = lp.solve().unwrap();
        assert!((s.objective + 1.0).abs() < 1e-12, "{}", s.objective);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constraint(vec![1.0], Relation::Le, 1.0)
            .constraint(vec![1.0], Relation::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(Error::Solver(_))));

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constraint(vec![0.0, 1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(Error::Solver(_))));
    }

    #[test]
    fn redundant_equalities() {
        // Transportation problem whose row and column sums are linearly dependent.
        // supplies (0.5, 0.5), demands (0.5, 0.5), cost [[0, 1], [1, 0]] -> 0
        let mut lp = LinearProgram::minimize(vec![0.0, 1.0, 1.0, 0.0]);
        lp.constraint(vec![1.0, 1.0, 0.0, 0.0], Relation::Eq, 0.5)
            .constraint(vec![0.0, 0.0, 1.0, 1.0], Relation::Eq, 0.5)
            .constraint(vec![1.0, 0.0, 1.0, 0.0], Relation::Eq, 0.5)
            .constraint(vec![0.0, 1.0, 0.0, 1.0], Relation::Eq, 0.5);
        let s = lp.solve().unwrap();
        assert!(s.objective.abs() < 1e-12);
    }
}
