//! A two-hypothesis example on `Z = [0, 2]` with data `Unif[0, 1]`:
//! `f_0 = 1` everywhere and `f_1 = alpha 1{z >= 1}`. Ordinary ERM always
//! picks `f_1` (zero empirical risk), while its worst-case risk is large;
//! local minimax ERM picks `f_0` unless every sample point sits far from 1.
//!
//! Closed forms hold only inside the parameter regimes recorded by
//! [`Regime`]; outside them the values are still returned, flagged.

use serde::{Deserialize, Serialize};

use crate::ball::AmbiguityBall;
use crate::dual::{local_worst_case_risk, DualSolution, Geometry};
use crate::erm::{minimax_erm_on, HypothesisClass};
use crate::error::{Error, Result};
use crate::hypothesis::{ConstantLoss, Hypothesis, StepLoss};
use crate::rng;
use crate::space::{sample_uniform_interval_with, EmpiricalDistribution, InstanceSpace, Point};

/// Default number of atoms in the grid standing in for `Unif[0, 1]`.
pub const POPULATION_GRID: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IllustrativeInstance {
    pub alpha: f64,
    pub p: f64,
    pub n: usize,
    pub rho: f64,
    pub delta: f64,
}

/// Where the closed forms apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    /// `alpha <= 1`.
    pub alpha_not_above_one: bool,
    /// `rho < (p+1)^(-1/p) alpha^(-(p+1)/p)`: `f_1`'s population worst case
    /// stays below 1.
    pub below_lower_threshold: bool,
    /// `rho > alpha^(-1/p)`.
    pub above_upper_threshold: bool,
    /// The transported mass exceeds `[0, 1]` (`beta < 0`).
    pub beta_negative: bool,
    /// More than the top sample atom would have to move
    /// (`rho > (1 - max Z_i) n^(-1/p)`).
    pub beyond_single_atom: bool,
}

impl Regime {
    pub fn in_regime(&self) -> bool {
        *self == Regime::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flagged {
    pub value: f64,
    pub regime: Regime,
}

impl IllustrativeInstance {
    pub fn new(alpha: f64, p: f64, n: usize, rho: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid("order p must be >= 1"));
        }
        if n == 0 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::invalid("radius must be >= 0"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(IllustrativeInstance {
            alpha,
            p,
            n,
            rho,
            delta,
        })
    }

    /// `(p+1)^(-1/p) alpha^(-(p+1)/p)`.
    pub fn lower_threshold(&self) -> f64 {
        (self.p + 1.0).powf(-1.0 / self.p) * self.alpha.powf(-(self.p + 1.0) / self.p)
    }

    /// `alpha^(-1/p)`.
    pub fn upper_threshold(&self) -> f64 {
        self.alpha.powf(-1.0 / self.p)
    }

    /// `(1 - delta^(1/n)) alpha^(-1/p)`.
    pub fn confidence_threshold(&self) -> f64 {
        (1.0 - self.delta.powf(1.0 / self.n as f64)) * self.upper_threshold()
    }

    pub fn regime(&self) -> Regime {
        Regime {
            alpha_not_above_one: self.alpha <= 1.0,
            below_lower_threshold: self.rho < self.lower_threshold(),
            above_upper_threshold: self.rho > self.upper_threshold(),
            beta_negative: self.beta() < 0.0,
            beyond_single_atom: false,
        }
    }

    /// Left end of the transported interval `[beta, 1]` under `Unif[0, 1]`.
    fn beta(&self) -> f64 {
        1.0 - (self.p + 1.0).powf(1.0 / (self.p + 1.0)) * self.rho.powf(self.p / (self.p + 1.0))
    }
}

/// The instance space `[0, 2]` (diameter 2).
pub fn space() -> InstanceSpace {
    InstanceSpace::interval(0.0, 2.0).expect("valid interval")
}

/// `{f_0, f_1}` in that order.
pub fn class(alpha: f64) -> HypothesisClass {
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
    .expect("two members")
}

/// The point 1, where `f_1` first reaches `alpha` and the cheapest target of
/// any worst-case transport.
pub fn step_point() -> Point {
    Point::scalar(1.0)
}

/// `R_{rho,p}(Unif[0,1], f_1) = alpha (p+1)^(1/(p+1)) rho^(p/(p+1))`.
pub fn analytic_population_worst_case(inst: &IllustrativeInstance) -> Flagged {
    Flagged {
        value: inst.alpha * (1.0 - inst.beta()),
        regime: inst.regime(),
    }
}

/// `R_{rho,p}(P_n, f_1) = alpha rho^p / (1 - max Z_i)^p`, exact while only
/// the top atom moves.
pub fn analytic_empirical_worst_case(inst: &IllustrativeInstance, sample: &EmpiricalDistribution) -> Flagged {
    let top = sample.max_feature(0);
    let gap = 1.0 - top;
    let mut regime = inst.regime();
    regime.beyond_single_atom = inst.rho > gap * (sample.len() as f64).powf(-1.0 / inst.p);
    Flagged {
        value: inst.alpha * inst.rho.powf(inst.p) / gap.powf(inst.p),
        regime,
    }
}

/// `(1 - rho alpha^(1/p))^n`, the chance that minimax ERM returns `f_1`.
/// The base is floored at 0 above the upper threshold.
pub fn selection_probability(inst: &IllustrativeInstance) -> Flagged {
    let base = (1.0 - inst.rho * inst.alpha.powf(1.0 / inst.p)).max(0.0);
    Flagged {
        value: base.powi(inst.n as i32),
        regime: inst.regime(),
    }
}

/// `epsilon*_delta(rho)`: the `(1 - delta)`-quantile of the population
/// excess worst-case risk of minimax ERM. Equal to
/// `alpha (p+1)^(1/(p+1)) rho^(p/(p+1)) - 1` between the lower threshold and
/// `(1 - delta^(1/n)) alpha^(-1/p)`, and 0 elsewhere.
pub fn excess_risk_profile(inst: &IllustrativeInstance) -> f64 {
    if inst.rho >= inst.lower_threshold() && inst.rho <= inst.confidence_threshold() {
        analytic_population_worst_case(inst).value - 1.0
    } else {
        0.0
    }
}

/// `alpha = (1 - delta^(1/n))^p rho^(-p)`, the step height that places `rho`
/// at the upper end of the nonzero excess-risk window. Flagged when the
/// result is not above 1.
pub fn worst_alpha(rho: f64, delta: f64, n: usize, p: f64) -> Flagged {
    let alpha = (1.0 - delta.powf(1.0 / n as f64)).powf(p) * rho.powf(-p);
    Flagged {
        value: alpha,
        regime: Regime {
            alpha_not_above_one: alpha <= 1.0,
            ..Regime::default()
        },
    }
}

/// Evenly spaced midpoints `(k + 1/2)/N` with weight `1/N`.
pub fn population_grid(atoms: usize) -> Result<EmpiricalDistribution> {
    if atoms == 0 {
        return Err(Error::invalid("grid needs at least one atom"));
    }
    let n = atoms as f64;
    EmpiricalDistribution::uniform((0..atoms).map(|k| Point::scalar((k as f64 + 0.5) / n)).collect())
}

/// `R_{rho,p}(grid, f_1)` via the dual, candidates = grid plus the point 1.
pub fn population_oracle(inst: &IllustrativeInstance, atoms: usize) -> Result<DualSolution> {
    let grid = population_grid(atoms)?;
    let ball = AmbiguityBall::new(inst.p, inst.rho)?;
    local_worst_case_risk(class(inst.alpha).get(1), &grid, &ball, &[step_point()], &space())
}

/// Per-trial outcome of minimax ERM on a fresh sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    pub selected_f1: bool,
    /// `R_{rho,p}(P, f_hat) - min_f R_{rho,p}(P, f)` from the closed forms.
    pub excess: f64,
}

/// Runs minimax ERM on `trials` samples of size `n` from `Unif[0, 1]`; trial
/// `t` draws from seed `seed + t`.
pub fn simulate(inst: &IllustrativeInstance, trials: usize, seed: u64) -> Result<Vec<TrialOutcome>> {
    let class = class(inst.alpha);
    let ball = AmbiguityBall::new(inst.p, inst.rho)?;
    let space = space();
    let pop_f1 = analytic_population_worst_case(inst).value;
    let best = pop_f1.min(1.0);
    let cands = [step_point()];
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut r = rng::seeded(rng::trial_seed(seed, t as u64));
        let sample = sample_uniform_interval_with(inst.n, &mut r)?;
        let geo = Geometry::new(&sample, &cands, inst.p, &space)?;
        let res = minimax_erm_on(&class, &geo, &ball, &space)?;
        let selected_f1 = res.selected_index == 1;
        let risk = if selected_f1 { pop_f1 } else { 1.0 };
        out.push(TrialOutcome {
            selected_f1,
            excess: risk - best,
        });
    }
    Ok(out)
}

/// Fraction of trials in which minimax ERM returned `f_1`.
pub fn selection_frequency(outcomes: &[TrialOutcome]) -> f64 {
    outcomes.iter().filter(|o| o.selected_f1).count() as f64 / outcomes.len().max(1) as f64
}

/// Empirical `q`-quantile (lower interpolation-free order statistic).
pub fn excess_quantile(outcomes: &[TrialOutcome], q: f64) -> f64 {
    let mut v: Vec<f64> = outcomes.iter().map(|o| o.excess).collect();
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub analytic_risk: f64,
    pub oracle_risk: f64,
    pub selection_probability: f64,
    pub simulated_frequency: f64,
    pub in_regime: bool,
}

/// One row per radius: closed-form and grid-oracle population risk of
/// `f_1`, and the predicted and simulated selection rates.
pub fn sweep(
    base: &IllustrativeInstance,
    rhos: &[f64],
    trials: usize,
    grid_atoms: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    rhos.iter()
        .map(|&rho| {
            let inst = IllustrativeInstance { rho, ..*base };
            let analytic = analytic_population_worst_case(&inst);
            let oracle = population_oracle(&inst, grid_atoms)?;
            let sel = selection_probability(&inst);
            let freq = if trials > 0 {
                selection_frequency(&simulate(&inst, trials, seed)?)
            } else {
                f64::NAN
            };
            Ok(SweepRow {
                rho,
                analytic_risk: analytic.value,
                oracle_risk: oracle.value,
                selection_probability: sel.value,
                simulated_frequency: freq,
                in_regime: analytic.regime.in_regime() && sel.regime.in_regime(),
            })
        })
        .collect()
}

/// CSV rendering of [`sweep`] rows.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("rho,analytic_risk,oracle_risk,selection_probability,simulated_frequency,in_regime\n");
    for r in rows {
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{}\n",
            r.rho, r.analytic_risk, r.oracle_risk, r.selection_probability, r.simulated_frequency, r.in_regime
        ));
    }
    out
}
