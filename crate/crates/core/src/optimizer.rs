//! Unconstrained marginal-likelihood fit by block coordinate descent.
//!
//! Each outer iteration first updates every `σ_s` and then every row
//! `Θ_{s,·}`, one coordinate at a time. Subjects only touch the parameters of
//! their own interval, so the per-interval updates are independent and run in
//! parallel.
//!
//! A coordinate update minimizes the frozen-node approximation (adapted
//! abscissae fixed at the start of the outer iteration) with a safeguarded
//! Newton search, then backtracks toward the old value until the fully
//! adaptive objective does not increase. The recorded objective trace is
//! therefore non-increasing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{SigmaVector, StatsTable, ThetaMatrix, SIGMA_MAX, SIGMA_MIN};
use crate::error::{Error, Result};
use crate::likelihood::{
    frozen_loglik, subject_loglik_adapted, BlockLikelihoodContext, Coordinate, FrozenRule,
};
use crate::numeric::{compensated_sum, logit};
use crate::quadrature::QuadratureRule;

/// Box bound on every block level (logit scale).
pub const THETA_BOUND: f64 = 30.0;
/// Starting value of every `σ_s`.
pub const INITIAL_SIGMA: f64 = 0.1;
const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_outer_iters: usize,
    /// Stop once `|L_q - L_{q-1}| / (|L_{q-1}| + 1)` falls below this.
    pub rel_tol: f64,
    /// Step tolerance of the one-dimensional searches.
    pub inner_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_outer_iters: 200,
            rel_tol: 1e-6,
            inner_tol: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 || !(self.rel_tol > 0.0) || !(self.inner_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "iteration cap must be >= 1 and tolerances positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnconstrainedFit {
    pub theta: ThetaMatrix,
    pub sigma: SigmaVector,
    /// Objective after initialization and after each outer iteration.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Subjects whose mode search failed at the final iterate.
    pub quadrature_fallbacks: Vec<bool>,
    /// Coordinate updates abandoned after exhausting step halvings.
    pub line_search_failures: usize,
}

/// Subjects grouped by interval, with the data they share.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    stats: &'a StatsTable,
    members: Vec<Vec<usize>>,
    rule: &'a QuadratureRule,
}

impl<'a> Problem<'a> {
    pub fn new(
        stats: &'a StatsTable,
        tau: &[usize],
        intervals: usize,
        rule: &'a QuadratureRule,
    ) -> Result<Self> {
        if tau.len() != stats.n_subjects() {
            return Err(Error::InvalidArgument(
                "interval map length differs from subject count".into(),
            ));
        }
        let mut members = vec![Vec::new(); intervals];
        for (i, &s) in tau.iter().enumerate() {
            members
                .get_mut(s)
                .ok_or_else(|| Error::InvalidArgument(format!("interval index {s} out of range")))?
                .push(i);
        }
        if let Some(s) = members.iter().position(Vec::is_empty) {
            return Err(Error::EmptyInterval { interval: s + 1 });
        }
        Ok(Problem {
            stats,
            members,
            rule,
        })
    }

    pub fn intervals(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self, s: usize) -> &[usize] {
        &self.members[s]
    }

    fn ctx<'b>(&'b self, i: usize, row: &'b [f64], sigma: f64) -> BlockLikelihoodContext<'b> {
        BlockLikelihoodContext {
            counts: self.stats.subject(i),
            totals: &self.stats.totals,
            theta_row: row,
            sigma,
            rule: self.rule,
        }
    }

    /// Adaptive objective `-Σ log f̃_i` restricted to interval `s`.
    pub fn interval_objective(&self, s: usize, row: &[f64], sigma: f64) -> Result<f64> {
        let terms = self.members[s]
            .iter()
            .map(|&i| subject_loglik_adapted(&self.ctx(i, row, sigma)).map(|(v, _)| v))
            .collect::<Result<Vec<_>>>()?;
        Ok(-compensated_sum(terms))
    }

    /// Adapted rules for interval `s` at the given parameters, plus fallback flags.
    pub fn freeze(&self, s: usize, row: &[f64], sigma: f64) -> (Vec<FrozenRule>, Vec<bool>) {
        self.members[s]
            .iter()
            .map(|&i| {
                let ctx = self.ctx(i, row, sigma);
                let a = crate::quadrature::adapt(self.rule, &ctx.integrand(), sigma);
                (FrozenRule::new(&a.rule), a.fallback)
            })
            .unzip()
    }

    /// Frozen objective of interval `s` with first and second derivatives in `coord`.
    pub fn frozen_objective(
        &self,
        s: usize,
        frozen: &[FrozenRule],
        row: &[f64],
        sigma: f64,
        coord: Coordinate,
    ) -> (f64, f64, f64) {
        let mut parts = (Vec::new(), Vec::new(), Vec::new());
        for (&i, fr) in self.members[s].iter().zip(frozen) {
            let (v, g, h) = frozen_loglik(
                fr,
                self.stats.subject(i),
                &self.stats.totals,
                row,
                sigma,
                coord,
            );
            parts.0.push(-v);
            parts.1.push(-g);
            parts.2.push(-h);
        }
        (
            compensated_sum(parts.0),
            compensated_sum(parts.1),
            compensated_sum(parts.2),
        )
    }
}

/// Empirical logit with continuity correction per interval and block; `σ = 0.1`.
pub fn initialize(
    stats: &StatsTable,
    tau: &[usize],
    intervals: usize,
) -> Result<(ThetaMatrix, SigmaVector)> {
    let blocks = stats.totals.len();
    let mut edges = vec![vec![0u64; blocks]; intervals];
    let mut occupancy = vec![0u64; intervals];
    for (i, &s) in tau.iter().enumerate() {
        if s >= intervals {
            return Err(Error::InvalidArgument(format!(
                "interval index {s} out of range"
            )));
        }
        occupancy[s] += 1;
        for (acc, &n) in edges[s].iter_mut().zip(stats.subject(i)) {
            *acc += n;
        }
    }
    if let Some(s) = occupancy.iter().position(|&c| c == 0) {
        return Err(Error::EmptyInterval { interval: s + 1 });
    }
    let mut theta = ThetaMatrix::filled(intervals, blocks, 0.0);
    for s in 0..intervals {
        for p in 0..blocks {
            let dyads = (occupancy[s] * stats.totals[p]) as f64;
            let rate = (edges[s][p] as f64 + 0.5) / (dyads + 1.0);
            theta.set(s, p, logit(rate).clamp(-THETA_BOUND, THETA_BOUND));
        }
    }
    Ok((theta, SigmaVector::constant(intervals, INITIAL_SIGMA)?))
}

/// Safeguarded Newton search for a stationary point of a one-dimensional
/// function on `[lo, hi]`, keeping a derivative-sign bracket and bisecting
/// whenever Newton leaves it or the curvature is not positive.
pub fn minimize_1d(
    mut eval: impl FnMut(f64) -> (f64, f64, f64),
    x0: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let mut x = x0.clamp(lo, hi);
    for _ in 0..200 {
        let (_, g, h) = eval(x);
        if g == 0.0 || !g.is_finite() {
            return x;
        }
        if g > 0.0 {
            b = x;
        } else {
            a = x;
        }
        if b - a <= tol {
            return if g > 0.0 { a } else { b };
        }
        let newton = x - g / h;
        let next = if h > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= tol {
            return next;
        }
        x = next;
    }
    x
}

/// Outcome of one coordinate update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Update {
    pub value: f64,
    pub objective: f64,
    pub failed: bool,
}

/// Backtracks from `target` toward `x0` until `objective` does not increase.
fn backtrack(
    mut objective: impl FnMut(f64) -> Result<f64>,
    x0: f64,
    f0: f64,
    target: f64,
) -> Result<Update> {
    let step = target - x0;
    if step == 0.0 {
        return Ok(Update {
            value: x0,
            objective: f0,
            failed: false,
        });
    }
    let mut t = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let x = x0 + t * step;
        let f = objective(x)?;
        if f <= f0 {
            return Ok(Update {
                value: x,
                objective: f,
                failed: false,
            });
        }
        t *= 0.5;
    }
    Ok(Update {
        value: x0,
        objective: f0,
        failed: true,
    })
}

/// New `σ_s` from a log-scale search on interval `s`.
pub fn update_sigma_block(
    problem: &Problem<'_>,
    s: usize,
    row: &[f64],
    sigma: f64,
    frozen: &[FrozenRule],
    objective: f64,
    config: &OptimizerConfig,
) -> Result<Update> {
    let target = minimize_1d(
        |rho| problem.frozen_objective(s, frozen, row, rho.exp(), Coordinate::LogSigma),
        sigma.ln(),
        SIGMA_MIN.ln(),
        SIGMA_MAX.ln(),
        config.inner_tol,
    );
    let up = backtrack(
        |rho| problem.interval_objective(s, row, rho.exp().clamp(SIGMA_MIN, SIGMA_MAX)),
        sigma.ln(),
        objective,
        target,
    )?;
    Ok(Update {
        value: up.value.exp().clamp(SIGMA_MIN, SIGMA_MAX),
        ..up
    })
}

/// New `Θ_{s,·}`, updating block levels one at a time in column order.
/// Returns the row, its objective and the number of abandoned updates.
pub fn update_theta_row(
    problem: &Problem<'_>,
    s: usize,
    row: &[f64],
    sigma: f64,
    frozen: &[FrozenRule],
    objective: f64,
    config: &OptimizerConfig,
) -> Result<(Vec<f64>, f64, usize)> {
    let mut row = row.to_vec();
    let mut objective = objective;
    let mut failures = 0;
    for p in 0..row.len() {
        let x0 = row[p];
        let target = {
            let mut trial = row.clone();
            minimize_1d(
                |x| {
                    trial[p] = x;
                    problem.frozen_objective(s, frozen, &trial, sigma, Coordinate::Theta(p))
                },
                x0,
                -THETA_BOUND,
                THETA_BOUND,
                config.inner_tol,
            )
        };
        let up = {
            let mut trial = row.clone();
            backtrack(
                |x| {
                    trial[p] = x;
                    problem.interval_objective(s, &trial, sigma)
                },
                x0,
                objective,
                target,
            )?
        };
        row[p] = up.value;
        objective = up.objective;
        failures += up.failed as usize;
    }
    Ok((row, objective, failures))
}

/// Runs block coordinate descent from the empirical-logit start.
pub fn fit_unconstrained(
    stats: &StatsTable,
    tau: &[usize],
    intervals: usize,
    rule: &QuadratureRule,
    config: &OptimizerConfig,
) -> Result<UnconstrainedFit> {
    config.validate()?;
    let problem = Problem::new(stats, tau, intervals, rule)?;
    let (mut theta, mut sigma) = initialize(stats, tau, intervals)?;
    let mut objectives: Vec<f64> = (0..intervals)
        .into_par_iter()
        .map(|s| problem.interval_objective(s, theta.row(s), sigma.get(s)))
        .collect::<Result<_>>()?;
    let mut trace = vec![compensated_sum(objectives.iter().copied())];
    let mut converged = false;
    let mut iterations = 0;
    let mut line_search_failures = 0;

    while iterations < config.max_outer_iters {
        iterations += 1;
        let frozen: Vec<Vec<FrozenRule>> = (0..intervals)
            .into_par_iter()
            .map(|s| problem.freeze(s, theta.row(s), sigma.get(s)).0)
            .collect();

        // σ half-step reads only the previous iterate
        let sigma_updates: Vec<Update> = (0..intervals)
            .into_par_iter()
            .map(|s| {
                update_sigma_block(
                    &problem,
                    s,
                    theta.row(s),
                    sigma.get(s),
                    &frozen[s],
                    objectives[s],
                    config,
                )
            })
            .collect::<Result<_>>()?;
        for (s, up) in sigma_updates.into_iter().enumerate() {
            sigma.set(s, up.value);
            objectives[s] = up.objective;
            line_search_failures += up.failed as usize;
        }

        let row_updates: Vec<(Vec<f64>, f64, usize)> = (0..intervals)
            .into_par_iter()
            .map(|s| {
                update_theta_row(
                    &problem,
                    s,
                    theta.row(s),
                    sigma.get(s),
                    &frozen[s],
                    objectives[s],
                    config,
                )
            })
            .collect::<Result<_>>()?;
        for (s, (row, obj, failed)) in row_updates.into_iter().enumerate() {
            theta.row_mut(s).copy_from_slice(&row);
            objectives[s] = obj;
            line_search_failures += failed;
        }

        let current = compensated_sum(objectives.iter().copied());
        let previous = *trace.last().expect("trace starts non-empty");
        trace.push(current);
        if (current - previous).abs() / (previous.abs() + 1.0) < config.rel_tol {
            converged = true;
            break;
        }
    }

    let mut quadrature_fallbacks = vec![false; stats.n_subjects()];
    for s in 0..intervals {
        let (_, flags) = problem.freeze(s, theta.row(s), sigma.get(s));
        for (&i, flag) in problem.members(s).iter().zip(flags) {
            quadrature_fallbacks[i] = flag;
        }
    }
    if quadrature_fallbacks.iter().any(|&f| f) {
        log::warn!(
            "{} subject(s) fell back to non-adaptive quadrature",
            quadrature_fallbacks.iter().filter(|&&f| f).count()
        );
    }
    Ok(UnconstrainedFit {
        theta,
        sigma,
        trace,
        converged,
        iterations,
        quadrature_fallbacks,
        line_search_failures,
    })
}
