//! Marginal likelihood of one subject's block counts with the random effect
//! integrated out.
//!
//! For subject `i` in interval `s` the log-integrand over the random effect
//! `w` is
//!
//! ```text
//! h(w) = Σ_p [ n_ip (θ_sp + w) - N_p softplus(θ_sp + w) ] + log φ(w; σ_s²)
//! ```
//!
//! which is strictly concave, so adaptive Gauss-Hermite quadrature applies.
//! The optimizer works with a *frozen* version of the approximation in which
//! the adapted abscissae are held fixed while parameters move; derivatives
//! here are exact derivatives of that frozen approximation.

use rayon::prelude::*;

use crate::data::{SigmaVector, StatsTable, ThetaMatrix};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, log_sum_exp, logistic, softplus};
use crate::quadrature::{adapt, integrate, Adaptation, AdaptedRule, LogIntegrand, QuadratureRule};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Everything needed to evaluate one subject's marginal likelihood.
#[derive(Debug, Clone, Copy)]
pub struct BlockLikelihoodContext<'a> {
    pub counts: &'a [u64],
    pub totals: &'a [u64],
    /// Block levels for the subject's interval.
    pub theta_row: &'a [f64],
    pub sigma: f64,
    pub rule: &'a QuadratureRule,
}

impl<'a> BlockLikelihoodContext<'a> {
    pub fn integrand(&self) -> SubjectIntegrand<'a> {
        SubjectIntegrand {
            counts: self.counts,
            totals: self.totals,
            theta_row: self.theta_row,
            sigma: self.sigma,
        }
    }
}

/// The log-integrand `h(w)` of one subject.
#[derive(Debug, Clone, Copy)]
pub struct SubjectIntegrand<'a> {
    pub counts: &'a [u64],
    pub totals: &'a [u64],
    pub theta_row: &'a [f64],
    pub sigma: f64,
}

impl SubjectIntegrand<'_> {
    fn data_term(&self, w: f64) -> f64 {
        self.counts
            .iter()
            .zip(self.totals)
            .zip(self.theta_row)
            .map(|((&n, &tot), &th)| {
                let x = th + w;
                n as f64 * x - tot as f64 * softplus(x)
            })
            .sum()
    }

    fn log_prior(&self, w: f64) -> f64 {
        let z = w / self.sigma;
        -0.5 * z * z - self.sigma.ln() - HALF_LN_2PI
    }
}

impl LogIntegrand for SubjectIntegrand<'_> {
    fn value(&self, w: f64) -> f64 {
        self.data_term(w) + self.log_prior(w)
    }

    fn derivatives(&self, w: f64) -> (f64, f64, f64) {
        let mut g = 0.0;
        let mut h = 0.0;
        for ((&n, &tot), &th) in self.counts.iter().zip(self.totals).zip(self.theta_row) {
            let x = th + w;
            let p = logistic(x);
            g += n as f64 - tot as f64 * p;
            h -= tot as f64 * p * logistic(-x);
        }
        let inv_var = 1.0 / (self.sigma * self.sigma);
        (self.value(w), g - w * inv_var, h - inv_var)
    }
}

/// `log f̃_i`: adaptive quadrature estimate of the subject's marginal log-likelihood.
pub fn subject_loglik(ctx: &BlockLikelihoodContext<'_>) -> Result<f64> {
    subject_loglik_adapted(ctx).map(|(v, _)| v)
}

/// As [`subject_loglik`], also returning the adaptation used.
pub fn subject_loglik_adapted<'r>(
    ctx: &BlockLikelihoodContext<'r>,
) -> Result<(f64, Adaptation<'r>)> {
    let f = ctx.integrand();
    let adaptation = adapt(ctx.rule, &f, ctx.sigma);
    let v = integrate(&adaptation.rule, &f)?;
    Ok((v, adaptation))
}

/// `-Σ_i log f̃_i` over all subjects; `tau[i]` is subject `i`'s zero-based interval.
///
/// Subjects are evaluated in parallel and reduced in index order.
pub fn total_negloglik(
    theta: &ThetaMatrix,
    sigma: &SigmaVector,
    stats: &StatsTable,
    tau: &[usize],
    rule: &QuadratureRule,
) -> Result<f64> {
    if tau.len() != stats.n_subjects() {
        return Err(Error::InvalidArgument(
            "interval map length differs from subject count".into(),
        ));
    }
    let terms: Vec<f64> = (0..stats.n_subjects())
        .into_par_iter()
        .map(|i| {
            let s = tau[i];
            subject_loglik(&BlockLikelihoodContext {
                counts: stats.subject(i),
                totals: &stats.totals,
                theta_row: theta.row(s),
                sigma: sigma.get(s),
                rule,
            })
        })
        .collect::<Result<_>>()?;
    Ok(-compensated_sum(terms))
}

/// Adapted abscissae and log-weights held fixed while parameters move.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenRule {
    points: Vec<(f64, f64)>,
}

impl FrozenRule {
    pub fn new(rule: &AdaptedRule<'_>) -> Self {
        FrozenRule {
            points: rule.abscissae().collect(),
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// A parameter the frozen objective can be differentiated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    /// Level of one block column.
    Theta(usize),
    /// `log σ` of the subject's interval.
    LogSigma,
}

/// Frozen-node `log f̃_i` and its first two derivatives in `coord`.
pub fn frozen_loglik(
    frozen: &FrozenRule,
    counts: &[u64],
    totals: &[u64],
    theta_row: &[f64],
    sigma: f64,
    coord: Coordinate,
) -> (f64, f64, f64) {
    let b = frozen.points.len();
    let mut log_terms = Vec::with_capacity(b);
    let mut d1 = Vec::with_capacity(b);
    let mut d2 = Vec::with_capacity(b);
    let inv_var = 1.0 / (sigma * sigma);
    let ln_sigma = sigma.ln();
    for &(w, lw) in &frozen.points {
        let mut h = -0.5 * w * w * inv_var - ln_sigma - HALF_LN_2PI;
        for ((&n, &tot), &th) in counts.iter().zip(totals).zip(theta_row) {
            let x = th + w;
            h += n as f64 * x - tot as f64 * softplus(x);
        }
        log_terms.push(lw + h);
        match coord {
            Coordinate::Theta(p) => {
                let x = theta_row[p] + w;
                let prob = logistic(x);
                d1.push(counts[p] as f64 - totals[p] as f64 * prob);
                d2.push(-(totals[p] as f64) * prob * logistic(-x));
            }
            Coordinate::LogSigma => {
                let r = w * w * inv_var;
                d1.push(r - 1.0);
                d2.push(-2.0 * r);
            }
        }
    }
    let value = log_sum_exp(&log_terms);
    let mut g = 0.0;
    let mut second = 0.0;
    let mut sq = 0.0;
    for j in 0..b {
        let pi = (log_terms[j] - value).exp();
        g += pi * d1[j];
        second += pi * d2[j];
        sq += pi * d1[j] * d1[j];
    }
    (value, g, second + sq - g * g)
}

/// Derivative of `-Σ log f̃_i` (frozen nodes) with respect to block level `p`,
/// summed over the given subjects. All contexts must share one interval.
pub fn block_gradient_theta(
    contexts: &[(BlockLikelihoodContext<'_>, &FrozenRule)],
    p: usize,
) -> f64 {
    -compensated_sum(contexts.iter().map(|(c, fr)| {
        frozen_loglik(
            fr,
            c.counts,
            c.totals,
            c.theta_row,
            c.sigma,
            Coordinate::Theta(p),
        )
        .1
    }))
}

/// Derivative of `-Σ log f̃_i` (frozen nodes) with respect to `σ_s`.
pub fn block_gradient_sigma(contexts: &[(BlockLikelihoodContext<'_>, &FrozenRule)]) -> f64 {
    -compensated_sum(contexts.iter().map(|(c, fr)| {
        frozen_loglik(
            fr,
            c.counts,
            c.totals,
            c.theta_row,
            c.sigma,
            Coordinate::LogSigma,
        )
        .1 / c.sigma
    }))
}
