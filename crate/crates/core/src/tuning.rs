//! BIC selection of the number of fused groups per block.
//!
//! The block likelihood used by the criterion integrates the random effect
//! with the plain (non-adaptive) Gauss-Hermite rule centred at zero and
//! scaled by `√2 σ`, block by block, holding `σ` at its step-one estimate.

use rayon::prelude::*;

use crate::data::{SigmaVector, StatsTable};
use crate::error::{Error, Result};
use crate::fusion::{degrees_of_freedom, fuse, FusedVector};
use crate::numeric::{compensated_sum, log_sum_exp, softplus};
use crate::quadrature::QuadratureRule;

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// Block-restricted quadrature log-likelihood of a step sequence for column `p`.
pub fn block_loglik(
    theta_kl: &[f64],
    sigma: &SigmaVector,
    stats: &StatsTable,
    tau: &[usize],
    p: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    let total = stats.totals[p] as f64;
    let mut terms = Vec::with_capacity(stats.n_subjects());
    let mut log_terms = Vec::with_capacity(rule.order());
    for (i, &s) in tau.iter().enumerate() {
        let n = stats.subject(i)[p] as f64;
        let scale = std::f64::consts::SQRT_2 * sigma.get(s);
        log_terms.clear();
        for (&a, &lu) in rule.nodes().iter().zip(rule.log_weights()) {
            let x = theta_kl[s] + scale * a;
            log_terms.push(lu - LN_SQRT_PI + n * x - total * softplus(x));
        }
        let v = log_sum_exp(&log_terms);
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "block likelihood is {v} for subject {i}"
            )));
        }
        terms.push(v);
    }
    Ok(compensated_sum(terms))
}

/// `-2 L + log(N) df`.
pub fn bic(
    theta_kl: &[f64],
    sigma: &SigmaVector,
    stats: &StatsTable,
    tau: &[usize],
    p: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    let ll = block_loglik(theta_kl, sigma, stats, tau, p, rule)?;
    let n = stats.n_subjects() as f64;
    Ok(-2.0 * ll + n.ln() * degrees_of_freedom(theta_kl) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    /// Selected fusion parameter.
    pub b: usize,
    /// BIC of `fuse(θ̌, b)` for `b = 1..=S`.
    pub bic_trace: Vec<f64>,
    pub fused: FusedVector,
}

/// Evaluates the BIC of every fusion level and keeps the smallest (earliest on ties).
pub fn tune_fusion(
    theta_check: &[f64],
    sigma: &SigmaVector,
    stats: &StatsTable,
    tau: &[usize],
    p: usize,
    rule: &QuadratureRule,
) -> Result<TuningResult> {
    let s = theta_check.len();
    let candidates: Vec<(FusedVector, f64)> = (1..=s)
        .into_par_iter()
        .map(|b| {
            let f = fuse(theta_check, b)?;
            let score = bic(&f.values, sigma, stats, tau, p, rule)?;
            Ok((f, score))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (j, (_, score)) in candidates.iter().enumerate() {
        if *score < candidates[best].1 {
            best = j;
        }
    }
    let bic_trace = candidates.iter().map(|(_, v)| *v).collect();
    let fused = candidates.into_iter().nth(best).expect("non-empty grid").0;
    Ok(TuningResult {
        b: best + 1,
        bic_trace,
        fused,
    })
}
