//! The three-stage estimator: unconstrained fit, shape projection, fusion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{PartitionMode, SigmaVector, StatsTable, ThetaMatrix, TimePartition};
use crate::error::{Error, Result};
use crate::fusion::fuse;
use crate::optimizer::{fit_unconstrained, OptimizerConfig, UnconstrainedFit};
use crate::quadrature::{hermite_rule, DEFAULT_ORDER};
use crate::shape::{project_shape, ShapeConstraint};
use crate::tuning::tune_fusion;

/// How the number of fused groups is chosen for each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionSelection {
    /// Minimize BIC over `b = 1..=S`.
    Bic,
    /// Use the same `b` for every block (clamped to `S`).
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub intervals: usize,
    pub partition: PartitionMode,
    pub quad_points: usize,
    /// Constraint applied to every block unless `block_shapes` is set.
    pub shape: ShapeConstraint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_shapes: Option<Vec<ShapeConstraint>>,
    pub fusion: FusionSelection,
    pub optimizer: OptimizerConfig,
}

impl FitConfig {
    pub fn new(intervals: usize) -> Self {
        FitConfig {
            intervals,
            partition: PartitionMode::EqualLength,
            quad_points: DEFAULT_ORDER,
            shape: ShapeConstraint::Unimodal,
            block_shapes: None,
            fusion: FusionSelection::Bic,
            optimizer: OptimizerConfig::default(),
        }
    }

    fn shape_for(&self, p: usize) -> ShapeConstraint {
        self.block_shapes
            .as_ref()
            .and_then(|v| v.get(p).copied())
            .unwrap_or(self.shape)
    }
}

/// Per-block outcome of the shape and fusion stages.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    /// Resolved shape class (never `Auto`).
    pub shape: ShapeConstraint,
    /// Zero-based peak or valley for the unimodal classes.
    pub turning_point: Option<usize>,
    pub b: usize,
    pub df: usize,
    /// Empty when `b` was fixed rather than selected.
    pub bic_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub partition: TimePartition,
    /// Zero-based interval of every subject.
    pub tau: Vec<usize>,
    pub interval_counts: Vec<usize>,
    pub unconstrained: UnconstrainedFit,
    pub theta_shape: ThetaMatrix,
    pub theta_fused: ThetaMatrix,
    pub blocks: Vec<BlockOutcome>,
}

impl FitResult {
    pub fn sigma(&self) -> &SigmaVector {
        &self.unconstrained.sigma
    }
}

/// Fits the model to per-subject block counts and normalized times.
pub fn fit(times: &[f64], stats: &StatsTable, config: &FitConfig) -> Result<FitResult> {
    if times.len() != stats.n_subjects() {
        return Err(Error::InvalidArgument(format!(
            "{} times for {} subjects",
            times.len(),
            stats.n_subjects()
        )));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let partition = TimePartition::build(&sorted, config.intervals, config.partition)?;
    let tau = partition.assign(times);
    let interval_counts = partition.occupancy(times);
    let rule = hermite_rule(config.quad_points)?;

    let unconstrained = fit_unconstrained(stats, &tau, config.intervals, &rule, &config.optimizer)?;
    if !unconstrained.converged {
        log::warn!(
            "step-one optimization stopped after {} iterations without meeting the tolerance",
            unconstrained.iterations
        );
    }

    let columns = unconstrained.theta.columns();
    let per_block: Vec<(Vec<f64>, Vec<f64>, BlockOutcome)> = columns
        .par_iter()
        .enumerate()
        .map(|(p, col)| {
            let projection = project_shape(col, config.shape_for(p));
            let (fused, b, bic_trace) = match config.fusion {
                FusionSelection::Bic => {
                    let t = tune_fusion(
                        &projection.values,
                        &unconstrained.sigma,
                        stats,
                        &tau,
                        p,
                        &rule,
                    )?;
                    (t.fused, t.b, t.bic_trace)
                }
                FusionSelection::Fixed(b) => {
                    let b = b.clamp(1, col.len());
                    (fuse(&projection.values, b)?, b, Vec::new())
                }
            };
            let outcome = BlockOutcome {
                shape: projection.constraint,
                turning_point: projection.turning_point,
                b,
                df: fused.df(),
                bic_trace,
            };
            Ok((projection.values, fused.values, outcome))
        })
        .collect::<Result<_>>()?;

    let mut shape_cols = Vec::with_capacity(per_block.len());
    let mut fused_cols = Vec::with_capacity(per_block.len());
    let mut blocks = Vec::with_capacity(per_block.len());
    for (s, f, o) in per_block {
        shape_cols.push(s);
        fused_cols.push(f);
        blocks.push(o);
    }
    Ok(FitResult {
        partition,
        tau,
        interval_counts,
        unconstrained,
        theta_shape: ThetaMatrix::from_columns(&shape_cols)?,
        theta_fused: ThetaMatrix::from_columns(&fused_cols)?,
        blocks,
    })
}
