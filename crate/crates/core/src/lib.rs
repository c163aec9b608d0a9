//! Estimation of mixed-effect time-varying stochastic blockmodels.
//!
//! Subjects each contribute one undirected network on a shared node set with
//! known community labels, together with a continuous time stamp in `[0, 1]`.
//! Block connectivity on the logit scale is modelled as a step function of
//! time plus a subject-level Gaussian random effect. Estimation runs in three
//! stages:
//!
//! 1. unconstrained marginal-likelihood fit by block coordinate descent
//!    ([`optimizer`]), with the random effect integrated out by adaptive
//!    Gauss-Hermite quadrature ([`quadrature`], [`likelihood`]);
//! 2. least-squares projection of each block's step sequence onto a shape
//!    class ([`shape`]);
//! 3. hard-threshold fusion of adjacent steps ([`fusion`]) with the number of
//!    groups chosen by BIC ([`tuning`]).
//!
//! [`pipeline`] chains the stages, [`simulator`] generates benchmark data and
//! [`io`] defines the on-disk formats used by the `tvsbm` binary.

pub mod data;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod likelihood;
pub mod numeric;
pub mod optimizer;
pub mod pipeline;
pub mod quadrature;
pub mod shape;
pub mod simulator;
pub mod tuning;

pub use data::{
    BlockIndex, CommunityAssignment, PartitionMode, SigmaVector, StatsTable, StepFunction,
    SubjectNetwork, ThetaMatrix, TimePartition,
};
pub use error::{Error, Result};
pub use pipeline::{fit, FitConfig, FitResult};
pub use quadrature::QuadratureRule;
pub use shape::ShapeConstraint;
