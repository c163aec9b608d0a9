//! Multi-subject network generator and the relative L2 error criterion.
//!
//! Randomness comes from ChaCha8 streams derived from one seed: stream 0
//! draws the subject times, stream `i + 1` draws subject `i`'s random effect
//! and dyads. Output is therefore independent of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{BlockIndex, CommunityAssignment, StepFunction, SubjectNetwork};
use crate::error::{Error, Result};
use crate::numeric::{logistic, logit};

/// Identifier recorded alongside generated data.
pub const RNG_ALGORITHM: &str = "chacha8-seed-u64-stream-per-subject-v1";
/// Version tag of the built-in example levels.
pub const LEVEL_DEFAULTS: &str = "example-levels-v1";

/// Within-community connection probabilities of the step examples.
pub const WITHIN_LEVELS: [f64; 4] = [0.15, 0.25, 0.35, 0.45];
pub const WITHIN_BREAKS: [f64; 3] = [0.2, 0.5, 0.7];
/// Between-community connection probabilities of the step examples.
pub const BETWEEN_LEVELS: [f64; 4] = [0.25, 0.20, 0.15, 0.10];
pub const BETWEEN_BREAKS: [f64; 3] = [0.3, 0.5, 0.8];

/// A function of time on `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    /// `levels[j]` on `(breakpoints[j-1], breakpoints[j]]`, the first level
    /// also covering time 0.
    Step {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
    /// `from` up to `start`, linear to `to` at `end`, `to` afterwards.
    Ramp {
        start: f64,
        end: f64,
        from: f64,
        to: f64,
    },
}

impl Curve {
    pub fn constant(level: f64) -> Self {
        Curve::Step {
            breakpoints: vec![],
            levels: vec![level],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Curve::Step {
                breakpoints,
                levels,
            } => levels[breakpoints.partition_point(|&b| b < t)],
            Curve::Ramp {
                start,
                end,
                from,
                to,
            } => {
                if t <= *start {
                    *from
                } else if t >= *end {
                    *to
                } else {
                    from + (to - from) * (t - start) / (end - start)
                }
            }
        }
    }

    /// Points in `(0, 1)` where the curve is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Curve::Step { breakpoints, .. } => breakpoints.clone(),
            Curve::Ramp { start, end, .. } => vec![*start, *end],
        }
        .into_iter()
        .filter(|&t| t > 0.0 && t < 1.0)
        .collect()
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Curve::Step { levels, .. } => levels.clone(),
            Curve::Ramp { from, to, .. } => vec![*from, *to],
        }
    }

    fn validate(&self, what: &str, range: std::ops::RangeInclusive<f64>) -> Result<()> {
        match self {
            Curve::Step {
                breakpoints,
                levels,
            } => {
                if levels.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "{what}: a step curve needs one more level than breakpoints"
                    )));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidArgument(format!(
                        "{what}: breakpoints must be strictly increasing"
                    )));
                }
            }
            Curve::Ramp { start, end, .. } => {
                if !(start < end) {
                    return Err(Error::InvalidArgument(format!(
                        "{what}: ramp start must precede its end"
                    )));
                }
            }
        }
        if let Some(v) = self.values().into_iter().find(|v| !range.contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "{what}: value {v} outside [{}, {}]",
                range.start(),
                range.end()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub community_sizes: Vec<usize>,
    /// Connection probability per block, in column order.
    pub connectivity: Vec<Curve>,
    /// Random-effect standard deviation on the logit scale.
    pub sigma: Curve,
    pub n_subjects: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let blocks = BlockIndex::new(self.community_sizes.len());
        if self.community_sizes.is_empty() || self.community_sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "every community needs at least one node".into(),
            ));
        }
        if self.connectivity.len() != blocks.len() {
            return Err(Error::InvalidArgument(format!(
                "{} communities need {} connectivity curves, got {}",
                blocks.communities(),
                blocks.len(),
                self.connectivity.len()
            )));
        }
        if self.n_subjects == 0 {
            return Err(Error::InvalidArgument(
                "number of subjects must be positive".into(),
            ));
        }
        for (p, c) in self.connectivity.iter().enumerate() {
            c.validate(&format!("block {}", blocks.label(p)), 0.0..=1.0)?;
        }
        self.sigma.validate("sigma", 0.0..=f64::MAX)
    }

    pub fn nodes(&self) -> usize {
        self.community_sizes.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example {
    A,
    B,
    C,
}

impl std::str::FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Example::A),
            "B" | "b" => Ok(Example::B),
            "C" | "c" => Ok(Example::C),
            other => Err(Error::InvalidArgument(format!("unknown example {other:?}"))),
        }
    }
}

impl std::fmt::Display for Example {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Example::A => "A",
            Example::B => "B",
            Example::C => "C",
        })
    }
}

/// The three benchmark designs: 75 nodes in communities of 50 and 25.
///
/// A and B share step connectivity (within increasing, between decreasing);
/// A keeps `σ = 0.1`, B and C use `σ(t) = 0.2 - 0.1 I(t > 0.5)`. C replaces
/// the steps by linear ramps over `[0.2, 0.6]` (within) and `[0.4, 0.8]`
/// (between).
pub fn example_scenario(example: Example, n_subjects: usize, seed: u64) -> Scenario {
    let within_step = Curve::Step {
        breakpoints: WITHIN_BREAKS.to_vec(),
        levels: WITHIN_LEVELS.to_vec(),
    };
    let between_step = Curve::Step {
        breakpoints: BETWEEN_BREAKS.to_vec(),
        levels: BETWEEN_LEVELS.to_vec(),
    };
    let time_varying_sigma = Curve::Step {
        breakpoints: vec![0.5],
        levels: vec![0.2, 0.1],
    };
    let (within, between, sigma) = match example {
        Example::A => (within_step, between_step, Curve::constant(0.1)),
        Example::B => (within_step, between_step, time_varying_sigma),
        Example::C => (
            Curve::Ramp {
                start: 0.2,
                end: 0.6,
                from: WITHIN_LEVELS[0],
                to: WITHIN_LEVELS[3],
            },
            Curve::Ramp {
                start: 0.4,
                end: 0.8,
                from: BETWEEN_LEVELS[0],
                to: BETWEEN_LEVELS[3],
            },
            time_varying_sigma,
        ),
    };
    Scenario {
        community_sizes: vec![50, 25],
        connectivity: vec![within.clone(), between, within],
        sigma,
        n_subjects,
        seed,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    /// Subjects in increasing time order.
    pub networks: Vec<SubjectNetwork>,
    pub assignment: CommunityAssignment,
    pub scenario: Scenario,
    /// Realized random effects, one per subject.
    pub random_effects: Vec<f64>,
}

fn subject_ids(n: usize) -> impl Iterator<Item = String> {
    let width = n.to_string().len().max(4);
    (1..=n).map(move |i| format!("sub{i:0width$}"))
}

fn edge_probability(p: f64, w: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if p >= 1.0 {
        1.0
    } else {
        logistic(logit(p) + w)
    }
}

pub fn generate(scenario: &Scenario) -> Result<GeneratedDataset> {
    scenario.validate()?;
    let assignment = CommunityAssignment::contiguous(&scenario.community_sizes)?;
    let blocks = assignment.blocks();
    let labels = assignment.labels();
    let n = assignment.nodes();

    let mut time_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    time_rng.set_stream(0);
    let mut times: Vec<f64> = (0..scenario.n_subjects)
        .map(|_| time_rng.random::<f64>())
        .collect();
    times.sort_by(f64::total_cmp);

    let ids: Vec<String> = subject_ids(scenario.n_subjects).collect();
    let subjects: Vec<(SubjectNetwork, f64)> = times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            rng.set_stream(i as u64 + 1);
            let z: f64 = rng.sample(StandardNormal);
            let w = scenario.sigma.eval(t) * z;
            let probs: Vec<f64> = scenario
                .connectivity
                .iter()
                .map(|c| edge_probability(c.eval(t), w))
                .collect();
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    let p = probs[blocks.index(labels[a], labels[b])];
                    if rng.random::<f64>() < p {
                        edges.push((a, b));
                    }
                }
            }
            Ok((SubjectNetwork::new(ids[i].clone(), t, edges)?, w))
        })
        .collect::<Result<_>>()?;
    let (networks, random_effects) = subjects.into_iter().unzip();
    Ok(GeneratedDataset {
        networks,
        assignment,
        scenario: scenario.clone(),
        random_effects,
    })
}

/// Scale on which estimate and truth are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorScale {
    #[default]
    Probability,
    Logit,
}

impl std::str::FromStr for ErrorScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probability" => Ok(ErrorScale::Probability),
            "logit" => Ok(ErrorScale::Logit),
            other => Err(Error::InvalidArgument(format!("unknown scale {other:?}"))),
        }
    }
}

// 5-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_663_992_8,
    -0.538_469_310_105_683_091_0,
    0.0,
    0.538_469_310_105_683_091_0,
    0.906_179_845_938_663_992_8,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_087_5,
    0.478_628_670_499_366_468_0,
    0.568_888_888_888_888_888_9,
    0.478_628_670_499_366_468_0,
    0.236_926_885_056_189_087_5,
];
const PANELS_PER_UNIT: usize = 2000;

/// `∫ (θ - θ̂)² dt / ∫ θ² dt` over `(0, 1]`.
///
/// `estimate` holds logit-scale levels; `truth` is a probability curve. The
/// integral is split at every kink of either function and each piece is
/// covered by 5-point Gauss-Legendre panels (10⁴ nodes per unit length),
/// which is exact for the step and linear-ramp truths on the probability
/// scale.
pub fn relative_error(estimate: &StepFunction, truth: &Curve, scale: ErrorScale) -> Result<f64> {
    let mut cuts: Vec<f64> = estimate.boundaries[1..estimate.boundaries.len() - 1].to_vec();
    cuts.extend(truth.kinks());
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let map_truth = |p: f64| match scale {
        ErrorScale::Probability => p,
        ErrorScale::Logit => logit(p),
    };
    let map_est = |theta: f64| match scale {
        ErrorScale::Probability => logistic(theta),
        ErrorScale::Logit => theta,
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for piece in cuts.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        // every node is interior to the piece, so both step functions are
        // evaluated on their own level rather than a boundary value
        let panels = ((b - a) * PANELS_PER_UNIT as f64).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for j in 0..panels {
            let mid = a + h * (j as f64 + 0.5);
            for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let t = mid + 0.5 * h * x;
                let tv = map_truth(truth.eval(t));
                let ev = map_est(estimate.eval(t));
                num += 0.5 * h * wt * (tv - ev) * (tv - ev);
                den += 0.5 * h * wt * tv * tv;
            }
        }
    }
    if !den.is_finite() || den == 0.0 {
        return Err(Error::InvalidArgument(
            "truth has zero (or non-finite) squared integral on this scale".into(),
        ));
    }
    if !num.is_finite() {
        return Err(Error::Numerical("relative error is not finite".into()));
    }
    Ok(num / den)
}
