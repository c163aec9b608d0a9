#![allow(dead_code)]

use tvsbm::io::{Dataset, FitArtifact, Stage};
use tvsbm::simulator::{
    example_scenario, generate, relative_error, Curve, ErrorScale, Example, Scenario,
};
use tvsbm::{fit, Error, FitConfig, PartitionMode, StatsTable};

pub struct Simulated {
    pub scenario: Scenario,
    pub data: Dataset,
    pub stats: StatsTable,
}

pub fn simulate(example: Example, n: usize, seed: u64) -> Simulated {
    simulate_scenario(example_scenario(example, n, seed))
}

pub fn simulate_scenario(scenario: Scenario) -> Simulated {
    let data = Dataset::from(generate(&scenario).unwrap());
    let stats = data.stats().unwrap();
    Simulated {
        scenario,
        data,
        stats,
    }
}

/// Fits with the given partition, switching to equal-count intervals if an
/// equal-length interval would be empty.
pub fn fit_simulated(sim: &Simulated, config: &FitConfig) -> FitArtifact {
    let times = sim.data.times();
    let (config, result) = match fit(&times, &sim.stats, config) {
        Err(Error::EmptyInterval { .. }) if config.partition == PartitionMode::EqualLength => {
            let mut c = config.clone();
            c.partition = PartitionMode::EqualCount;
            let r = fit(&times, &sim.stats, &c).unwrap();
            (c, r)
        }
        r => (config.clone(), r.unwrap()),
    };
    let config = &config;
    let ids: Vec<String> = sim
        .data
        .networks
        .iter()
        .map(|n| n.subject_id.clone())
        .collect();
    FitArtifact::new(config, &result, &ids, None)
}

pub fn fit_example(
    example: Example,
    n: usize,
    seed: u64,
    config: &FitConfig,
) -> (Scenario, FitArtifact) {
    let sim = simulate(example, n, seed);
    let a = fit_simulated(&sim, config);
    (sim.scenario, a)
}

/// Probability-scale relative error per block for one stage.
pub fn stage_errors(fit: &FitArtifact, truth: &Scenario, stage: Stage) -> Vec<f64> {
    (0..fit.blocks.len())
        .map(|p| {
            relative_error(
                &fit.step_function(stage, p).unwrap(),
                &truth.connectivity[p],
                ErrorScale::Probability,
            )
            .unwrap()
        })
        .collect()
}

/// Truth on the logit scale averaged over each interval is not needed for
/// step truths aligned with the partition; interval midpoints suffice.
pub fn truth_at_midpoints(curve: &Curve, boundaries: &[f64]) -> Vec<f64> {
    boundaries
        .windows(2)
        .map(|w| {
            let p = curve.eval(0.5 * (w[0] + w[1]));
            (p / (1.0 - p)).ln()
        })
        .collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
