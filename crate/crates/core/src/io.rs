//! On-disk formats.
//!
//! A dataset directory holds three CSV files:
//!
//! * `subjects.csv`: `subject_id,time`
//! * `edges.csv`: `subject_id,node_a,node_b`, one row per edge; absent pairs are non-edges
//! * `communities.csv`: `node,community` with communities numbered from 1
//!
//! Node identifiers are arbitrary strings, indexed in order of first
//! appearance in `communities.csv`. Simulated datasets also carry
//! `truth.json`; fits are written as `fit.json`. Both JSON files have a
//! fixed key order and `format_version: 1`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    build_sufficient_stats, normalize_times, BlockIndex, CommunityAssignment, StatsTable,
    StepFunction, SubjectNetwork, TimePartition,
};
use crate::error::{Error, Result};
use crate::numeric::logistic;
use crate::pipeline::{FitConfig, FitResult};
use crate::shape::ShapeConstraint;
use crate::simulator::{GeneratedDataset, Scenario, LEVEL_DEFAULTS, RNG_ALGORITHM};

pub const FORMAT_VERSION: u32 = 1;
pub const SUBJECTS_FILE: &str = "subjects.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const COMMUNITIES_FILE: &str = "communities.csv";
pub const TRUTH_FILE: &str = "truth.json";

/// Writes through a sibling temporary file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Decimal rendering with 17 significant digits (no exponent).
pub fn format_time(t: f64) -> String {
    if t == 0.0 {
        return format!("{:.16}", 0.0);
    }
    let exponent = t.abs().log10().floor() as i32;
    // guard against log10 rounding at exact powers of ten
    let exponent = if 10f64.powi(exponent) > t.abs() {
        exponent - 1
    } else {
        exponent
    };
    let decimals = (16 - exponent).max(0) as usize;
    format!("{t:.decimals$}")
}

/// Original range of min-max normalized times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScale {
    pub min: f64,
    pub max: f64,
}

/// Networks, communities and node names loaded from (or bound for) disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub networks: Vec<SubjectNetwork>,
    pub assignment: CommunityAssignment,
    pub node_names: Vec<String>,
    /// Set when raw times were normalized on load.
    pub time_scale: Option<TimeScale>,
}

impl Dataset {
    pub fn times(&self) -> Vec<f64> {
        self.networks.iter().map(|n| n.time).collect()
    }

    pub fn stats(&self) -> Result<StatsTable> {
        build_sufficient_stats(&self.networks, &self.assignment)
    }
}

impl From<GeneratedDataset> for Dataset {
    fn from(d: GeneratedDataset) -> Self {
        let node_names = (1..=d.assignment.nodes()).map(|j| j.to_string()).collect();
        Dataset {
            networks: d.networks,
            assignment: d.assignment,
            node_names,
            time_scale: None,
        }
    }
}

fn csv_reader(path: &Path, header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let found = rdr
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::parse(
            path,
            1,
            format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(rdr)
}

fn records(
    path: &Path,
    rdr: csv::Reader<fs::File>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord)>> + '_ {
    rdr.into_records().map(move |r| {
        let r = r.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, line, e.to_string())
        })?;
        let line = r.position().map_or(0, |p| p.line());
        Ok((line, r))
    })
}

/// Loads and validates a dataset directory.
///
/// Times outside `[0, 1]` are min-max normalized and the original range is
/// kept in `time_scale`; `force_normalize` applies the same mapping to any input.
pub fn read_dataset(dir: &Path, force_normalize: bool) -> Result<Dataset> {
    let path = dir.join(COMMUNITIES_FILE);
    let mut node_index: HashMap<String, usize> = HashMap::new();
    let mut node_names = Vec::new();
    let mut labels = Vec::new();
    for rec in records(&path, csv_reader(&path, &["node", "community"])?) {
        let (line, r) = rec?;
        let name = r[0].to_string();
        let community: usize = r[1].parse().ok().filter(|&c| c >= 1).ok_or_else(|| {
            Error::parse(
                &path,
                line,
                format!("community {:?} is not a positive integer", &r[1]),
            )
        })?;
        if node_index.insert(name.clone(), node_names.len()).is_some() {
            return Err(Error::parse(
                &path,
                line,
                format!("node {name:?} listed twice"),
            ));
        }
        node_names.push(name);
        labels.push(community - 1);
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let assignment =
        CommunityAssignment::new(labels, k).map_err(|e| Error::parse(&path, 0, e.to_string()))?;

    let path = dir.join(SUBJECTS_FILE);
    let mut subject_index: HashMap<String, usize> = HashMap::new();
    let mut ids = Vec::new();
    let mut raw_times = Vec::new();
    for rec in records(&path, csv_reader(&path, &["subject_id", "time"])?) {
        let (line, r) = rec?;
        let id = r[0].to_string();
        let t: f64 = r[1]
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite())
            .ok_or_else(|| {
                Error::parse(
                    &path,
                    line,
                    format!("time {:?} is not a finite number", &r[1]),
                )
            })?;
        if subject_index.insert(id.clone(), ids.len()).is_some() {
            return Err(Error::parse(
                &path,
                line,
                format!("subject {id:?} listed twice"),
            ));
        }
        ids.push(id);
        raw_times.push(t);
    }
    if ids.is_empty() {
        return Err(Error::parse(&path, 1, "no subjects"));
    }
    let out_of_range = raw_times.iter().any(|t| !(0.0..=1.0).contains(t));
    let (times, time_scale) = if force_normalize || out_of_range {
        let (t, (min, max)) = normalize_times(&raw_times);
        (t, Some(TimeScale { min, max }))
    } else {
        (raw_times, None)
    };

    let path = dir.join(EDGES_FILE);
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ids.len()];
    let mut seen: HashSet<(usize, usize, usize)> = HashSet::new();
    for rec in records(
        &path,
        csv_reader(&path, &["subject_id", "node_a", "node_b"])?,
    ) {
        let (line, r) = rec?;
        let i = *subject_index
            .get(&r[0])
            .ok_or_else(|| Error::parse(&path, line, format!("unknown subject {:?}", &r[0])))?;
        let node = |name: &str| {
            node_index
                .get(name)
                .copied()
                .ok_or_else(|| Error::parse(&path, line, format!("unknown node {name:?}")))
        };
        let (a, b) = (node(&r[1])?, node(&r[2])?);
        if a == b {
            return Err(Error::parse(
                &path,
                line,
                format!("self-loop on node {:?}", &r[1]),
            ));
        }
        let (a, b) = (a.min(b), a.max(b));
        if !seen.insert((i, a, b)) {
            return Err(Error::parse(&path, line, "duplicate edge"));
        }
        edges[i].push((a, b));
    }
    let networks = ids
        .into_iter()
        .zip(times)
        .zip(edges)
        .map(|((id, t), e)| SubjectNetwork::new(id, t, e))
        .collect::<Result<_>>()?;
    Ok(Dataset {
        networks,
        assignment,
        node_names,
        time_scale,
    })
}

fn csv_bytes(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    rows(&mut w).expect("writing to memory");
    w.into_inner().expect("flushing to memory")
}

/// Writes `subjects.csv`, `edges.csv` and `communities.csv` into `dir`.
pub fn write_dataset(dir: &Path, data: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let subjects = csv_bytes(|w| {
        w.write_record(["subject_id", "time"])?;
        for n in &data.networks {
            w.write_record([n.subject_id.as_str(), &format_time(n.time)])?;
        }
        Ok(())
    });
    let edges = csv_bytes(|w| {
        w.write_record(["subject_id", "node_a", "node_b"])?;
        for n in &data.networks {
            let mut e = n.edges.clone();
            e.sort_unstable();
            for (a, b) in e {
                w.write_record([
                    n.subject_id.as_str(),
                    &data.node_names[a],
                    &data.node_names[b],
                ])?;
            }
        }
        Ok(())
    });
    let communities = csv_bytes(|w| {
        w.write_record(["node", "community"])?;
        for (name, &c) in data.node_names.iter().zip(data.assignment.labels()) {
            w.write_record([name.as_str(), &(c + 1).to_string()])?;
        }
        Ok(())
    });
    atomic_write(&dir.join(SUBJECTS_FILE), &subjects)?;
    atomic_write(&dir.join(EDGES_FILE), &edges)?;
    atomic_write(&dir.join(COMMUNITIES_FILE), &communities)
}

/// Generator settings echoed next to simulated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub format_version: u32,
    pub rng_algorithm: String,
    pub level_defaults: String,
    /// Example identifier, when a built-in design was used.
    pub example: Option<String>,
    pub scenario: Scenario,
}

impl Truth {
    pub fn new(scenario: Scenario, example: Option<String>) -> Self {
        Truth {
            format_version: FORMAT_VERSION,
            rng_algorithm: RNG_ALGORITHM.into(),
            level_defaults: LEVEL_DEFAULTS.into(),
            example,
            scenario,
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn write_truth(path: &Path, truth: &Truth) -> Result<()> {
    atomic_write(path, &json_bytes(truth))
}

pub fn read_truth(path: &Path) -> Result<Truth> {
    let t: Truth = read_json(path)?;
    if t.format_version != FORMAT_VERSION {
        return Err(Error::Data(format!(
            "{}: unsupported format_version {}",
            path.display(),
            t.format_version
        )));
    }
    t.scenario.validate()?;
    Ok(t)
}

/// Reads a bare scenario description (the `scenario` object of `truth.json`).
pub fn read_scenario(path: &Path) -> Result<Scenario> {
    read_json(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block: String,
    pub shape: ShapeConstraint,
    /// One-based peak or valley interval for the unimodal classes.
    pub turning_interval: Option<usize>,
    pub b: usize,
    pub df: usize,
    pub bic_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub line_search_failures: usize,
    pub quadrature_fallback_subjects: Vec<String>,
}

/// Serialized fit: all three estimate stages, per interval, per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub format_version: u32,
    pub config: FitConfig,
    pub n_subjects: usize,
    pub communities: usize,
    pub blocks: Vec<String>,
    pub time_scale: Option<TimeScale>,
    pub partition: TimePartition,
    pub interval_counts: Vec<usize>,
    /// Block-major: `theta_*[p][s]`.
    pub theta_unconstrained: Vec<Vec<f64>>,
    pub theta_shape: Vec<Vec<f64>>,
    pub theta_fused: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub block_fits: Vec<BlockRecord>,
    pub objective_trace: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Estimation stage of a fitted step sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Unconstrained,
    Shape,
    Fused,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Unconstrained, Stage::Shape, Stage::Fused];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Unconstrained => "unconstrained",
            Stage::Shape => "shape",
            Stage::Fused => "fused",
        }
    }
}

impl FitArtifact {
    pub fn new(
        config: &FitConfig,
        result: &FitResult,
        subject_ids: &[String],
        time_scale: Option<TimeScale>,
    ) -> Self {
        let blocks = BlockIndex::new(communities_from_blocks(result.theta_fused.blocks()));
        let block_fits = result
            .blocks
            .iter()
            .enumerate()
            .map(|(p, o)| BlockRecord {
                block: blocks.label(p),
                shape: o.shape,
                turning_interval: o.turning_point.map(|m| m + 1),
                b: o.b,
                df: o.df,
                bic_trace: o.bic_trace.clone(),
            })
            .collect();
        let u = &result.unconstrained;
        FitArtifact {
            format_version: FORMAT_VERSION,
            config: config.clone(),
            n_subjects: result.tau.len(),
            communities: blocks.communities(),
            blocks: (0..blocks.len()).map(|p| blocks.label(p)).collect(),
            time_scale,
            partition: result.partition.clone(),
            interval_counts: result.interval_counts.clone(),
            theta_unconstrained: u.theta.columns(),
            theta_shape: result.theta_shape.columns(),
            theta_fused: result.theta_fused.columns(),
            sigma: u.sigma.values().to_vec(),
            block_fits,
            objective_trace: u.trace.clone(),
            diagnostics: Diagnostics {
                converged: u.converged,
                iterations: u.iterations,
                line_search_failures: u.line_search_failures,
                quadrature_fallback_subjects: u
                    .quadrature_fallbacks
                    .iter()
                    .zip(subject_ids)
                    .filter(|(f, _)| **f)
                    .map(|(_, id)| id.clone())
                    .collect(),
            },
        }
    }

    pub fn stage(&self, stage: Stage) -> &[Vec<f64>] {
        match stage {
            Stage::Unconstrained => &self.theta_unconstrained,
            Stage::Shape => &self.theta_shape,
            Stage::Fused => &self.theta_fused,
        }
    }

    pub fn intervals(&self) -> usize {
        self.partition.intervals()
    }

    pub fn step_function(&self, stage: Stage, p: usize) -> Result<StepFunction> {
        StepFunction::on(&self.partition, self.stage(stage)[p].clone())
    }

    /// Checks dimensions, shape membership and fusion cardinality.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Data(format!("invalid fit artifact: {m}")));
        if self.format_version != FORMAT_VERSION {
            return fail(format!(
                "unsupported format_version {}",
                self.format_version
            ));
        }
        let p = BlockIndex::new(self.communities).len();
        let s = self.intervals();
        if self.partition.boundaries.windows(2).any(|w| w[0] >= w[1])
            || self.partition.boundaries.first() != Some(&0.0)
            || self.partition.boundaries.last() != Some(&1.0)
        {
            return fail("partition boundaries must increase from 0 to 1".into());
        }
        if self.blocks.len() != p || self.block_fits.len() != p {
            return fail(format!("expected {p} blocks"));
        }
        for stage in Stage::ALL {
            let cols = self.stage(stage);
            if cols.len() != p
                || cols
                    .iter()
                    .any(|c| c.len() != s || c.iter().any(|v| !v.is_finite()))
            {
                return fail(format!(
                    "{} estimates must be {p} finite columns of length {s}",
                    stage.name()
                ));
            }
        }
        if self.sigma.len() != s || self.interval_counts.len() != s {
            return fail(format!("sigma and interval counts must have length {s}"));
        }
        for (col, rec) in self.theta_fused.iter().zip(&self.block_fits) {
            if rec.shape == ShapeConstraint::Auto {
                return fail(format!("block {}: unresolved shape", rec.block));
            }
            if !rec.shape.contains(col) {
                return fail(format!(
                    "block {}: fused estimate is not {}",
                    rec.block, rec.shape
                ));
            }
            let jumps = col.windows(2).filter(|w| w[0] != w[1]).count();
            if rec.b == 0 || jumps > rec.b - 1 {
                return fail(format!(
                    "block {}: {jumps} jumps exceed b - 1 = {}",
                    rec.block,
                    rec.b.saturating_sub(1)
                ));
            }
        }
        Ok(())
    }
}

fn communities_from_blocks(p: usize) -> usize {
    // K(K+1)/2 = p
    (1..).find(|k| k * (k + 1) / 2 >= p).unwrap_or(0)
}

pub fn write_fit(path: &Path, artifact: &FitArtifact) -> Result<()> {
    atomic_write(path, &json_bytes(artifact))
}

/// Loads `fit.json` and re-verifies its constraints.
pub fn read_fit(path: &Path) -> Result<FitArtifact> {
    let a: FitArtifact = read_json(path)?;
    a.validate()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    Ok(a)
}

/// CSV `t,block,stage,theta,probability` over a uniform grid of `grid` points on `[0, 1]`.
pub fn curves_csv(artifact: &FitArtifact, grid: usize) -> Result<Vec<u8>> {
    if grid < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least 2 points".into(),
        ));
    }
    let mut fns = Vec::new();
    for (p, label) in artifact.blocks.iter().enumerate() {
        for stage in Stage::ALL {
            fns.push((label, stage, artifact.step_function(stage, p)?));
        }
    }
    Ok(csv_bytes(|w| {
        w.write_record(["t", "block", "stage", "theta", "probability"])?;
        for (label, stage, f) in &fns {
            for g in 0..grid {
                let t = g as f64 / (grid - 1) as f64;
                let theta = f.eval(t);
                w.write_record([
                    t.to_string(),
                    label.to_string(),
                    stage.name().to_string(),
                    theta.to_string(),
                    logistic(theta).to_string(),
                ])?;
            }
        }
        Ok(())
    }))
}

pub fn dataset_paths(dir: &Path) -> [PathBuf; 3] {
    [
        dir.join(SUBJECTS_FILE),
        dir.join(EDGES_FILE),
        dir.join(COMMUNITIES_FILE),
    ]
}
