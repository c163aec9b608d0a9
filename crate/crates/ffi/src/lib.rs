//! C ABI for the `tvsbm` estimator.
//!
//! Datasets and fits are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`TvsbmStatus`]; on failure, [`tvsbm_last_error`] describes the most recent
//! error on the calling thread. Output buffers are caller-allocated and their
//! length is checked against the required size.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use tvsbm::fusion::fuse;
use tvsbm::io::{self, Dataset, FitArtifact, Stage, Truth};
use tvsbm::optimizer::OptimizerConfig;
use tvsbm::pipeline::FusionSelection;
use tvsbm::quadrature::{hermite_rule, MAX_ORDER};
use tvsbm::shape::project_shape;
use tvsbm::simulator::{example_scenario, generate, Example};
use tvsbm::{Error, FitConfig, PartitionMode, ShapeConstraint};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvsbmStatus {
    Ok = 0,
    InvalidArgument = 1,
    DataError = 2,
    ParseError = 3,
    EmptyInterval = 4,
    Numerical = 5,
    IoError = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvsbmPartition {
    EqualLength = 0,
    EqualCount = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvsbmShape {
    Increasing = 0,
    Decreasing = 1,
    Unimodal = 2,
    InverseUnimodal = 3,
    Auto = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvsbmStage {
    Unconstrained = 0,
    Shape = 1,
    Fused = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvsbmFitOptions {
    pub intervals: usize,
    pub partition: TvsbmPartition,
    pub shape: TvsbmShape,
    pub quad_points: usize,
    /// Fixed number of fused groups; 0 selects it by BIC.
    pub groups: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TvsbmBlockInfo {
    pub shape: TvsbmShape,
    /// One-based peak or valley interval; 0 for monotone shapes.
    pub turning_interval: usize,
    pub groups: usize,
    pub df: usize,
}

/// Opaque dataset handle.
pub struct TvsbmDataset {
    data: Dataset,
    truth: Option<Truth>,
}

/// Opaque fit handle.
pub struct TvsbmFit {
    artifact: FitArtifact,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TvsbmStatus {
    match e {
        Error::InvalidArgument(_) => TvsbmStatus::InvalidArgument,
        Error::Data(_) => TvsbmStatus::DataError,
        Error::Parse { .. } | Error::Json { .. } => TvsbmStatus::ParseError,
        Error::EmptyInterval { .. } => TvsbmStatus::EmptyInterval,
        Error::Numerical(_) => TvsbmStatus::Numerical,
        Error::Io { .. } => TvsbmStatus::IoError,
    }
}

struct Fail(TvsbmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TvsbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TvsbmStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            TvsbmStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(TvsbmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TvsbmStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice_in<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null("input buffer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, len: usize) -> Result<(), Fail> {
    if len < values.len() {
        return Err(Fail(
            TvsbmStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn shape_in(s: TvsbmShape) -> ShapeConstraint {
    match s {
        TvsbmShape::Increasing => ShapeConstraint::Increasing,
        TvsbmShape::Decreasing => ShapeConstraint::Decreasing,
        TvsbmShape::Unimodal => ShapeConstraint::Unimodal,
        TvsbmShape::InverseUnimodal => ShapeConstraint::InverseUnimodal,
        TvsbmShape::Auto => ShapeConstraint::Auto,
    }
}

fn shape_out(s: ShapeConstraint) -> TvsbmShape {
    match s {
        ShapeConstraint::Increasing => TvsbmShape::Increasing,
        ShapeConstraint::Decreasing => TvsbmShape::Decreasing,
        ShapeConstraint::Unimodal => TvsbmShape::Unimodal,
        ShapeConstraint::InverseUnimodal => TvsbmShape::InverseUnimodal,
        ShapeConstraint::Auto => TvsbmShape::Auto,
    }
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tvsbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tvsbm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Simulates one of the built-in examples (`'A'`, `'B'` or `'C'`).
///
/// # Safety
/// `out` must be a valid pointer to writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_dataset_simulate(
    example: c_char,
    n_subjects: usize,
    seed: u64,
    out: *mut *mut TvsbmDataset,
) -> TvsbmStatus {
    guard(|| {
        let ex: Example = (example as u8 as char).to_string().parse()?;
        let scenario = example_scenario(ex, n_subjects, seed);
        let data = Dataset::from(generate(&scenario)?);
        store(
            out,
            TvsbmDataset {
                data,
                truth: Some(Truth::new(scenario, Some(ex.to_string()))),
            },
        )
    })
}

/// Loads a dataset directory, along with `truth.json` when present.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_dataset_load(
    dir: *const c_char,
    out: *mut *mut TvsbmDataset,
) -> TvsbmStatus {
    guard(|| {
        let dir = path_arg(dir, "dir")?;
        let data = io::read_dataset(&dir, false)?;
        let truth_path = dir.join(io::TRUTH_FILE);
        let truth = if truth_path.exists() {
            Some(io::read_truth(&truth_path)?)
        } else {
            None
        };
        store(out, TvsbmDataset { data, truth })
    })
}

/// Writes the dataset files (and `truth.json` for simulated data) into `dir`.
///
/// # Safety
/// `dataset` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_dataset_save(
    dataset: *const TvsbmDataset,
    dir: *const c_char,
) -> TvsbmStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        let dir = path_arg(dir, "dir")?;
        io::write_dataset(&dir, &d.data)?;
        if let Some(t) = &d.truth {
            io::write_truth(&dir.join(io::TRUTH_FILE), t)?;
        }
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_dataset_free(dataset: *mut TvsbmDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_dataset_subjects(dataset: *const TvsbmDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.networks.len())
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_dataset_nodes(dataset: *const TvsbmDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.assignment.nodes())
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_dataset_communities(dataset: *const TvsbmDataset) -> usize {
    dataset
        .as_ref()
        .map_or(0, |d| d.data.assignment.communities())
}

/// Defaults matching the command-line tool for `intervals` intervals.
#[no_mangle]
pub extern "C" fn tvsbm_fit_options_default(intervals: usize) -> TvsbmFitOptions {
    let c = FitConfig::new(intervals);
    TvsbmFitOptions {
        intervals,
        partition: TvsbmPartition::EqualLength,
        shape: shape_out(c.shape),
        quad_points: c.quad_points,
        groups: 0,
        max_iters: c.optimizer.max_outer_iters,
        rel_tol: c.optimizer.rel_tol,
    }
}

/// Runs the full three-stage fit.
///
/// # Safety
/// `dataset` must be a live handle, `options` a valid pointer and `out`
/// writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit(
    dataset: *const TvsbmDataset,
    options: *const TvsbmFitOptions,
    out: *mut *mut TvsbmFit,
) -> TvsbmStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        let o = *handle(options, "options")?;
        let mut config = FitConfig::new(o.intervals);
        config.partition = match o.partition {
            TvsbmPartition::EqualLength => PartitionMode::EqualLength,
            TvsbmPartition::EqualCount => PartitionMode::EqualCount,
        };
        config.shape = shape_in(o.shape);
        config.quad_points = o.quad_points;
        config.fusion = if o.groups == 0 {
            FusionSelection::Bic
        } else {
            FusionSelection::Fixed(o.groups)
        };
        config.optimizer = OptimizerConfig {
            max_outer_iters: o.max_iters,
            rel_tol: o.rel_tol,
            ..OptimizerConfig::default()
        };
        config.optimizer.validate()?;
        let stats = d.data.stats()?;
        let result = tvsbm::fit(&d.data.times(), &stats, &config)?;
        let ids: Vec<String> = d
            .data
            .networks
            .iter()
            .map(|n| n.subject_id.clone())
            .collect();
        let artifact = FitArtifact::new(&config, &result, &ids, d.data.time_scale);
        store(out, TvsbmFit { artifact })
    })
}

/// Loads and validates a `fit.json` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_load(
    path: *const c_char,
    out: *mut *mut TvsbmFit,
) -> TvsbmStatus {
    guard(|| {
        let artifact = io::read_fit(&path_arg(path, "path")?)?;
        store(out, TvsbmFit { artifact })
    })
}

/// # Safety
/// `fit` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_save(fit: *const TvsbmFit, path: *const c_char) -> TvsbmStatus {
    guard(|| {
        let f = handle(fit, "fit")?;
        io::write_fit(&path_arg(path, "path")?, &f.artifact)?;
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_free(fit: *mut TvsbmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of time intervals `S`.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_intervals(fit: *const TvsbmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.artifact.intervals())
}

/// Number of community blocks `K(K+1)/2`.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_blocks(fit: *const TvsbmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.artifact.blocks.len())
}

/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_converged(fit: *const TvsbmFit) -> bool {
    fit.as_ref()
        .is_some_and(|f| f.artifact.diagnostics.converged)
}

/// Copies the `S + 1` interval boundaries.
///
/// # Safety
/// `fit` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_boundaries(
    fit: *const TvsbmFit,
    out: *mut f64,
    len: usize,
) -> TvsbmStatus {
    guard(|| copy_out(&handle(fit, "fit")?.artifact.partition.boundaries, out, len))
}

/// Copies the `S` logit-scale levels of `block` at `stage`.
///
/// # Safety
/// `fit` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_theta(
    fit: *const TvsbmFit,
    stage: TvsbmStage,
    block: usize,
    out: *mut f64,
    len: usize,
) -> TvsbmStatus {
    guard(|| {
        let a = &handle(fit, "fit")?.artifact;
        let stage = match stage {
            TvsbmStage::Unconstrained => Stage::Unconstrained,
            TvsbmStage::Shape => Stage::Shape,
            TvsbmStage::Fused => Stage::Fused,
        };
        let col = a.stage(stage).get(block).ok_or_else(|| {
            Fail(
                TvsbmStatus::InvalidArgument,
                format!("block {block} out of range"),
            )
        })?;
        copy_out(col, out, len)
    })
}

/// Copies the `S` random-effect standard deviations.
///
/// # Safety
/// `fit` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_sigma(
    fit: *const TvsbmFit,
    out: *mut f64,
    len: usize,
) -> TvsbmStatus {
    guard(|| copy_out(&handle(fit, "fit")?.artifact.sigma, out, len))
}

/// # Safety
/// `fit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_block_info(
    fit: *const TvsbmFit,
    block: usize,
    out: *mut TvsbmBlockInfo,
) -> TvsbmStatus {
    guard(|| {
        let a = &handle(fit, "fit")?.artifact;
        let r = a.block_fits.get(block).ok_or_else(|| {
            Fail(
                TvsbmStatus::InvalidArgument,
                format!("block {block} out of range"),
            )
        })?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = TvsbmBlockInfo {
            shape: shape_out(r.shape),
            turning_interval: r.turning_interval.unwrap_or(0),
            groups: r.b,
            df: r.df,
        };
        Ok(())
    })
}

/// The fit serialized exactly as `fit.json`; release with [`tvsbm_string_free`].
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fit_to_json(fit: *const TvsbmFit) -> *mut c_char {
    let Some(f) = fit.as_ref() else {
        set_last_error("fit is null");
        return ptr::null_mut();
    };
    match serde_json::to_string_pretty(&f.artifact) {
        Ok(s) => CString::new(s + "\n").map_or(ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_last_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Hard-threshold fusion of `values` into `groups` constant runs.
///
/// # Safety
/// `values` and `out` must each be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_fuse(
    values: *const f64,
    len: usize,
    groups: usize,
    out: *mut f64,
) -> TvsbmStatus {
    guard(|| {
        let v = slice_in(values, len)?;
        copy_out(&fuse(v, groups)?.values, out, len)
    })
}

/// Least-squares projection onto a shape class. With `TVSBM_SHAPE_AUTO` the
/// chosen class is written to `resolved` (which may be null).
///
/// # Safety
/// `values` and `out` must each be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_project_shape(
    values: *const f64,
    len: usize,
    shape: TvsbmShape,
    out: *mut f64,
    resolved: *mut TvsbmShape,
) -> TvsbmStatus {
    guard(|| {
        let v = slice_in(values, len)?;
        let p = project_shape(v, shape_in(shape));
        copy_out(&p.values, out, len)?;
        if let Some(r) = resolved.as_mut() {
            *r = shape_out(p.constraint);
        }
        Ok(())
    })
}

/// Physicists' Gauss-Hermite nodes and weights of the given order (1..=64).
///
/// # Safety
/// `nodes` and `weights` must each be valid for `order` writes.
#[no_mangle]
pub unsafe extern "C" fn tvsbm_hermite_rule(
    order: usize,
    nodes: *mut f64,
    weights: *mut f64,
) -> TvsbmStatus {
    guard(|| {
        if order == 0 || order > MAX_ORDER {
            return Err(Fail(
                TvsbmStatus::InvalidArgument,
                format!("order must be in 1..={MAX_ORDER}"),
            ));
        }
        let r = hermite_rule(order)?;
        copy_out(r.nodes(), nodes, order)?;
        copy_out(r.weights(), weights, order)
    })
}
