//! Hard-threshold fusion of adjacent steps.
//!
//! `fuse(v, b)` keeps the `b - 1` largest absolute consecutive differences of
//! `v`, which split the positions into at most `b` runs, and replaces every
//! run by its mean. Applied to a monotone or (inverse) unimodal sequence the
//! result stays in the same class.

use crate::error::{Error, Result};
use crate::numeric::running_mean;

#[derive(Debug, Clone, PartialEq)]
pub struct FusedVector {
    pub values: Vec<f64>,
    /// Zero-based start index of every run after the first.
    pub breaks: Vec<usize>,
}

impl FusedVector {
    pub fn df(&self) -> usize {
        degrees_of_freedom(&self.values)
    }
}

pub fn fuse(v: &[f64], b: usize) -> Result<FusedVector> {
    let s = v.len();
    if b == 0 || b > s {
        return Err(Error::InvalidArgument(format!(
            "fusion parameter {b} outside 1..={s}"
        )));
    }
    let diffs: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    // largest first; equal magnitudes keep the earliest position
    order.sort_by(|&i, &j| diffs[j].total_cmp(&diffs[i]).then(i.cmp(&j)));
    let mut kept: Vec<usize> = order.into_iter().take(b - 1).collect();
    kept.sort_unstable();

    let mut values = Vec::with_capacity(s);
    let mut start = 0;
    for end in kept.iter().map(|&i| i + 1).chain(std::iter::once(s)) {
        let run = &v[start..end];
        let lo = run.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = run.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let m = running_mean(run).clamp(lo, hi);
        values.extend(std::iter::repeat_n(m, run.len()));
        start = end;
    }
    let breaks = (1..s).filter(|&i| values[i] != values[i - 1]).collect();
    Ok(FusedVector { values, breaks })
}

/// Number of maximal constant runs.
pub fn degrees_of_freedom(v: &[f64]) -> usize {
    if v.is_empty() {
        return 0;
    }
    1 + v.windows(2).filter(|w| w[0] != w[1]).count()
}
