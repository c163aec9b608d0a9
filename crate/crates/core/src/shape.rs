//! Least-squares projection of step sequences onto shape classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeConstraint {
    Increasing,
    Decreasing,
    /// Non-decreasing up to a peak, then non-increasing.
    Unimodal,
    /// Non-increasing down to a valley, then non-decreasing.
    InverseUnimodal,
    /// Whichever of `Unimodal` and `InverseUnimodal` fits closer.
    Auto,
}

impl ShapeConstraint {
    pub fn name(self) -> &'static str {
        match self {
            ShapeConstraint::Increasing => "increasing",
            ShapeConstraint::Decreasing => "decreasing",
            ShapeConstraint::Unimodal => "unimodal",
            ShapeConstraint::InverseUnimodal => "inverse-unimodal",
            ShapeConstraint::Auto => "auto",
        }
    }

    /// Whether `v` belongs to the class. `Auto` accepts either unimodal form.
    pub fn contains(self, v: &[f64]) -> bool {
        match self {
            ShapeConstraint::Increasing => v.windows(2).all(|w| w[0] <= w[1]),
            ShapeConstraint::Decreasing => v.windows(2).all(|w| w[0] >= w[1]),
            ShapeConstraint::Unimodal => is_unimodal(v),
            ShapeConstraint::InverseUnimodal => {
                is_unimodal(&v.iter().map(|x| -x).collect::<Vec<_>>())
            }
            ShapeConstraint::Auto => {
                ShapeConstraint::Unimodal.contains(v)
                    || ShapeConstraint::InverseUnimodal.contains(v)
            }
        }
    }
}

impl std::fmt::Display for ShapeConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ShapeConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "increasing" => ShapeConstraint::Increasing,
            "decreasing" => ShapeConstraint::Decreasing,
            "unimodal" => ShapeConstraint::Unimodal,
            "inverse-unimodal" => ShapeConstraint::InverseUnimodal,
            "auto" => ShapeConstraint::Auto,
            other => return Err(Error::InvalidArgument(format!("unknown shape {other:?}"))),
        })
    }
}

fn is_unimodal(v: &[f64]) -> bool {
    let mut i = 1;
    while i < v.len() && v[i - 1] <= v[i] {
        i += 1;
    }
    while i < v.len() && v[i - 1] >= v[i] {
        i += 1;
    }
    i >= v.len()
}

/// Output of [`project_shape`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub values: Vec<f64>,
    /// Resolved constraint (never `Auto`).
    pub constraint: ShapeConstraint,
    /// Zero-based peak (unimodal) or valley (inverse unimodal) position.
    pub turning_point: Option<usize>,
    pub sse: f64,
}

pub fn sse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Projection onto non-decreasing sequences by pool-adjacent-violators.
pub fn isotonic_increasing(v: &[f64]) -> Vec<f64> {
    // (sum, count, mean) per pooled block
    let mut blocks: Vec<(f64, usize, f64)> = Vec::with_capacity(v.len());
    for &x in v {
        let mut cur = (x, 1usize, x);
        while let Some(&(s, c, m)) = blocks.last() {
            if m <= cur.2 {
                break;
            }
            blocks.pop();
            let (s2, c2) = (s + cur.0, c + cur.1);
            cur = (s2, c2, s2 / c2 as f64);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(v.len());
    for (_, c, m) in blocks {
        out.extend(std::iter::repeat_n(m, c));
    }
    out
}

/// Projection onto non-increasing sequences.
pub fn isotonic_decreasing(v: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    isotonic_increasing(&neg).into_iter().map(|x| -x).collect()
}

/// Unimodal least-squares projection; returns the zero-based peak and the fit.
///
/// Every unimodal sequence is a non-decreasing prefix followed by a
/// non-increasing suffix, so the projection is the best of the `S` split
/// fits `inc(v[..m]) ++ dec(v[m..])`. Ties go to the smallest split. The
/// reported peak is the first maximum of the fitted sequence.
pub fn unimodal_project(v: &[f64]) -> (usize, Vec<f64>) {
    if v.is_empty() {
        return (0, Vec::new());
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for m in 1..=v.len() {
        let mut cand = isotonic_increasing(&v[..m]);
        cand.extend(isotonic_decreasing(&v[m..]));
        let err = sse(&cand, v);
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, cand));
        }
    }
    let (_, fit) = best.expect("non-empty input");
    let peak = first_extreme(&fit, |a, b| a > b);
    (peak, fit)
}

/// Inverse-unimodal projection; returns the zero-based valley and the fit.
pub fn inverse_unimodal_project(v: &[f64]) -> (usize, Vec<f64>) {
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let (valley, fit) = unimodal_project(&neg);
    (valley, fit.into_iter().map(|x| -x).collect())
}

fn first_extreme(v: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut idx = 0;
    for (i, &x) in v.iter().enumerate() {
        if better(x, v[idx]) {
            idx = i;
        }
    }
    idx
}

/// Chooses between unimodal and inverse-unimodal by projection error; ties
/// favour unimodal.
pub fn select_shape_auto(v: &[f64]) -> ShapeConstraint {
    let up = sse(&unimodal_project(v).1, v);
    let down = sse(&inverse_unimodal_project(v).1, v);
    if down < up {
        ShapeConstraint::InverseUnimodal
    } else {
        ShapeConstraint::Unimodal
    }
}

/// Projects `v` onto the constraint's class, resolving `Auto` first.
pub fn project_shape(v: &[f64], constraint: ShapeConstraint) -> Projection {
    let constraint = match constraint {
        ShapeConstraint::Auto => select_shape_auto(v),
        c => c,
    };
    let (values, turning_point) = match constraint {
        ShapeConstraint::Increasing => (isotonic_increasing(v), None),
        ShapeConstraint::Decreasing => (isotonic_decreasing(v), None),
        ShapeConstraint::Unimodal => {
            let (m, f) = unimodal_project(v);
            (f, Some(m))
        }
        ShapeConstraint::InverseUnimodal => {
            let (m, f) = inverse_unimodal_project(v);
            (f, Some(m))
        }
        ShapeConstraint::Auto => unreachable!("resolved above"),
    };
    let sse = sse(&values, v);
    Projection {
        values,
        constraint,
        turning_point,
        sse,
    }
}
