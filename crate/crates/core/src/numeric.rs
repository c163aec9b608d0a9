//! Small numerically careful helpers shared by the likelihood code.

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Inverse of the logit link.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `log Σ exp(x_i)`; returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// Neumaier-compensated sum. Summation order still matters for the last bit,
/// so callers that need schedule independence feed values in a fixed order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Running mean `m += (x - m) / k`.
///
/// Used wherever a group average is reported, so that averages of short
/// decimal runs such as `(0.1, 0.2, 0.3)` come out as the nearest double.
pub fn running_mean(xs: &[f64]) -> f64 {
    let mut m = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        m += (x - m) / (k as f64 + 1.0);
    }
    m
}
