//! Gauss-Hermite rules and their adaptive (mode-centred, curvature-scaled)
//! form for one-dimensional integrals `∫ exp(h(w)) dw`.
//!
//! Rules use the physicists' weight `exp(-a^2)`. Adapting a rule to a
//! log-integrand `h` with mode `μ` and curvature scale
//! `c = (-h''(μ))^{-1/2}` gives
//!
//! ```text
//! ∫ exp(h(w)) dw ≈ √2 c Σ_b u_b exp(a_b² + h(μ + √2 c a_b))
//! ```
//!
//! which is exact whenever `h` is quadratic.

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

pub const MAX_ORDER: usize = 64;
/// Default number of quadrature points.
pub const DEFAULT_ORDER: usize = 5;

const MODE_GRADIENT_TOL: f64 = 1e-10;
const MODE_MAX_ITERS: usize = 100;

/// Gauss-Hermite nodes and weights; nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }
}

/// Roots of the degree-`order` Hermite polynomial and their Christoffel weights.
///
/// Newton iteration on the orthonormal Hermite recurrence, started from the
/// usual asymptotic guesses for the largest roots and extrapolated inward.
pub fn hermite_rule(order: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {order} outside 1..={MAX_ORDER}"
        )));
    }
    let n = order;
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Hermite root {i} of order {order} did not converge"
            )));
        }
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
            // recompute derivative exactly at the centre root
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    let log_weights = w.iter().map(|u: &f64| u.ln()).collect();
    Ok(QuadratureRule {
        nodes: x,
        weights: w,
        log_weights,
    })
}

/// A log-integrand with first and second derivatives.
pub trait LogIntegrand {
    fn value(&self, w: f64) -> f64;
    /// `(h(w), h'(w), h''(w))`.
    fn derivatives(&self, w: f64) -> (f64, f64, f64);
}

/// A base rule recentred at `center` and rescaled by `scale`.
#[derive(Debug, Clone, Copy)]
pub struct AdaptedRule<'r> {
    pub center: f64,
    pub scale: f64,
    pub base: &'r QuadratureRule,
}

impl<'r> AdaptedRule<'r> {
    pub fn new(base: &'r QuadratureRule, center: f64, scale: f64) -> Self {
        AdaptedRule {
            center,
            scale,
            base,
        }
    }

    /// Transformed abscissae `μ + √2 c a_b` paired with the log of their
    /// effective weights `log(√2 c u_b) + a_b²`.
    pub fn abscissae(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let root2c = std::f64::consts::SQRT_2 * self.scale;
        let log_jac = root2c.ln();
        self.base
            .nodes
            .iter()
            .zip(&self.base.log_weights)
            .map(move |(&a, &lu)| (self.center + root2c * a, log_jac + lu + a * a))
    }
}

/// Result of adapting a rule; `fallback` marks a failed mode search.
#[derive(Debug, Clone, Copy)]
pub struct Adaptation<'r> {
    pub rule: AdaptedRule<'r>,
    pub fallback: bool,
}

/// Centres the rule at the mode of `f` and scales it by the local curvature.
///
/// The mode is found by damped Newton ascent from zero. If that does not
/// reach `|h'| < 1e-10` within 100 iterations (or the curvature is not
/// negative) the unadapted rule with centre 0 and `fallback_scale` is
/// returned with `fallback` set.
pub fn adapt<'r, F: LogIntegrand + ?Sized>(
    rule: &'r QuadratureRule,
    f: &F,
    fallback_scale: f64,
) -> Adaptation<'r> {
    let fallback = Adaptation {
        rule: AdaptedRule::new(rule, 0.0, fallback_scale),
        fallback: true,
    };
    let mut w = 0.0_f64;
    for _ in 0..MODE_MAX_ITERS {
        let (v, g, h) = f.derivatives(w);
        if !(v.is_finite() && g.is_finite() && h.is_finite()) || h >= 0.0 {
            return fallback;
        }
        if g.abs() < MODE_GRADIENT_TOL {
            return Adaptation {
                rule: AdaptedRule::new(rule, w, (-h).sqrt().recip()),
                fallback: false,
            };
        }
        let mut step = -g / h;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = w + step;
            // the value test alone stalls once the gain is below rounding
            let (vc, gc, _) = f.derivatives(cand);
            if vc >= v || (vc.is_finite() && gc.abs() < g.abs()) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            // no representable progress left: accept if the gradient is
            // already at rounding level relative to the curvature
            let (_, g, h) = f.derivatives(w);
            if (g / h).abs() <= 1e-12 * (1.0 + w.abs()) {
                return Adaptation {
                    rule: AdaptedRule::new(rule, w, (-h).sqrt().recip()),
                    fallback: false,
                };
            }
            return fallback;
        }
        w += step;
    }
    fallback
}

/// `log ∫ exp(f(w)) dw` under the adapted rule, evaluated with log-sum-exp.
pub fn integrate<F: LogIntegrand + ?Sized>(rule: &AdaptedRule<'_>, f: &F) -> Result<f64> {
    let mut terms = Vec::with_capacity(rule.base.order());
    for (w, lw) in rule.abscissae() {
        let v = f.value(w);
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "log-integrand is {v} at quadrature node w = {w}"
            )));
        }
        terms.push(lw + v);
    }
    Ok(log_sum_exp(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        mean: f64,
        sd: f64,
    }

    impl LogIntegrand for Quadratic {
        fn value(&self, w: f64) -> f64 {
            let z = (w - self.mean) / self.sd;
            -0.5 * z * z - self.sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        }
        fn derivatives(&self, w: f64) -> (f64, f64, f64) {
            let s2 = self.sd * self.sd;
            (self.value(w), -(w - self.mean) / s2, -1.0 / s2)
        }
    }

    /// Γ((m+1)/2) for the Gaussian-weight moment ∫ a^m e^{-a²} da.
    fn hermite_moment(m: usize) -> f64 {
        if m % 2 == 1 {
            return 0.0;
        }
        // Γ(1/2) (1/2)(3/2)...((m-1)/2)
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        for _ in 0..m / 2 {
            g *= x;
            x += 1.0;
        }
        g
    }

    #[test]
    fn small_rules_are_known() {
        let r1 = hermite_rule(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert!((r1.weights()[0] - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        let r2 = hermite_rule(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r2.nodes()[0] + h).abs() < 1e-15 && (r2.nodes()[1] - h).abs() < 1e-15);
        for &u in r2.weights() {
            assert!((u - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
        }
        let r5 = hermite_rule(5).unwrap();
        let m2: f64 = r5
            .nodes()
            .iter()
            .zip(r5.weights())
            .map(|(a, u)| u * a * a)
            .sum();
        assert!((m2 - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn order_out_of_range() {
        assert!(hermite_rule(0).is_err());
        assert!(hermite_rule(65).is_err());
    }

    #[test]
    fn rules_integrate_monomials_exactly() {
        for order in 1..=MAX_ORDER {
            let r = hermite_rule(order).unwrap();
            let total: f64 = r.weights().iter().sum();
            assert!(
                (total - std::f64::consts::PI.sqrt()).abs() < 1e-12,
                "order {order}"
            );
            assert!(r.weights().iter().all(|&u| u > 0.0));
            for (a, b) in r.nodes().iter().zip(r.nodes().iter().rev()) {
                assert_eq!(*a, -*b);
            }
            for m in 0..2 * order {
                let got: f64 = r
                    .nodes()
                    .iter()
                    .zip(r.weights())
                    .map(|(a, u)| u * a.powi(m as i32))
                    .sum();
                let want = hermite_moment(m);
                let scale: f64 = r
                    .nodes()
                    .iter()
                    .zip(r.weights())
                    .map(|(a, u)| u * a.abs().powi(m as i32))
                    .sum();
                let tol = 1e-10 * scale.max(1.0);
                assert!(
                    (got - want).abs() <= tol,
                    "order {order} m {m}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn adapts_to_gaussians() {
        let r = hermite_rule(5).unwrap();
        let a = adapt(&r, &Quadratic { mean: 0.0, sd: 0.3 }, 1.0);
        assert!(!a.fallback);
        assert!(a.rule.center.abs() < 1e-12);
        assert!((a.rule.scale - 0.3).abs() < 1e-12);
        let a = adapt(&r, &Quadratic { mean: 1.0, sd: 1.0 }, 1.0);
        assert!((a.rule.center - 1.0).abs() < 1e-12);
        assert!((a.rule.scale - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_density_integrates_to_one_for_every_order() {
        for order in 1..=20 {
            let r = hermite_rule(order).unwrap();
            for &(mean, sd) in &[(0.0, 0.3), (1.5, 2.0), (-3.0, 0.01)] {
                let f = Quadratic { mean, sd };
                let a = adapt(&r, &f, sd);
                let log_int = integrate(&a.rule, &f).unwrap();
                assert!(log_int.abs() < 1e-12, "order {order}: {log_int}");
            }
        }
    }

    #[test]
    fn non_concave_integrand_falls_back() {
        struct Flat;
        impl LogIntegrand for Flat {
            fn value(&self, _: f64) -> f64 {
                0.0
            }
            fn derivatives(&self, _: f64) -> (f64, f64, f64) {
                (0.0, 1.0, 0.0)
            }
        }
        let r = hermite_rule(3).unwrap();
        let a = adapt(&r, &Flat, 0.7);
        assert!(a.fallback);
        assert_eq!(a.rule.center, 0.0);
        assert_eq!(a.rule.scale, 0.7);
    }

    #[test]
    fn non_finite_node_value_is_rejected() {
        struct Bad;
        impl LogIntegrand for Bad {
            fn value(&self, w: f64) -> f64 {
                if w > 0.5 {
                    f64::NAN
                } else {
                    -w * w
                }
            }
            fn derivatives(&self, w: f64) -> (f64, f64, f64) {
                (self.value(w), -2.0 * w, -2.0)
            }
        }
        let r = hermite_rule(5).unwrap();
        let rule = AdaptedRule::new(&r, 0.0, 1.0);
        assert!(matches!(integrate(&rule, &Bad), Err(Error::Numerical(_))));
    }
}
