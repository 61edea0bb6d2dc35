//! Closed-form and root-solved competitive ratios.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::snapped_ceil;
use crate::error::{Error, Result};

/// A ratio that may be unbounded. Serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() {
            Ratio::Infinite
        } else {
            Ratio::Finite(v)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(v) => s.serialize_f64(*v),
            Ratio::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ratio::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(Ratio::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad ratio {t:?}"))),
        }
    }
}

const INV_E: f64 = 1.0 / std::f64::consts::E;

/// Principal branch of the Lambert W function.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E {
        return Err(Error::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == -INV_E {
        return Ok(-1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = if x < -0.25 {
        // series around the branch point
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        (1.0 + x).ln() * 0.75
    } else {
        let l = x.ln();
        l - l.ln()
    };

    // bracket for the bisection fallback
    let (mut lo, mut hi): (f64, f64) = if x < 0.0 {
        (-1.0, 0.0)
    } else {
        (0.0, x.ln().max(1.0))
    };
    let f = |w: f64| w * w.exp() - x;

    for _ in 0..100 {
        let ew = w.exp();
        let fw = w * ew - x;
        if fw > 0.0 {
            hi = hi.min(w);
        } else {
            lo = lo.max(w);
        }
        let wp1 = w + 1.0;
        // Halley step
        let denom = ew * wp1 - (w + 2.0) * fw / (2.0 * wp1);
        let mut next = w - fw / denom;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 1e-16 * (1.0 + next.abs()) {
            w = next;
            break;
        }
        w = next;
    }
    // polish against the tolerance of the residual
    if f(w).abs() > 1e-12 * x.abs().max(1e-300) && x.abs() > 1e-300 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= f64::EPSILON * mid.abs().max(1e-300) {
                break;
            }
        }
        w = 0.5 * (lo + hi);
    }
    Ok(w)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 1.0) || !theta.is_finite() {
        return Err(Error::BadTheta(theta));
    }
    Ok(())
}

/// `1 + ln theta`.
pub fn cr_unknown(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(1.0 + theta.ln())
}

/// `1 + W0((theta - 1) / e)`.
pub fn cr_notice(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(1.0);
    }
    Ok(1.0 + lambert_w0((theta - 1.0) / std::f64::consts::E)?)
}

/// Right-hand side of `alpha = tau (1 - ((alpha - 1)/(theta - 1))^(1/tau))`.
pub fn alpha_tau_rhs(theta: f64, tau: usize, alpha: f64) -> f64 {
    let q = (alpha - 1.0) / (theta - 1.0);
    if q <= 0.0 {
        return tau as f64;
    }
    let tau = tau as f64;
    -(q.ln() / tau).exp_m1() * tau
}

const BISECTION_CAP: usize = 200;

/// Root in `[1, theta]` of the horizon-`tau` ratio equation, by bisection.
pub fn alpha_tau(theta: f64, tau: usize) -> Result<f64> {
    check_theta(theta)?;
    if tau == 0 {
        return Err(Error::BadScenario("tau must be >= 1".into()));
    }
    if theta == 1.0 || tau == 1 {
        return Ok(1.0);
    }
    // g(alpha) = rhs - alpha is positive just above 1 and negative at theta.
    let g = |a: f64| alpha_tau_rhs(theta, tau, a) - a;
    let mut lo = 1.0;
    let mut hi = theta;
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= 1e-12 * hi {
        Ok(mid)
    } else {
        Err(Error::NoConvergence(BISECTION_CAP))
    }
}

/// Earliest possible switching step.
pub fn tau_min(horizon: usize, k: f64, b: f64) -> usize {
    let steps = snapped_ceil(k / b);
    if steps >= horizon as i64 {
        1
    } else if steps <= 1 {
        horizon
    } else {
        (horizon as i64 - steps + 1) as usize
    }
}

/// Box-constrained known-horizon ratio; `1` when every step is forced.
pub fn cr_known(theta: f64, horizon: usize, k: f64, b: f64) -> Result<f64> {
    check_theta(theta)?;
    if horizon == 0 || b * (horizon as f64) < k * (1.0 - 1e-12) {
        return Err(Error::InfeasibleHorizon {
            budget: k,
            rate: b,
            horizon,
        });
    }
    alpha_tau(theta, tau_min(horizon, k, b))
}

/// Known-horizon ratio ignoring the rate limit.
pub fn cr_known_no_box(theta: f64, horizon: usize) -> Result<f64> {
    alpha_tau(theta, horizon)
}

/// Known-horizon ratio used for automatic `alpha`: [`cr_known`], with `1`
/// for instances where the rate limit cannot place the whole budget.
pub fn alpha_known_auto(theta: f64, horizon: usize, k: f64, b: f64) -> Result<f64> {
    match cr_known(theta, horizon, k, b) {
        Err(Error::InfeasibleHorizon { .. }) => {
            check_theta(theta)?;
            Ok(1.0)
        }
        other => other,
    }
}

/// Consistency and robustness of the prediction-augmented trader.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentedBounds {
    pub consistency: f64,
    pub robustness: Ratio,
}

/// Bounds for explicit sub-trader balances `alpha1` and `alpha2`.
pub fn bounds_from_alphas(alpha1: f64, alpha2: f64, lambda: f64) -> Result<AugmentedBounds> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::BadLambda(lambda));
    }
    let consistency = alpha1 * alpha2 / (alpha2 + lambda * (alpha1 - alpha2));
    let robustness = if lambda == 0.0 {
        Ratio::Infinite
    } else {
        Ratio::Finite(alpha2 / lambda)
    };
    Ok(AugmentedBounds {
        consistency,
        robustness,
    })
}

/// Bounds with the default balances: the known-horizon ratio of the
/// `(1 - lambda)` share at the predicted horizon, and `1 + ln theta`.
pub fn bounds_augmented(
    theta: f64,
    predicted: usize,
    k: f64,
    b: f64,
    lambda: f64,
) -> Result<AugmentedBounds> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::BadLambda(lambda));
    }
    let alpha1 = cr_known(theta, predicted, k, b)?;
    bounds_from_alphas(alpha1, cr_unknown(theta)?, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        let omega = lambert_w0(1.0).unwrap();
        assert!((omega - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((omega * omega.exp() - 1.0).abs() < 1e-14);
        assert!(matches!(lambert_w0(-0.5), Err(Error::LambertDomain(_))));
        assert_eq!(lambert_w0(-INV_E).unwrap(), -1.0);
    }

    #[test]
    fn lambert_identity_on_log_grid() {
        let n = 1000;
        let lo = -INV_E + 1e-6;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            // half the points on the negative side, half log-spaced up to 1e6
            let x = if i < n / 2 {
                lo + (i as f64 / (n / 2) as f64) * (-lo)
            } else {
                10f64.powf(-8.0 + 14.0 * (i - n / 2) as f64 / (n / 2 - 1) as f64)
            };
            let w = lambert_w0(x).unwrap();
            let res = (w * w.exp() - x).abs();
            assert!(res <= 1e-12 * x.abs().max(1.0), "x={x} w={w} res={res}");
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn unknown_and_notice_examples() {
        assert_eq!(cr_unknown(1.0).unwrap(), 1.0);
        assert_eq!(cr_unknown(E * E).unwrap(), 3.0);
        assert!((cr_unknown(200.0).unwrap() - 6.298_317_366_548_036).abs() < 1e-12);
        assert_eq!(cr_notice(1.0).unwrap(), 1.0);
        assert!((cr_notice(E * E + 1.0).unwrap() - 2.0).abs() < 1e-12);
        let n = cr_notice(100.0).unwrap();
        assert!(n > 1.0 && n < 1.0 + 100f64.ln());
        let w = n - 1.0;
        assert!((w * w.exp() - 99.0 / E).abs() < 1e-12);
        assert!(matches!(cr_unknown(0.5), Err(Error::BadTheta(_))));
    }

    #[test]
    fn alpha_tau_examples() {
        assert_eq!(alpha_tau(50.0, 1).unwrap(), 1.0);
        assert_eq!(alpha_tau(1.0, 7).unwrap(), 1.0);
        let a = alpha_tau(100.0, 20).unwrap();
        assert!(a > 1.0 && a < 1.0 + 100f64.ln());
        assert!((alpha_tau_rhs(100.0, 20, a) - a).abs() < 1e-10);
    }

    #[test]
    fn alpha_tau_two_steps_closed_form() {
        // tau = 2: alpha = 2 - 2 sqrt(q) has the explicit root below.
        let theta: f64 = 10.0;
        let s = 1.0 / (theta - 1.0);
        let r = (-(2.0 * s.sqrt()) + (4.0 * s + 4.0).sqrt()) / 2.0;
        let expected = 1.0 + r * r;
        assert!((alpha_tau(theta, 2).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn tau_min_and_known_examples() {
        assert_eq!(tau_min(6, 12.0, 3.0), 3);
        assert_eq!(tau_min(6, 12.0, 2.0), 1);
        assert_eq!(tau_min(6, 12.0, 12.0), 6);
        assert_eq!(cr_known(100.0, 1, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(cr_known(100.0, 6, 12.0, 2.0).unwrap(), 1.0);
        assert_eq!(
            cr_known(100.0, 20, 12.0, 5.0).unwrap(),
            alpha_tau(100.0, 18).unwrap()
        );
        assert_eq!(
            cr_known(100.0, 20, 12.0, 12.0).unwrap(),
            alpha_tau(100.0, 20).unwrap()
        );
        assert!(matches!(
            cr_known(100.0, 6, 12.0, 1.0),
            Err(Error::InfeasibleHorizon { .. })
        ));
        assert_eq!(alpha_known_auto(100.0, 6, 12.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn augmented_bound_examples() {
        let t: f64 = 50.0;
        let a2 = 1.0 + t.ln();
        let one = bounds_augmented(t, 10, 5.0, 1.0, 1.0).unwrap();
        assert!((one.consistency - a2).abs() < 1e-12);
        assert_eq!(one.robustness, Ratio::Finite(a2));
        let zero = bounds_augmented(t, 10, 5.0, 1.0, 0.0).unwrap();
        assert_eq!(zero.consistency, cr_known(t, 10, 5.0, 1.0).unwrap());
        assert_eq!(zero.robustness, Ratio::Infinite);
        let half = bounds_augmented(E, 10, 5.0, 1.0, 0.5).unwrap();
        assert!((half.robustness.as_f64() - 4.0).abs() < 1e-12);
        assert!(matches!(
            bounds_augmented(t, 10, 5.0, 1.0, 1.2),
            Err(Error::BadLambda(_))
        ));
    }

    #[test]
    fn ratio_serialization() {
        assert_eq!(serde_json::to_string(&Ratio::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Ratio::Finite(2.5)).unwrap(), "2.5");
        let back: Ratio = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(back, Ratio::Infinite);
    }

    proptest! {
        #[test]
        fn ratio_chain_is_ordered(theta in 1.0f64..500.0, horizon in 1usize..200,
                                  bf in 0.0f64..1.5) {
            let k = 10.0;
            let b = (k / horizon as f64) * (1.0 + bf * horizon as f64);
            let known = cr_known(theta, horizon, k, b).unwrap();
            let free = cr_known_no_box(theta, horizon).unwrap();
            let notice = cr_notice(theta).unwrap();
            let unknown = cr_unknown(theta).unwrap();
            prop_assert!(1.0 <= known + 1e-9);
            prop_assert!(known <= free + 1e-9);
            prop_assert!(free <= notice + 1e-9);
            prop_assert!(notice <= unknown + 1e-9);
        }

        #[test]
        fn roots_leave_small_residuals(theta in 1.001f64..1000.0, tau in 1usize..5000) {
            let a = alpha_tau(theta, tau).unwrap();
            prop_assert!((alpha_tau_rhs(theta, tau, a) - a).abs() < 1e-10);
        }

        #[test]
        fn ratios_grow_with_theta(t1 in 1.0f64..300.0, dt in 0.0f64..300.0, tau in 1usize..100) {
            let t2 = t1 + dt;
            prop_assert!(alpha_tau(t1, tau).unwrap() <= alpha_tau(t2, tau).unwrap() + 1e-12);
            prop_assert!(cr_notice(t1).unwrap() <= cr_notice(t2).unwrap() + 1e-12);
            prop_assert!(cr_unknown(t1).unwrap() <= cr_unknown(t2).unwrap());
        }
    }
}
