//! Value types shared by the traders, the oracle and the harness.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack on budget sums and per-step caps.
pub const BUDGET_SLACK: f64 = 1e-9;

/// Ratios within this distance of an integer are snapped before a ceiling.
pub const SNAP_TOL: f64 = 1e-9;

/// `ceil(r)` after snapping `r` to the nearest integer when it is within
/// [`SNAP_TOL`] of it.
pub fn snapped_ceil(r: f64) -> i64 {
    let nearest = r.round();
    if (r - nearest).abs() <= SNAP_TOL {
        nearest as i64
    } else {
        r.ceil() as i64
    }
}

/// Budget, per-step rate limit and price support of one conversion problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub k: f64,
    pub b: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl MarketConfig {
    pub fn new(k: f64, b: f64, p_min: f64, p_max: f64) -> Result<Self> {
        let cfg = MarketConfig { k, b, p_min, p_max };
        validate_config(&cfg)?;
        Ok(cfg)
    }

    /// Price fluctuation ratio `p_max / p_min`.
    pub fn theta(&self) -> f64 {
        self.p_max / self.p_min
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.p_min && p <= self.p_max
    }
}

pub fn validate_config(cfg: &MarketConfig) -> Result<()> {
    if !(cfg.k > 0.0) || !cfg.k.is_finite() {
        return Err(Error::NonPositiveBudget(cfg.k));
    }
    if !(cfg.b > 0.0) || cfg.b.is_nan() {
        return Err(Error::NonPositiveRate(cfg.b));
    }
    if !(cfg.p_min > 0.0) || !(cfg.p_max >= cfg.p_min) || !cfg.p_max.is_finite() {
        return Err(Error::BadPriceBounds {
            p_min: cfg.p_min,
            p_max: cfg.p_max,
        });
    }
    Ok(())
}

/// Where the rate limit sits relative to `k / T` and `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoxClass {
    /// `b <= k / T`: every step must trade at the full rate.
    TrivialForced,
    /// `k / T < b < k`.
    NonTrivial,
    /// `b >= k`: the rate limit never binds.
    TrivialUnbounded,
}

impl fmt::Display for BoxClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoxClass::TrivialForced => "trivial-forced",
            BoxClass::NonTrivial => "non-trivial",
            BoxClass::TrivialUnbounded => "trivial-unbounded",
        };
        f.write_str(s)
    }
}

/// Classifies the rate limit for a horizon of `horizon` steps. Both
/// boundaries belong to the trivial classes.
pub fn classify_box(cfg: &MarketConfig, horizon: usize) -> BoxClass {
    let steps_needed = cfg.k / cfg.b;
    let nearest = steps_needed.round();
    let snapped = if (steps_needed - nearest).abs() <= SNAP_TOL {
        nearest
    } else {
        steps_needed
    };
    if snapped <= 1.0 {
        BoxClass::TrivialUnbounded
    } else if snapped >= horizon as f64 {
        BoxClass::TrivialForced
    } else {
        BoxClass::NonTrivial
    }
}

/// A non-empty list of per-unit prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceSequence(Vec<f64>);

impl PriceSequence {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::EmptyPrices);
        }
        Ok(PriceSequence(prices))
    }

    /// Builds the sequence and checks every price against `cfg`.
    pub fn checked(cfg: &MarketConfig, prices: Vec<f64>) -> Result<Self> {
        validate_prices(cfg, &prices)?;
        Self::new(prices)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PriceSequence {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Rejects the first price outside `[p_min, p_max]`. Prices are never clamped.
pub fn validate_prices(cfg: &MarketConfig, prices: &[f64]) -> Result<()> {
    match prices.iter().position(|&p| !cfg.contains(p)) {
        Some(index) => Err(Error::PriceOutOfBounds {
            index,
            value: prices[index],
        }),
        None => Ok(()),
    }
}

/// The horizon-uncertainty model in force for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HorizonScenario {
    Known {
        horizon: usize,
    },
    /// `notify_step = None` lets the environment notify at the zero-laxity
    /// step implied by `horizon`.
    Notice {
        notify_step: Option<usize>,
        horizon: usize,
    },
    Unknown,
    Prediction {
        predicted: usize,
        lambda: f64,
    },
}

impl HorizonScenario {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HorizonScenario::Known { horizon: 0 } => {
                Err(Error::BadScenario("known horizon must be >= 1".into()))
            }
            HorizonScenario::Notice {
                notify_step: Some(s),
                horizon,
            } if s == 0 || s > horizon => Err(Error::BadScenario(format!(
                "notify step {s} must lie in [1, {horizon}]"
            ))),
            HorizonScenario::Notice { horizon: 0, .. } => {
                Err(Error::BadScenario("notice horizon must be >= 1".into()))
            }
            HorizonScenario::Prediction { lambda, .. } if !(0.0..=1.0).contains(&lambda) => {
                Err(Error::BadLambda(lambda))
            }
            HorizonScenario::Prediction { predicted: 0, .. } => {
                Err(Error::BadScenario("predicted horizon must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            HorizonScenario::Known { .. } => "known",
            HorizonScenario::Notice { .. } => "notice",
            HorizonScenario::Unknown => "unknown",
            HorizonScenario::Prediction { .. } => "prediction",
        }
    }
}

/// Per-step allocations of one run and the revenue they earn.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TradeSchedule {
    pub allocations: Vec<f64>,
    pub revenue: f64,
}

impl TradeSchedule {
    pub fn from_allocations(prices: &[f64], allocations: Vec<f64>) -> Self {
        let revenue = prices.iter().zip(&allocations).map(|(p, x)| p * x).sum();
        TradeSchedule {
            allocations,
            revenue,
        }
    }

    pub fn total(&self) -> f64 {
        self.allocations.iter().sum()
    }

    /// Checks `0 <= x_t <= b` and `sum x_t <= k`, both with [`BUDGET_SLACK`].
    pub fn check(&self, cfg: &MarketConfig) -> Result<()> {
        for &x in &self.allocations {
            if !(x >= -BUDGET_SLACK) || x > cfg.b + BUDGET_SLACK {
                return Err(Error::BudgetExceeded {
                    requested: x,
                    available: cfg.b,
                });
            }
        }
        let total = self.total();
        if total > cfg.k + BUDGET_SLACK {
            return Err(Error::BudgetExceeded {
                requested: total,
                available: cfg.k,
            });
        }
        Ok(())
    }
}
