//! Prediction-augmented trader: a known-horizon trader on the `(1 - lambda)`
//! share against the predicted horizon, plus an unknown-horizon trader on the
//! `lambda` share.

use serde::{Deserialize, Serialize};

use crate::domain::{validate_config, MarketConfig, TradeSchedule, BUDGET_SLACK};
use crate::error::{Error, Result};
use crate::ratios::{alpha_known_auto, cr_unknown};
use crate::trader::{Trader, TraderMode};

#[derive(Debug, Clone)]
pub struct AugmentedTrader {
    cfg: MarketConfig,
    known: Option<Trader>,
    unknown: Option<Trader>,
    lambda: f64,
    predicted: usize,
    t: usize,
}

fn share(cfg: &MarketConfig, frac: f64) -> Option<MarketConfig> {
    (frac > 0.0).then_some(MarketConfig {
        k: cfg.k * frac,
        b: cfg.b * frac,
        ..*cfg
    })
}

/// Default balances: the known-horizon ratio of the `(1 - lambda)` share at
/// the predicted horizon, and `1 + ln theta`.
pub fn default_alphas(cfg: &MarketConfig, predicted: usize, lambda: f64) -> Result<(f64, f64)> {
    let theta = cfg.theta();
    let alpha2 = cr_unknown(theta)?;
    let alpha1 = match share(cfg, 1.0 - lambda) {
        Some(c1) => alpha_known_auto(theta, predicted, c1.k, c1.b)?,
        None => alpha_known_auto(theta, predicted, cfg.k, cfg.b)?,
    };
    Ok((alpha1, alpha2))
}

impl AugmentedTrader {
    pub fn new(
        cfg: MarketConfig,
        predicted: usize,
        lambda: f64,
        alpha1: f64,
        alpha2: f64,
    ) -> Result<Self> {
        validate_config(&cfg)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::BadLambda(lambda));
        }
        for a in [alpha1, alpha2] {
            if !(a >= 1.0) || !a.is_finite() {
                return Err(Error::BadAlpha(a));
            }
        }
        if predicted == 0 {
            return Err(Error::BadScenario("predicted horizon must be >= 1".into()));
        }
        let known = share(&cfg, 1.0 - lambda)
            .map(|c| Trader::new(c, TraderMode::Known { horizon: predicted }, alpha1))
            .transpose()?;
        let unknown = share(&cfg, lambda)
            .map(|c| Trader::new(c, TraderMode::Unknown, alpha2))
            .transpose()?;
        Ok(AugmentedTrader {
            cfg,
            known,
            unknown,
            lambda,
            predicted,
            t: 1,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn predicted(&self) -> usize {
        self.predicted
    }

    /// Returns the combined allocation and its two parts.
    pub fn step(&mut self, p: f64) -> Result<(f64, f64, f64)> {
        if !self.cfg.contains(p) {
            return Err(Error::PriceOutOfBounds {
                index: self.t - 1,
                value: p,
            });
        }
        let x1 = match self.known.as_mut() {
            Some(tr) if self.t <= self.predicted => tr.step(p, None)?,
            _ => 0.0,
        };
        let x2 = match self.unknown.as_mut() {
            Some(tr) => tr.step(p, None)?,
            None => 0.0,
        };
        let total = x1 + x2;
        debug_assert!(total <= self.cfg.b + BUDGET_SLACK);
        self.t += 1;
        Ok((total, x1, x2))
    }

    pub fn stranded(&self) -> (f64, f64) {
        (
            self.known.as_ref().map_or(0.0, Trader::remaining),
            self.unknown.as_ref().map_or(0.0, Trader::remaining),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedRun {
    pub schedule: TradeSchedule,
    pub known_part: Vec<f64>,
    pub unknown_part: Vec<f64>,
    pub stranded_known: f64,
    pub stranded_unknown: f64,
}

pub fn run_augmented(
    cfg: &MarketConfig,
    predicted: usize,
    lambda: f64,
    alpha1: f64,
    alpha2: f64,
    prices: &[f64],
) -> Result<AugmentedRun> {
    let mut tr = AugmentedTrader::new(*cfg, predicted, lambda, alpha1, alpha2)?;
    let mut total = Vec::with_capacity(prices.len());
    let mut known_part = Vec::with_capacity(prices.len());
    let mut unknown_part = Vec::with_capacity(prices.len());
    for &p in prices {
        let (x, x1, x2) = tr.step(p)?;
        total.push(x);
        known_part.push(x1);
        unknown_part.push(x2);
    }
    let (stranded_known, stranded_unknown) = tr.stranded();
    Ok(AugmentedRun {
        schedule: TradeSchedule::from_allocations(prices, total),
        known_part,
        unknown_part,
        stranded_known,
        stranded_unknown,
    })
}
