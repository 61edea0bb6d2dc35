//! The pseudo-cost trader as a step-by-step state machine.

use serde::{Deserialize, Serialize};

use crate::domain::{snapped_ceil, validate_config, HorizonScenario, MarketConfig, TradeSchedule};
use crate::error::{Error, Result};
use crate::pseudocost::{PhiHatState, PhiState};

/// What the trader itself knows about the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraderMode {
    Known { horizon: usize },
    Notice,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Proactive,
    /// Trading at the maximum rate until `horizon`.
    Forced { horizon: usize },
}

/// Remaining steps minus the steps needed to finish at full rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Laxity(pub i64);

/// `(T - t) - ceil((k_prev - x) / b)`, with near-integer ratios snapped.
pub fn compute_laxity(horizon: usize, t: usize, k_prev: f64, x: f64, b: f64) -> Laxity {
    Laxity(horizon as i64 - t as i64 - snapped_ceil((k_prev - x) / b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cost {
    Phi(PhiState),
    Hat(PhiHatState),
}

impl Cost {
    fn threshold(&self) -> f64 {
        match self {
            Cost::Phi(s) => s.threshold(),
            Cost::Hat(s) => s.threshold(),
        }
    }
}

/// One executed step, kept for diagnostics and property checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub price: f64,
    pub allocation: f64,
    pub proactive: bool,
    /// Pseudo-cost at zero before and after the step.
    pub threshold_before: f64,
    pub threshold_after: f64,
    /// Remaining budget before the step.
    pub remaining_before: f64,
}

#[derive(Debug, Clone)]
pub struct Trader {
    cfg: MarketConfig,
    mode: TraderMode,
    /// Known from the start, or announced by a notice.
    horizon: Option<usize>,
    cost: Cost,
    remaining: f64,
    t: usize,
    phase: Phase,
    notified: bool,
    switch_step: Option<usize>,
    trace: Vec<StepRecord>,
}

impl Trader {
    pub fn new(cfg: MarketConfig, mode: TraderMode, alpha: f64) -> Result<Self> {
        validate_config(&cfg)?;
        if let TraderMode::Known { horizon: 0 } = mode {
            return Err(Error::BadScenario("known horizon must be >= 1".into()));
        }
        let cost = match mode {
            TraderMode::Unknown => Cost::Hat(PhiHatState::new(alpha, cfg.k, cfg.p_min)?),
            _ => Cost::Phi(PhiState::new(alpha, cfg.k, cfg.p_min)?),
        };
        let horizon = match mode {
            TraderMode::Known { horizon } => Some(horizon),
            _ => None,
        };
        Ok(Trader {
            cfg,
            mode,
            horizon,
            cost,
            remaining: cfg.k,
            t: 1,
            phase: Phase::Proactive,
            notified: false,
            switch_step: None,
            trace: Vec::new(),
        })
    }

    pub fn config(&self) -> &MarketConfig {
        &self.cfg
    }

    pub fn remaining(&self) -> f64 {
        self.remaining
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Index of the next step, starting at 1.
    pub fn next_step(&self) -> usize {
        self.t
    }

    pub fn switch_step(&self) -> Option<usize> {
        self.switch_step
    }

    pub fn notified(&self) -> bool {
        self.notified
    }

    pub fn threshold(&self) -> f64 {
        self.cost.threshold()
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    fn forced_amount(&self, horizon: usize) -> f64 {
        let future = self.cfg.b * horizon.saturating_sub(self.t) as f64;
        self.cfg.b.min(self.remaining - future).clamp(0.0, self.remaining)
    }

    fn accept_notice(&mut self, horizon: usize) -> Result<()> {
        if self.mode != TraderMode::Notice {
            return Err(Error::NotifyInWrongMode);
        }
        if self.notified {
            return Err(Error::DoubleNotify);
        }
        let steps_left = horizon as i64 - self.t as i64 + 1;
        if steps_left < 1 || snapped_ceil(self.remaining / self.cfg.b) != steps_left {
            return Err(Error::InconsistentNotify {
                step: self.t,
                horizon,
                remaining: self.remaining,
                rate: self.cfg.b,
            });
        }
        self.notified = true;
        self.horizon = Some(horizon);
        Ok(())
    }

    /// Consumes one price, plus the announced horizon when a notice arrives
    /// at this step, and returns the amount sold. Once the horizon is known
    /// the trader stays proactive while its laxity after the pseudo-cost
    /// trade is non-negative and trades at the full rate afterwards. A notice
    /// that leaves exactly `b` per remaining step therefore forces full-rate
    /// trading from the notice step on.
    pub fn step(&mut self, p: f64, notify: Option<usize>) -> Result<f64> {
        if !self.cfg.contains(p) {
            return Err(Error::PriceOutOfBounds {
                index: self.t - 1,
                value: p,
            });
        }
        if let Some(horizon) = self.horizon {
            if self.t > horizon {
                return Err(Error::StepAfterHorizon {
                    step: self.t,
                    horizon,
                });
            }
        }
        if let Some(h) = notify {
            self.accept_notice(h)?;
        }

        let before = self.cost.threshold();
        let remaining_before = self.remaining;
        let b = self.cfg.b;
        let (alloc, proactive) = match (self.phase, self.cost) {
            (Phase::Forced { horizon }, _) => (self.forced_amount(horizon), false),
            (Phase::Proactive, Cost::Hat(s)) => {
                let x = s.maximizer(p, b);
                self.cost = Cost::Hat(s.commit(x)?);
                (x.min(self.remaining), true)
            }
            (Phase::Proactive, Cost::Phi(s)) => {
                let x = s.maximizer(p, b);
                let switch_to = self.horizon.filter(|&h| {
                    compute_laxity(h, self.t, self.remaining, x, b) < Laxity(0)
                });
                if let Some(horizon) = switch_to {
                    self.phase = Phase::Forced { horizon };
                    self.switch_step = Some(self.t);
                    (self.forced_amount(horizon), false)
                } else {
                    self.cost = Cost::Phi(s.commit(x)?);
                    (x.min(self.remaining), true)
                }
            }
        };

        self.remaining = (self.remaining - alloc).max(0.0);
        self.trace.push(StepRecord {
            price: p,
            allocation: alloc,
            proactive,
            threshold_before: before,
            threshold_after: self.cost.threshold(),
            remaining_before,
        });
        self.t += 1;
        Ok(alloc)
    }

    pub fn schedule(&self) -> TradeSchedule {
        let prices: Vec<f64> = self.trace.iter().map(|r| r.price).collect();
        let alloc = self.trace.iter().map(|r| r.allocation).collect();
        TradeSchedule::from_allocations(&prices, alloc)
    }
}

/// Result of a complete single-trader run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraderRun {
    pub schedule: TradeSchedule,
    pub switch_step: Option<usize>,
    pub notified: bool,
    pub stranded: f64,
    pub trace: Vec<StepRecord>,
    pub warnings: Vec<String>,
}

/// Runs the trader over a whole price sequence. For a notice scenario without
/// an explicit step, the notice arrives at the first step where finishing at
/// the full rate takes all remaining steps up to `horizon`.
pub fn run_trader(
    cfg: &MarketConfig,
    scenario: &HorizonScenario,
    alpha: f64,
    prices: &[f64],
) -> Result<TraderRun> {
    scenario.validate()?;
    let mode = match *scenario {
        HorizonScenario::Known { horizon } => {
            if prices.len() != horizon {
                return Err(Error::HorizonMismatch {
                    expected: horizon,
                    got: prices.len(),
                });
            }
            TraderMode::Known { horizon }
        }
        HorizonScenario::Notice { horizon, .. } => {
            if prices.len() > horizon {
                return Err(Error::HorizonMismatch {
                    expected: horizon,
                    got: prices.len(),
                });
            }
            TraderMode::Notice
        }
        HorizonScenario::Unknown => TraderMode::Unknown,
        HorizonScenario::Prediction { .. } => {
            return Err(Error::BadScenario(
                "prediction scenarios run through the augmented trader".into(),
            ))
        }
    };
    let mut trader = Trader::new(*cfg, mode, alpha)?;
    for &p in prices {
        let notify = match *scenario {
            HorizonScenario::Notice {
                notify_step: Some(s),
                horizon,
            } if s == trader.next_step() => Some(horizon),
            HorizonScenario::Notice {
                notify_step: None,
                horizon,
            } if !trader.notified() && trader.remaining() > 0.0 => {
                let steps_left = horizon as i64 - trader.next_step() as i64 + 1;
                let needed = snapped_ceil(trader.remaining() / cfg.b);
                if needed == steps_left {
                    Some(horizon)
                } else if needed > steps_left {
                    return Err(Error::InfeasibleHorizon {
                        budget: cfg.k,
                        rate: cfg.b,
                        horizon,
                    });
                } else {
                    None
                }
            }
            _ => None,
        };
        trader.step(p, notify)?;
    }
    let mut warnings = Vec::new();
    if let HorizonScenario::Notice { .. } = scenario {
        if !trader.notified() && trader.remaining() > 0.0 {
            warnings.push(format!(
                "notice never arrived; {} units left unsold",
                trader.remaining()
            ));
        }
    }
    Ok(TraderRun {
        schedule: trader.schedule(),
        switch_step: trader.switch_step(),
        notified: trader.notified(),
        stranded: trader.remaining(),
        trace: trader.trace,
        warnings,
    })
}
