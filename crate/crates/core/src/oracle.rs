//! Offline optimum of the conversion LP.

use crate::domain::{MarketConfig, TradeSchedule, SNAP_TOL};
use crate::error::{Error, Result};

/// Per-step allocation caps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepBounds(pub Vec<f64>);

impl StepBounds {
    pub fn uniform(cap: f64, len: usize) -> Self {
        StepBounds(vec![cap; len])
    }

    /// `(b, ..., b, k)`: the caps of the reduced problem for a switching step
    /// at the last index.
    pub fn reduced(cfg: &MarketConfig, len: usize) -> Self {
        let mut caps = vec![cfg.b; len];
        if let Some(last) = caps.last_mut() {
            *last = cfg.k;
        }
        StepBounds(caps)
    }
}

/// Fills steps in order of decreasing price (earlier index first on ties)
/// up to each cap until the budget is spent.
pub fn greedy_with_caps(budget: f64, prices: &[f64], caps: &StepBounds) -> TradeSchedule {
    assert_eq!(prices.len(), caps.0.len(), "one cap per price");
    let mut order: Vec<usize> = (0..prices.len()).collect();
    order.sort_by(|&i, &j| prices[j].total_cmp(&prices[i]).then(i.cmp(&j)));
    let mut left = budget;
    let mut alloc = vec![0.0; prices.len()];
    for i in order {
        if left <= 0.0 {
            break;
        }
        let x = caps.0[i].max(0.0).min(left);
        alloc[i] = x;
        left -= x;
    }
    TradeSchedule::from_allocations(prices, alloc)
}

/// Optimal offline schedule.
pub fn opt_offline(cfg: &MarketConfig, prices: &[f64]) -> TradeSchedule {
    greedy_with_caps(cfg.k, prices, &StepBounds::uniform(cfg.b, prices.len()))
}

/// Optimum of the reduced problem whose last step may absorb the whole budget.
pub fn opt_reduced(cfg: &MarketConfig, prices: &[f64]) -> TradeSchedule {
    greedy_with_caps(cfg.k, prices, &StepBounds::reduced(cfg, prices.len()))
}

pub const BRUTEFORCE_MAX_STEPS: usize = 8;
pub const BRUTEFORCE_MAX_UNITS: f64 = 64.0;

fn grid_units(amount: f64, grid: f64) -> usize {
    let r = amount / grid;
    let n = r.round();
    if (r - n).abs() <= SNAP_TOL {
        n as usize
    } else {
        r.floor() as usize
    }
}

/// Best revenue over all allocations that are multiples of `grid`, found by
/// exhaustive dynamic programming over (step, units used).
pub fn opt_bruteforce(cfg: &MarketConfig, prices: &[f64], grid: f64) -> Result<f64> {
    if prices.len() > BRUTEFORCE_MAX_STEPS {
        return Err(Error::TooLarge(format!(
            "{} steps (limit {BRUTEFORCE_MAX_STEPS})",
            prices.len()
        )));
    }
    if !(grid > 0.0) || cfg.k / grid > BRUTEFORCE_MAX_UNITS * (1.0 + SNAP_TOL) {
        return Err(Error::TooLarge(format!(
            "grid {grid} is finer than k/{BRUTEFORCE_MAX_UNITS}"
        )));
    }
    let budget = grid_units(cfg.k, grid);
    let per_step = grid_units(cfg.b, grid).min(budget);
    // best[j]: best revenue using exactly j units so far
    let mut best = vec![f64::NEG_INFINITY; budget + 1];
    best[0] = 0.0;
    for &p in prices {
        let mut next = best.clone();
        for used in 0..=budget {
            if best[used] == f64::NEG_INFINITY {
                continue;
            }
            for x in 1..=per_step.min(budget - used) {
                let v = best[used] + p * grid * x as f64;
                if v > next[used + x] {
                    next[used + x] = v;
                }
            }
        }
        best = next;
    }
    Ok(best.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
