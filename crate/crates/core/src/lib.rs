//! Online conversion of a budget of divisible resource under price bounds,
//! a per-step rate limit and several kinds of horizon uncertainty.
//!
//! The [`trader`] module sells with a pseudo-cost threshold; [`augmented`]
//! combines two traders around a predicted horizon. [`oracle`] computes the
//! offline optimum, [`ratios`] the matching worst-case ratios, and
//! [`harness`] measures empirical ratios over generated or loaded prices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augmented;
pub mod cli;
pub mod domain;
pub mod error;
pub mod harness;
pub mod instances;
pub mod oracle;
pub mod pseudocost;
pub mod ratios;
pub mod trader;

pub use domain::{BoxClass, HorizonScenario, MarketConfig, PriceSequence, TradeSchedule};
pub use error::{Error, Result};
