//! The two pseudo-cost families and their per-step pseudo-revenue maximizers.
//!
//! `PhiState` is the history-product family used when the horizon is known or
//! will be announced; `PhiHatState` is the cumulative-amount family used when
//! the horizon is unknown. Integrals are in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// History-adaptive pseudo-cost
/// `phi(beta) = p_min + (alpha - 1) p_min / ((1 - alpha beta / k) * H)`
/// where `H` is the product of `(1 - alpha x_i / k)` over committed trades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiState {
    pub alpha: f64,
    pub k: f64,
    pub p_min: f64,
    pub hist_product: f64,
}

impl PhiState {
    pub fn new(alpha: f64, k: f64, p_min: f64) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::BadAlpha(alpha));
        }
        Ok(PhiState {
            alpha,
            k,
            p_min,
            hist_product: 1.0,
        })
    }

    fn flat(&self) -> bool {
        self.alpha == 1.0
    }

    fn check_pole(&self, beta: f64) -> Result<()> {
        let z = self.alpha * beta / self.k;
        if !self.flat() && z >= 1.0 {
            return Err(Error::SingularEvaluation(z));
        }
        Ok(())
    }

    /// Pseudo-cost at an additional amount `beta` within the current step.
    pub fn eval(&self, beta: f64) -> Result<f64> {
        self.check_pole(beta)?;
        if self.flat() {
            return Ok(self.p_min);
        }
        let z = 1.0 - self.alpha * beta / self.k;
        Ok(self.p_min + (self.alpha - 1.0) * self.p_min / (z * self.hist_product))
    }

    /// `phi(0)`: the price above which the trader starts selling.
    pub fn threshold(&self) -> f64 {
        if self.flat() {
            self.p_min
        } else {
            self.p_min + (self.alpha - 1.0) * self.p_min / self.hist_product
        }
    }

    /// Appends a trade of `x` to the history. With `alpha = 1` the pseudo-cost
    /// is identically `p_min` and the product is left untouched.
    pub fn commit(&self, x: f64) -> Result<PhiState> {
        self.check_pole(x)?;
        let mut next = *self;
        if !self.flat() {
            next.hist_product *= 1.0 - self.alpha * x / self.k;
        }
        Ok(next)
    }

    /// `integral_0^x phi(beta) d beta`.
    pub fn integral(&self, x: f64) -> Result<f64> {
        self.check_pole(x)?;
        if self.flat() {
            return Ok(self.p_min * x);
        }
        let a = self.alpha;
        let log_term = (-a * x / self.k).ln_1p();
        Ok(self.p_min * x
            - (a - 1.0) * self.p_min / self.hist_product * (self.k / a) * log_term)
    }

    /// Pseudo-revenue `p x - integral_0^x phi`.
    pub fn pseudo_revenue(&self, p: f64, x: f64) -> Result<f64> {
        Ok(p * x - self.integral(x)?)
    }

    /// Maximizer of the pseudo-revenue over `[0, cap]`.
    pub fn maximizer(&self, p: f64, cap: f64) -> f64 {
        let phi0 = self.threshold();
        if p <= phi0 {
            return 0.0;
        }
        let x = (self.k / self.alpha) * (1.0 - (phi0 - self.p_min) / (p - self.p_min));
        x.clamp(0.0, cap.max(0.0))
    }
}

/// Unknown-horizon pseudo-cost as a function of the cumulative amount
/// `u = c + beta`: `p_min` up to `k / alpha`, then `p_min exp(alpha u / k - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiHatState {
    pub alpha: f64,
    pub k: f64,
    pub p_min: f64,
    pub traded: f64,
}

impl PhiHatState {
    pub fn new(alpha: f64, k: f64, p_min: f64) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::BadAlpha(alpha));
        }
        Ok(PhiHatState {
            alpha,
            k,
            p_min,
            traded: 0.0,
        })
    }

    fn knee(&self) -> f64 {
        self.k / self.alpha
    }

    fn level(&self, u: f64) -> f64 {
        if u <= self.knee() {
            self.p_min
        } else {
            self.p_min * (self.alpha * u / self.k - 1.0).exp()
        }
    }

    /// Antiderivative of the level curve in `u`, zero at `u = 0`.
    fn antiderivative(&self, u: f64) -> f64 {
        let knee = self.knee();
        if u <= knee {
            self.p_min * u
        } else {
            self.p_min * knee + self.p_min * knee * (self.alpha * u / self.k - 1.0).exp_m1()
        }
    }

    fn room(&self) -> f64 {
        (self.k - self.traded).max(0.0)
    }

    fn check_room(&self, beta: f64) -> Result<()> {
        if beta > self.room() + crate::domain::BUDGET_SLACK {
            return Err(Error::BudgetExceeded {
                requested: beta,
                available: self.room(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, beta: f64) -> Result<f64> {
        self.check_room(beta)?;
        Ok(self.level(self.traded + beta))
    }

    pub fn threshold(&self) -> f64 {
        self.level(self.traded)
    }

    /// `integral_0^x phi_hat(beta) d beta`, split at the knee when crossed.
    pub fn integral(&self, x: f64) -> Result<f64> {
        self.check_room(x)?;
        Ok(self.antiderivative(self.traded + x) - self.antiderivative(self.traded))
    }

    pub fn pseudo_revenue(&self, p: f64, x: f64) -> Result<f64> {
        Ok(p * x - self.integral(x)?)
    }

    /// Maximizer over `[0, min(cap, k - c)]`. At `p = p_min` the objective is
    /// flat below the knee and the largest such amount is returned.
    pub fn maximizer(&self, p: f64, cap: f64) -> f64 {
        let target = if p <= self.p_min {
            self.knee()
        } else {
            (self.knee() * (1.0 + (p / self.p_min).ln())).min(self.k)
        };
        (target - self.traded).clamp(0.0, cap.max(0.0).min(self.room()))
    }

    pub fn commit(&self, x: f64) -> Result<PhiHatState> {
        self.check_room(x)?;
        let mut next = *self;
        next.traded = (self.traded + x).min(self.k);
        Ok(next)
    }
}
