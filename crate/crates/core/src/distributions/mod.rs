//! Primitive samplers, Poisson point processes on the line, Poisson-Dirichlet
//! stick-breaking and the closed-form constants attached to it.

mod moments;
mod ppp;
mod samplers;
mod stick;

pub use moments::{
    mittag_leffler_moment, phi_moment, phi_moment_simplified, psi_alpha, residual_moment, sigma_mean,
};
pub use ppp::{
    sample_ppp_above, sample_ppp_above_capped, sample_ppp_band, sample_ppp_top_k,
    tail_weight_bound, PppSample, DEFAULT_MAX_ATOMS,
};
pub(crate) use ppp::{ppp_band_into, top_k_into as ppp_top_k_into};
pub use samplers::{poisson, sample_beta, sample_log_beta, sample_log_gamma};
pub use stick::{size_biased_log_weights, stick_breaking, StickSample};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Parameters of the two-parameter Poisson-Dirichlet law PD(α, θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdParams {
    pub alpha: f64,
    pub theta: f64,
}

impl PdParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        let p = Self { alpha, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return param(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        if !(self.theta > -self.alpha) || !self.theta.is_finite() {
            return param(format!(
                "theta must be finite and exceed -alpha = {}, got {}",
                -self.alpha, self.theta
            ));
        }
        Ok(())
    }

    /// Parameters of the renormalized sequence left after deleting the first
    /// size-biased pick.
    pub fn after_deletion(&self) -> Self {
        Self { alpha: self.alpha, theta: self.theta + self.alpha }
    }
}
