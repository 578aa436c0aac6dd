use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::marks::MarkSampler;
use super::{finish_step, BrwConfig, Engine, PopulationState, StepOutcome};
use crate::distributions::sample_log_gamma;
use crate::error::{param, Result};

/// `Z + e_j` representation of the top `n` atoms of PPP(e^{-x} dx).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialModelSample {
    /// `e^{-z}` is Gamma(n+1, 1).
    pub z: f64,
    pub e: Vec<f64>,
}

impl ExponentialModelSample {
    /// `z + e_j` sorted decreasing, ties broken by original index.
    pub fn ranked(&self) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..self.e.len()).collect();
        idx.sort_by(|&a, &b| self.e[b].total_cmp(&self.e[a]).then(a.cmp(&b)));
        idx.into_iter().map(|i| self.z + self.e[i]).collect()
    }
}

pub fn sample_exponential_model_points<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<ExponentialModelSample> {
    if n == 0 {
        return param("exponential model needs n >= 1");
    }
    let z = -sample_log_gamma(n as f64 + 1.0, rng)?;
    let e = (0..n).map(|_| Exp1.sample(rng)).collect();
    Ok(ExponentialModelSample { z, e })
}

/// One generation of the β = ∞ model: the N rightmost children survive.
pub fn step_exponential_model<R: Rng + ?Sized>(
    state: &PopulationState,
    config: &BrwConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    config.validate()?;
    if config.engine != Engine::ExponentialModel {
        return param("exponential model step called with another engine configured");
    }
    if state.len() != config.n_particles {
        return param("state size differs from n_particles");
    }
    let n_sel = config.n_selected();
    let marks = MarkSampler::from_positions(&state.positions)?;
    let sample = sample_exponential_model_points(n_sel, rng)?;
    let relative = sample.ranked();
    let parents: Vec<u32> = (0..n_sel).map(|_| marks.sample(rng)).collect();
    Ok(finish_step(state, config, relative, parents))
}
