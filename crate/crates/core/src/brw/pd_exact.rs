use rand::Rng;

use super::marks::MarkSampler;
use super::{finish_step, BrwConfig, Engine, PopulationState, StepOutcome};
use crate::distributions::{psi_alpha, size_biased_log_weights, PdParams};
use crate::error::{param, Error, Result};

/// Plug-in `ln L` from the stick residual after `n` sticks:
/// `L = (Ψ_α (n^{(1-α)/α} M_n)^α)^{-1/α}`.
pub fn pd_log_l(alpha: f64, n: usize, log_m_n: f64) -> Result<f64> {
    let psi = psi_alpha(alpha)?;
    let log_norm = (1.0 - alpha) / alpha * (n as f64).ln() + log_m_n;
    Ok(-(psi.ln() + alpha * log_norm) / alpha)
}

/// One generation from the Poisson-Dirichlet representation: positions are
/// `x_eq + (ln V_j + ln L) / β` with `V` the size-biased PD(1/β, 0)
/// weights and `L` estimated from the stick residual.
pub fn step_pd_exact<R: Rng + ?Sized>(
    state: &PopulationState,
    config: &BrwConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    config.validate()?;
    if config.engine != Engine::PdExact {
        return param("pd_exact step called with another engine configured");
    }
    if state.len() != config.n_particles {
        return param("state size differs from n_particles");
    }
    let beta = config
        .beta
        .finite()
        .ok_or_else(|| Error::Parameter("pd_exact engine needs finite beta".into()))?;
    let alpha = 1.0 / beta;
    let params = PdParams::new(alpha, 0.0)?;
    let n_sel = config.n_selected();
    let n_sticks = config.effective_n_sticks();
    let marks = MarkSampler::from_positions(&state.positions)?;
    let (log_v, log_m) = size_biased_log_weights(params, n_sticks, n_sel, rng)?;
    let log_l = pd_log_l(alpha, n_sticks, log_m)?;
    let relative: Vec<f64> = log_v.iter().map(|lv| (lv + log_l) / beta).collect();
    let parents: Vec<u32> = (0..n_sel).map(|_| marks.sample(rng)).collect();
    Ok(finish_step(state, config, relative, parents))
}
