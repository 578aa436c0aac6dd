//! The (N,β) branching random walk with random selection.
//!
//! Each generation every particle at `X(i)` branches into a PPP with
//! intensity `e^{-(x - X(i))} dx`; their union is a single PPP centred at the
//! equivalent position `x_eq = ln Σ e^{X(i)}`. N children are then sampled
//! without replacement with probability proportional to `e^{βx}`.
//!
//! Three engines produce a generation:
//! * `direct` samples the child cloud and performs the weighted selection
//!   (finite β only);
//! * `pd_exact` uses the Poisson-Dirichlet representation of one step;
//! * `exponential_model` keeps the N rightmost children (β = ∞).

mod config;
mod direct;
mod exponential;
mod marks;
mod pd_exact;
mod run;

pub use config::{Beta, BrwConfig, Engine, Variant, DEFAULT_TRUNCATION_EPSILON};
pub use direct::{branch_direct, select_weighted_without_replacement, step_direct, ChildPointsSample};
pub use exponential::{sample_exponential_model_points, step_exponential_model, ExponentialModelSample};
pub use marks::MarkSampler;
pub use pd_exact::{pd_log_l, step_pd_exact};
pub use run::{
    run, run_summary, GenealogyRecord, GenerationSummary, RunOutput, RunSummary, Simulation,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// `ln Σ e^{v_i}` with max-shift.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return param("log_sum_exp of an empty sequence");
    }
    Ok(lse(values))
}

pub(crate) fn lse(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|&v| (v - m).exp()).sum();
    m + s.ln()
}

/// Particle positions of one generation, in sampling order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub positions: Vec<f64>,
    /// `ln Σ e^{positions}`.
    pub x_eq: f64,
    pub generation: u64,
}

impl PopulationState {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        Self::at_generation(positions, 0)
    }

    pub fn at_generation(positions: Vec<f64>, generation: u64) -> Result<Self> {
        if positions.iter().any(|x| !x.is_finite()) {
            return param("positions must be finite");
        }
        let x_eq = log_sum_exp(&positions)?;
        Ok(Self { positions, x_eq, generation })
    }

    /// All particles at zero.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn max_position(&self) -> f64 {
        self.positions.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_position(&self) -> f64 {
        self.positions.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Builds the next state from positions relative to this state's `x_eq`.
    pub(crate) fn advance(&self, relative: &[f64]) -> Self {
        let increment = lse(relative);
        Self {
            positions: relative.iter().map(|r| self.x_eq + r).collect(),
            x_eq: self.x_eq + increment,
            generation: self.generation + 1,
        }
    }
}

/// Result of one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: PopulationState,
    /// Parent index (0-based) in the previous generation of every particle.
    pub parents: Vec<u32>,
    /// `x_eq` increment.
    pub increment: f64,
    /// Position of the discarded first pick under `drop_first_sampled`.
    pub dropped: Option<f64>,
}

/// Advances `state` by one generation with the configured engine.
pub fn step<R: Rng + ?Sized>(
    state: &PopulationState,
    config: &BrwConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    config.validate()?;
    if state.len() != config.n_particles {
        return Err(Error::Parameter(format!(
            "state has {} particles, config expects {}",
            state.len(),
            config.n_particles
        )));
    }
    match config.engine {
        Engine::Direct => step_direct(state, config, rng),
        Engine::PdExact => step_pd_exact(state, config, rng),
        Engine::ExponentialModel => step_exponential_model(state, config, rng),
    }
}

/// Shared tail of all engines: optional drop of the first pick, then the
/// new state.
pub(crate) fn finish_step(
    state: &PopulationState,
    config: &BrwConfig,
    mut relative: Vec<f64>,
    mut parents: Vec<u32>,
) -> StepOutcome {
    let dropped = match config.variant {
        Variant::Standard => None,
        Variant::DropFirstSampled => {
            parents.remove(0);
            Some(state.x_eq + relative.remove(0))
        }
    };
    let next = state.advance(&relative);
    let increment = next.x_eq - state.x_eq;
    StepOutcome { state: next, parents, increment, dropped }
}
