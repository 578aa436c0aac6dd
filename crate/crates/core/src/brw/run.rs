use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{step, BrwConfig, PopulationState, StepOutcome};
use crate::error::{param, Result};
use crate::io::{fmt_f64, write_csv};

/// Parent labels per generation. `parents[t][i]` is the 0-based index in
/// generation `t` of the parent of particle `i` of generation `t + 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GenealogyRecord {
    pub n_particles: usize,
    pub parents: Vec<Vec<u32>>,
}

impl GenealogyRecord {
    pub fn new(n_particles: usize) -> Self {
        Self { n_particles, parents: Vec::new() }
    }

    pub fn push(&mut self, parents: Vec<u32>) -> Result<()> {
        if parents.len() != self.n_particles {
            return param("parent vector length differs from n_particles");
        }
        if parents.iter().any(|&p| p as usize >= self.n_particles) {
            return param("parent label out of range");
        }
        self.parents.push(parents);
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.parents.len()
    }

    /// Offspring counts `ν_k` of the parents of generation `t + 1`.
    pub fn offspring_counts(&self, t: usize) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_particles];
        for &p in &self.parents[t] {
            counts[p as usize] += 1;
        }
        counts
    }

    /// CSV with columns `generation,child_index,parent_index`; generations
    /// start at 1 and indices are 1-based.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = self.parents.iter().enumerate().flat_map(|(t, ps)| {
            ps.iter().enumerate().map(move |(i, &p)| {
                vec![(t + 1).to_string(), (i + 1).to_string(), (p + 1).to_string()]
            })
        });
        write_csv(w, &["generation", "child_index", "parent_index"], rows)
    }
}

/// Front statistics of one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: u64,
    pub x_eq: f64,
    pub max_pos: f64,
    pub min_pos: f64,
}

impl GenerationSummary {
    pub fn of(state: &PopulationState) -> Self {
        Self {
            generation: state.generation,
            x_eq: state.x_eq,
            max_pos: state.max_position(),
            min_pos: state.min_position(),
        }
    }

    /// CSV with columns `generation,x_eq,max_pos,min_pos`.
    pub fn write_csv<W: Write>(rows: &[Self], w: W) -> Result<()> {
        let rows = rows.iter().map(|s| {
            vec![s.generation.to_string(), fmt_f64(s.x_eq), fmt_f64(s.max_pos), fmt_f64(s.min_pos)]
        });
        write_csv(w, &["generation", "x_eq", "max_pos", "min_pos"], rows)
    }
}

/// A running chain.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: BrwConfig,
    state: PopulationState,
}

impl Simulation {
    /// Starts with every particle at zero.
    pub fn new(config: BrwConfig) -> Result<Self> {
        let state = PopulationState::zeros(config.n_particles)?;
        Self::with_state(config, state)
    }

    pub fn with_state(config: BrwConfig, state: PopulationState) -> Result<Self> {
        config.validate()?;
        if state.len() != config.n_particles {
            return param(format!(
                "initial state has {} particles, expected {}",
                state.len(),
                config.n_particles
            ));
        }
        Ok(Self { config, state })
    }

    pub fn state(&self) -> &PopulationState {
        &self.state
    }

    pub fn config(&self) -> &BrwConfig {
        &self.config
    }

    /// Advances one generation and returns the parent labels, increment and
    /// dropped position; the new state is kept internally.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepOutcome> {
        let out = step(&self.state, &self.config, rng)?;
        self.state = out.state.clone();
        Ok(out)
    }
}

/// Every state of a run together with its genealogy.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// `horizon + 1` states, the first being the initial one.
    pub states: Vec<PopulationState>,
    pub genealogy: GenealogyRecord,
    pub increments: Vec<f64>,
}

/// Runs `horizon` generations from `initial` (all zeros when `None`),
/// keeping every state.
pub fn run<R: Rng + ?Sized>(
    config: &BrwConfig,
    horizon: usize,
    initial: Option<Vec<f64>>,
    rng: &mut R,
) -> Result<RunOutput> {
    if horizon == 0 {
        return param("horizon must be at least 1");
    }
    let mut sim = start(config, initial)?;
    let mut states = vec![sim.state().clone()];
    let mut genealogy = GenealogyRecord::new(config.n_particles);
    let mut increments = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let out = sim.step(rng)?;
        genealogy.push(out.parents)?;
        increments.push(out.increment);
        states.push(out.state);
    }
    Ok(RunOutput { states, genealogy, increments })
}

/// Front summaries of a run, with the genealogy only when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub summaries: Vec<GenerationSummary>,
    pub increments: Vec<f64>,
    pub genealogy: Option<GenealogyRecord>,
    pub final_state: PopulationState,
}

/// Like [`run`] but stores only per-generation summaries.
pub fn run_summary<R: Rng + ?Sized>(
    config: &BrwConfig,
    horizon: usize,
    initial: Option<Vec<f64>>,
    record_genealogy: bool,
    rng: &mut R,
) -> Result<RunSummary> {
    if horizon == 0 {
        return param("horizon must be at least 1");
    }
    let mut sim = start(config, initial)?;
    let mut summaries = vec![GenerationSummary::of(sim.state())];
    let mut genealogy = record_genealogy.then(|| GenealogyRecord::new(config.n_particles));
    let mut increments = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let out = sim.step(rng)?;
        summaries.push(GenerationSummary::of(&out.state));
        increments.push(out.increment);
        if let Some(g) = genealogy.as_mut() {
            g.push(out.parents)?;
        }
    }
    Ok(RunSummary { summaries, increments, genealogy, final_state: sim.state().clone() })
}

fn start(config: &BrwConfig, initial: Option<Vec<f64>>) -> Result<Simulation> {
    match initial {
        Some(p) => Simulation::with_state(config.clone(), PopulationState::new(p)?),
        None => Simulation::new(config.clone()),
    }
}
