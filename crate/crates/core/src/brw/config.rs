use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{param, Error, Result};

/// Default relative tail-weight tolerance of the direct engine.
pub const DEFAULT_TRUNCATION_EPSILON: f64 = 1e-12;

/// Selection strength: a real number above one, or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(*b),
            Beta::Infinite => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Beta::Finite(b) if *b > 1.0 && b.is_finite() => Ok(()),
            Beta::Finite(b) => param(format!("beta must exceed 1, got {b}")),
            Beta::Infinite => Ok(()),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") {
            return Ok(Beta::Infinite);
        }
        let b: f64 = t.parse().map_err(|_| Error::Parameter(format!("cannot parse beta '{s}'")))?;
        let beta = if b.is_infinite() && b > 0.0 { Beta::Infinite } else { Beta::Finite(b) };
        beta.validate()?;
        Ok(beta)
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(Beta::Finite(b)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Direct,
    PdExact,
    ExponentialModel,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "direct" => Ok(Engine::Direct),
            "pd_exact" => Ok(Engine::PdExact),
            "exponential_model" => Ok(Engine::ExponentialModel),
            other => param(format!("unknown engine '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Standard,
    /// Sample N+1 children and discard the first one sampled.
    DropFirstSampled,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "standard" => Ok(Variant::Standard),
            "drop_first_sampled" => Ok(Variant::DropFirstSampled),
            other => param(format!("unknown variant '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrwConfig {
    pub n_particles: usize,
    pub beta: Beta,
    pub engine: Engine,
    /// Relative tail weight below which the direct engine stops exposing
    /// further child bands explicitly.
    pub truncation_epsilon: f64,
    pub variant: Variant,
    /// Stick count for `pd_exact`; defaults to `max(N, 10^4)`.
    pub n_sticks: Option<usize>,
    /// Cap on explicitly generated children for `direct`; defaults to
    /// `2 (N + 64)`.
    pub max_children: Option<usize>,
    /// Cap on the expected number of tail proposals in one selection.
    pub max_tail_proposals: f64,
}

impl BrwConfig {
    /// Configuration with the engine implied by `beta`: `direct` for finite
    /// values, `exponential_model` for infinity.
    pub fn new(n_particles: usize, beta: Beta) -> Result<Self> {
        let engine = match beta {
            Beta::Finite(_) => Engine::Direct,
            Beta::Infinite => Engine::ExponentialModel,
        };
        let c = Self {
            n_particles,
            beta,
            engine,
            truncation_epsilon: DEFAULT_TRUNCATION_EPSILON,
            variant: Variant::Standard,
            n_sticks: None,
            max_children: None,
            max_tail_proposals: 1e8,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_engine(mut self, engine: Engine) -> Result<Self> {
        self.engine = engine;
        self.validate()?;
        Ok(self)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_n_sticks(mut self, n_sticks: usize) -> Self {
        self.n_sticks = Some(n_sticks);
        self
    }

    pub fn with_truncation_epsilon(mut self, eps: f64) -> Self {
        self.truncation_epsilon = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return param("n_particles must be at least 1");
        }
        if self.n_particles >= u32::MAX as usize {
            return param("n_particles too large");
        }
        self.beta.validate()?;
        match (self.engine, self.beta) {
            (Engine::ExponentialModel, Beta::Finite(_)) => {
                return param("the exponential model engine requires beta = inf")
            }
            (Engine::Direct | Engine::PdExact, Beta::Infinite) => {
                return param("beta = inf requires the exponential_model engine")
            }
            _ => {}
        }
        if !(self.truncation_epsilon > 0.0 && self.truncation_epsilon < 1.0) {
            return param(format!(
                "truncation_epsilon must lie in (0,1), got {}",
                self.truncation_epsilon
            ));
        }
        if let Some(n) = self.n_sticks {
            if n < self.n_selected() {
                return param(format!("n_sticks = {n} is below the number of sampled children"));
            }
        }
        if !(self.max_tail_proposals >= 1.0) {
            return param("max_tail_proposals must be at least 1");
        }
        Ok(())
    }

    /// Children sampled per generation (N, or N+1 when the first is dropped).
    pub fn n_selected(&self) -> usize {
        match self.variant {
            Variant::Standard => self.n_particles,
            Variant::DropFirstSampled => self.n_particles + 1,
        }
    }

    pub(crate) fn effective_n_sticks(&self) -> usize {
        self.n_sticks
            .unwrap_or_else(|| self.n_particles.max(10_000))
            .max(self.n_selected())
    }

    pub(crate) fn effective_max_children(&self) -> usize {
        self.max_children
            .unwrap_or(2 * (self.n_selected() + 64))
            .max(self.n_selected() + 64)
    }
}
