use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};

/// Draws parent labels with probability proportional to `e^{X(i)}`.
#[derive(Debug, Clone)]
pub enum MarkSampler {
    Single,
    Alias(WeightedAliasIndex<f64>),
}

impl MarkSampler {
    pub fn from_positions(positions: &[f64]) -> Result<Self> {
        if positions.len() <= 1 {
            return Ok(MarkSampler::Single);
        }
        let m = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = positions.iter().map(|&x| (x - m).exp()).collect();
        WeightedAliasIndex::new(weights)
            .map(MarkSampler::Alias)
            .map_err(|e| Error::Internal(format!("parent weights: {e}")))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            MarkSampler::Single => 0,
            MarkSampler::Alias(a) => a.sample(rng) as u32,
        }
    }
}
