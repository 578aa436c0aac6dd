use rand::Rng;
use serde::{Deserialize, Serialize};

use super::partition::{coag, Partition};
use super::trajectory::CoalescentTrajectory;
use crate::brw::GenealogyRecord;
use crate::distributions::{size_biased_log_weights, PdParams};
use crate::error::{param, Result};
use crate::stats::compensated_sum;

/// Normalized offspring weights `θ_j` in sampling order, with their
/// decreasing rearrangement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdWeights {
    pub theta: Vec<f64>,
    pub order_stats: Vec<f64>,
}

impl PdWeights {
    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return param("weights must be nonempty, finite and nonnegative");
        }
        let total = compensated_sum::sum(&weights);
        if !(total > 0.0) {
            return param("weights must not all vanish");
        }
        Ok(Self::from_normalized(weights.into_iter().map(|w| w / total).collect()))
    }

    /// Normalizes `e^{l_j}` for log-weights `l_j`.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let m = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return param("log-weights must contain a finite maximum");
        }
        Self::from_weights(log_weights.iter().map(|l| (l - m).exp()).collect())
    }

    fn from_normalized(theta: Vec<f64>) -> Self {
        let mut order_stats = theta.clone();
        order_stats.sort_unstable_by(|a, b| b.total_cmp(a));
        Self { theta, order_stats }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// `Σ θ_j^2`: probability that two lineages pick the same parent.
    pub fn collision_probability(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum()
    }

    /// `Σ θ_j^3`: probability that three lineages pick the same parent.
    pub fn triple_collision_probability(&self) -> f64 {
        self.theta.iter().map(|t| t * t * t).sum()
    }

    /// Inverse-CDF sampler for parent labels.
    pub fn sampler(&self) -> ParentSampler {
        let mut acc = 0.0;
        let cumulative = self
            .theta
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect();
        ParentSampler { cumulative }
    }
}

/// Draws labels `j` with probability `θ_j`.
#[derive(Debug, Clone)]
pub struct ParentSampler {
    cumulative: Vec<f64>,
}

impl ParentSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty weights");
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

/// `θ_j = V_j^α / Σ_{i≤N} V_i^α` from N sticks of PD(α, θ).
pub fn sample_pd_weights<R: Rng + ?Sized>(
    params: PdParams,
    n_particles: usize,
    rng: &mut R,
) -> Result<PdWeights> {
    if n_particles < 2 {
        return param("PD weights need n_particles >= 2");
    }
    let (log_v, _) = size_biased_log_weights(params, n_particles, n_particles, rng)?;
    let scaled: Vec<f64> = log_v.iter().map(|l| params.alpha * l).collect();
    PdWeights::from_log_weights(&scaled)
}

/// Every block picks a parent with probability `θ`; blocks picking the same
/// parent merge.
pub fn multinomial_coalescent_step<R: Rng + ?Sized>(
    pi: &Partition,
    weights: &PdWeights,
    rng: &mut R,
) -> Result<Partition> {
    step_with_sampler(pi, &weights.sampler(), rng)
}

pub(crate) fn step_with_sampler<R: Rng + ?Sized>(
    pi: &Partition,
    sampler: &ParentSampler,
    rng: &mut R,
) -> Result<Partition> {
    if pi.n_blocks() == 0 {
        return param("cannot step an empty partition");
    }
    let labels: Vec<usize> = (0..pi.n_blocks()).map(|_| sampler.sample(rng)).collect();
    coag(pi, &Partition::from_labels(&labels))
}

/// Ancestral partition of `sample` (0-based indices in the last recorded
/// generation) traced back `t_back` generations.
pub fn ancestral_partition(
    genealogy: &GenealogyRecord,
    sample: &[usize],
    t_back: usize,
) -> Result<CoalescentTrajectory> {
    let horizon = genealogy.horizon();
    if t_back > horizon {
        return param(format!("t_back = {t_back} exceeds the recorded horizon {horizon}"));
    }
    let n = genealogy.n_particles;
    if sample.iter().any(|&i| i >= n) {
        return param("sample index out of range");
    }
    let mut seen = std::collections::HashSet::new();
    if !sample.iter().all(|i| seen.insert(*i)) {
        return param("sample indices must be distinct");
    }
    let mut ancestors: Vec<u32> = sample.iter().map(|&i| i as u32).collect();
    let mut traj = CoalescentTrajectory::new(Partition::singletons(sample.len()));
    for s in 1..=t_back {
        let parents = &genealogy.parents[horizon - s];
        for a in ancestors.iter_mut() {
            *a = parents[*a as usize];
        }
        traj.push(s as f64, Partition::from_labels(&ancestors));
    }
    Ok(traj)
}
