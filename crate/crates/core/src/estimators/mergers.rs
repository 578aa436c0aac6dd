use serde::{Deserialize, Serialize};

use super::report::EstimatorReport;
use crate::coalescent::{coag, first_merger_distribution, CoalescentTrajectory, LambdaMeasure, Partition};
use crate::distributions::PdParams;
use crate::error::{param, Result};
use crate::rng::McContext;
use crate::stats::RunningStats;

/// Empirical law of the first merger size among `n_lineages` lineages.
/// Index `i` of the vectors corresponds to merger size `i + 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergerStatistics {
    pub n_lineages: usize,
    pub counts: Vec<u64>,
    /// Trajectories without any merger within their horizon.
    pub no_merger: u64,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
}

impl MergerStatistics {
    pub fn n_mergers(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Frequency of first mergers of size at least `k`, with its binomial
    /// standard error.
    pub fn fraction_at_least(&self, k: usize) -> EstimatorReport {
        let n = self.n_mergers();
        let hits: u64 = self.counts.iter().skip(k.saturating_sub(2)).sum();
        let p = if n > 0 { hits as f64 / n as f64 } else { f64::NAN };
        let se = if n > 0 { (p * (1.0 - p) / n as f64).sqrt() } else { f64::NAN };
        let reference = self.reference.iter().skip(k.saturating_sub(2)).sum();
        EstimatorReport::new("first_merger_fraction", p, se, n)
            .with_param("n_lineages", self.n_lineages)
            .with_param("min_size", k)
            .with_reference(Some(reference))
    }
}

/// First-merger sizes of `trajectories` against the law of the
/// Λ-coalescent `reference`, with a χ² statistic over bins pooled from
/// the top until each expected count reaches 5.
pub fn merger_statistics(
    trajectories: &[CoalescentTrajectory],
    n_lineages: usize,
    reference: &LambdaMeasure,
) -> Result<MergerStatistics> {
    if n_lineages < 2 {
        return param("merger statistics need n_lineages >= 2");
    }
    let expected = first_merger_distribution(n_lineages, reference)?;
    let mut counts = vec![0u64; n_lineages - 1];
    let mut no_merger = 0;
    for t in trajectories {
        if t.last().n() != n_lineages {
            return param("trajectories must start from n_lineages singletons");
        }
        match t.first_merger() {
            Some((_, size)) => counts[size - 2] += 1,
            None => no_merger += 1,
        }
    }
    let total: u64 = counts.iter().sum();
    let empirical = counts
        .iter()
        .map(|c| if total > 0 { *c as f64 / total as f64 } else { 0.0 })
        .collect();
    let (chi_square, degrees_of_freedom) = pooled_chi_square(&counts, &expected);
    Ok(MergerStatistics {
        n_lineages,
        counts,
        no_merger,
        empirical,
        reference: expected,
        chi_square,
        degrees_of_freedom,
    })
}

fn pooled_chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return (0.0, 0);
    }
    let n = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(probs) {
        obs += *c as f64;
        exp += p * n;
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => bins.push((obs, exp)),
        }
    }
    let chi = bins.iter().map(|(o, e)| if *e > 0.0 { (o - e).powi(2) / e } else { 0.0 }).sum();
    (chi, bins.len().saturating_sub(1))
}

/// Three-lineage event probabilities of one weight vector: all three pick
/// the same parent (`Σ θ^3`) and a given pair shares a parent while the
/// third does not (`Σ θ^2 (1-θ)`).
pub fn lineage_probabilities_from_weights(theta: &[f64]) -> (f64, f64) {
    theta.iter().fold((0.0, 0.0), |(a, b), t| {
        let t2 = t * t;
        (a + t2 * t, b + t2 * (1.0 - t))
    })
}

/// The same probabilities for three distinct children drawn from one
/// generation with offspring counts `ν`.
pub fn lineage_probabilities_from_counts(counts: &[u32]) -> (f64, f64) {
    let n: f64 = counts.iter().map(|c| *c as f64).sum();
    let falling = n * (n - 1.0) * (n - 2.0);
    if falling <= 0.0 {
        return (0.0, 0.0);
    }
    let (a, b) = counts.iter().fold((0.0, 0.0), |(a, b), &c| {
        let v = c as f64;
        (a + v * (v - 1.0) * (v - 2.0), b + v * (v - 1.0) * (n - v))
    });
    (a / falling, b / falling)
}

/// Ratio estimator `E[a] / E[a + 3b]` of the fraction of first mergers
/// among three lineages that join all three, from per-generation event
/// probabilities `(a, b)`; the standard error is by the delta method.
pub fn triple_merger_fraction(samples: &[(f64, f64)]) -> Result<EstimatorReport> {
    if samples.len() < 2 {
        return param("ratio estimator needs at least two samples");
    }
    let a: RunningStats = samples.iter().map(|s| s.0).collect();
    let d: RunningStats = samples.iter().map(|s| s.0 + 3.0 * s.1).collect();
    if !(d.mean > 0.0) {
        return param("no merger mass in the samples");
    }
    let r = a.mean / d.mean;
    let resid: RunningStats = samples.iter().map(|s| s.0 - r * (s.0 + 3.0 * s.1)).collect();
    let se = resid.std_error() / d.mean;
    Ok(EstimatorReport::new("triple_merger_fraction", r, se, samples.len() as u64))
}

/// Discrete-generation genealogies of `n_lineages` lineages under fresh
/// PD(α, θ) weights each generation. Each trajectory runs until one block
/// remains, until the first merger when `stop_at_first_merger` is set, or
/// for at most `max_generations`. Times are generation counts and only
/// generations that change the partition are recorded.
pub fn simulate_pd_genealogies(
    params: PdParams,
    n_particles: usize,
    n_lineages: usize,
    max_generations: usize,
    stop_at_first_merger: bool,
    n_replicates: usize,
    mc: &McContext,
) -> Result<Vec<CoalescentTrajectory>> {
    params.validate()?;
    if n_particles < 2 || n_lineages < 2 {
        return param("genealogy simulation needs n_particles >= 2 and n_lineages >= 2");
    }
    mc.try_map_replicates(n_replicates, |_, rng| {
        let mut traj = CoalescentTrajectory::new(Partition::singletons(n_lineages));
        for g in 1..=max_generations {
            let b = traj.last().n_blocks();
            if b == 1 {
                break;
            }
            let theta = super::pd_theta(params, n_particles, rng)?;
            let labels: Vec<usize> = (0..b).map(|_| super::pick(&theta, rng)).collect();
            let step = Partition::from_labels(&labels);
            if step.n_blocks() < b {
                let next = coag(traj.last(), &step)?;
                traj.push(g as f64, next);
                if stop_at_first_merger {
                    break;
                }
            }
        }
        Ok(traj)
    })
}
