//! Monte Carlo estimators with confidence intervals.

mod cn;
mod grid;
mod mergers;
mod pd_diagnostics;
mod report;
mod scaling;
mod speed;
mod tails;

pub use cn::{estimate_cn, CnMode};
pub use grid::{pd_weight_grid, GridRow, PdGrid};
pub use mergers::{
    lineage_probabilities_from_counts, lineage_probabilities_from_weights, merger_statistics,
    simulate_pd_genealogies, triple_merger_fraction, MergerStatistics,
};
pub use pd_diagnostics::pd_diagnostics;
pub use report::EstimatorReport;
pub use scaling::ScalingConstants;
pub use speed::estimate_speed;
pub use tails::{tail_reference, weight_tail_curve};

pub use crate::stats::RunningStats;

use rand::Rng;

use crate::distributions::{size_biased_log_weights, PdParams};
use crate::error::Result;

/// Normalized weights `V_j^α / Σ V_i^α` for the first `n` sticks, without
/// building order statistics.
pub(crate) fn pd_theta<R: Rng + ?Sized>(params: PdParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let (log_v, _) = size_biased_log_weights(params, n, n, rng)?;
    Ok(normalize_powers(&log_v[..n], params.alpha))
}

pub(crate) fn normalize_powers(log_v: &[f64], alpha: f64) -> Vec<f64> {
    let m = log_v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = log_v.iter().map(|l| (alpha * (l - m)).exp()).collect();
    let total = crate::stats::compensated_sum::sum(&w);
    for x in w.iter_mut() {
        *x /= total;
    }
    w
}

/// Linear-scan draw of an index with probability `theta[i]`.
pub(crate) fn pick<R: Rng + ?Sized>(theta: &[f64], rng: &mut R) -> usize {
    let mut u = rng.random::<f64>();
    for (i, t) in theta.iter().enumerate() {
        if u < *t {
            return i;
        }
        u -= t;
    }
    theta.len() - 1
}
