use serde::{Deserialize, Serialize};

use super::mergers::triple_merger_fraction;
use super::report::EstimatorReport;
use crate::distributions::{size_biased_log_weights, PdParams};
use crate::error::{param, Result};
use crate::rng::McContext;
use crate::stats::RunningStats;

/// Weight statistics of one replicate at one population size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub n: usize,
    /// `Σ θ_j^2`.
    pub collision: f64,
    /// `Σ θ_j^3`.
    pub triple: f64,
    /// `Σ θ_j^2 (1 - θ_j)`.
    pub pair_only: f64,
    pub max_theta: f64,
    pub second_theta: f64,
}

/// PD weights for several population sizes built from nested prefixes of
/// one stick sequence per replicate, so differences across sizes are
/// paired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdGrid {
    pub params: PdParams,
    pub n_grid: Vec<usize>,
    /// `rows[r][i]`: replicate `r` at `n_grid[i]`.
    pub rows: Vec<Vec<GridRow>>,
}

pub fn pd_weight_grid(
    params: PdParams,
    n_grid: &[usize],
    n_replicates: usize,
    mc: &McContext,
) -> Result<PdGrid> {
    params.validate()?;
    if n_grid.is_empty() || n_grid.iter().any(|n| *n < 2) || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return param("grid sizes must be >= 2 and strictly increasing");
    }
    if n_replicates < 2 {
        return param("grid needs at least two replicates");
    }
    let n_max = *n_grid.last().expect("nonempty grid");
    let rows = mc.try_map_replicates(n_replicates, |_, rng| {
        let (log_v, _) = size_biased_log_weights(params, n_max, n_max, rng)?;
        Ok(n_grid.iter().map(|&n| row(&log_v[..n], params.alpha)).collect())
    })?;
    Ok(PdGrid { params, n_grid: n_grid.to_vec(), rows })
}

fn row(log_v: &[f64], alpha: f64) -> GridRow {
    let theta = super::normalize_powers(log_v, alpha);
    let (mut c2, mut c3, mut first, mut second) = (0.0, 0.0, 0.0f64, 0.0f64);
    for &t in &theta {
        let t2 = t * t;
        c2 += t2;
        c3 += t2 * t;
        if t > first {
            second = first;
            first = t;
        } else if t > second {
            second = t;
        }
    }
    GridRow { n: theta.len(), collision: c2, triple: c3, pair_only: c2 - c3, max_theta: first, second_theta: second }
}

impl PdGrid {
    pub fn n_replicates(&self) -> usize {
        self.rows.len()
    }

    /// Mean of `scale · f(row)` at grid index `i`.
    pub fn mean<F: Fn(&GridRow) -> f64>(&self, name: &str, i: usize, scale: f64, f: F) -> EstimatorReport {
        let stats: RunningStats = self.rows.iter().map(|r| f(&r[i])).collect();
        self.tag(EstimatorReport::from_stats(name, &stats, scale), i)
    }

    /// Paired mean of `scale_j f(row_j) - scale_i f(row_i)`.
    pub fn paired_difference<F: Fn(&GridRow) -> f64>(
        &self,
        name: &str,
        i: usize,
        j: usize,
        scale_i: f64,
        scale_j: f64,
        f: F,
    ) -> EstimatorReport {
        let stats: RunningStats = self.rows.iter().map(|r| scale_j * f(&r[j]) - scale_i * f(&r[i])).collect();
        EstimatorReport::from_stats(name, &stats, 1.0)
            .with_param("n_from", self.n_grid[i])
            .with_param("n_to", self.n_grid[j])
    }

    /// Fraction of three-lineage mergers that join all three lineages.
    pub fn triple_fraction(&self, i: usize) -> Result<EstimatorReport> {
        let samples: Vec<(f64, f64)> = self.rows.iter().map(|r| (r[i].triple, r[i].pair_only)).collect();
        Ok(self.tag(triple_merger_fraction(&samples)?, i))
    }

    /// Paired difference of triple fractions (`j` minus `i`), delta method.
    pub fn triple_fraction_difference(&self, i: usize, j: usize) -> Result<EstimatorReport> {
        let ri = self.triple_fraction(i)?.estimate;
        let rj = self.triple_fraction(j)?.estimate;
        let denom = |k: usize| -> f64 {
            self.rows.iter().map(|r| r[k].triple + 3.0 * r[k].pair_only).sum::<f64>() / self.rows.len() as f64
        };
        let (di, dj) = (denom(i), denom(j));
        let resid: RunningStats = self
            .rows
            .iter()
            .map(|r| {
                let li = (r[i].triple - ri * (r[i].triple + 3.0 * r[i].pair_only)) / di;
                let lj = (r[j].triple - rj * (r[j].triple + 3.0 * r[j].pair_only)) / dj;
                lj - li
            })
            .collect();
        Ok(EstimatorReport::new("triple_merger_fraction_difference", rj - ri, resid.std_error(), resid.n)
            .with_param("n_from", self.n_grid[i])
            .with_param("n_to", self.n_grid[j]))
    }

    fn tag(&self, r: EstimatorReport, i: usize) -> EstimatorReport {
        r.with_param("alpha", self.params.alpha)
            .with_param("theta", self.params.theta)
            .with_param("n_particles", self.n_grid[i])
    }
}
