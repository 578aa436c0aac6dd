use super::report::EstimatorReport;
use super::scaling::ScalingConstants;
use crate::distributions::PdParams;
use crate::error::{param, Result};
use crate::rng::McContext;
use crate::special::gamma;
use crate::stats::RunningStats;

/// `((1-x)/x)^λ / (λ Γ(λ) Γ(2-λ))` for `λ ∈ (0, 2)`.
pub fn tail_reference(lambda: f64, x: f64) -> Option<f64> {
    if !(lambda > 0.0 && lambda < 2.0) || !(x > 0.0 && x < 1.0) {
        return None;
    }
    Some(((1.0 - x) / x).powf(lambda) / (lambda * gamma(lambda) * gamma(2.0 - lambda)))
}

/// `L_N · P(θ_(1) > x)` for each `x` in the grid, one report per point.
/// All grid points share the same weight samples.
pub fn weight_tail_curve(
    params: PdParams,
    n_particles: usize,
    x_grid: &[f64],
    n_replicates: usize,
    mc: &McContext,
) -> Result<Vec<EstimatorReport>> {
    params.validate()?;
    if n_particles < 2 || n_replicates == 0 {
        return param("tail curve needs n_particles >= 2 and replicates >= 1");
    }
    if x_grid.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
        return param("tail grid points must lie in (0, 1)");
    }
    let maxima = mc.try_map_replicates(n_replicates, |_, rng| {
        let theta = super::pd_theta(params, n_particles, rng)?;
        Ok(theta.iter().copied().fold(0.0, f64::max))
    })?;
    let scaling = ScalingConstants::new(params)?;
    let l_n = scaling.l_n(n_particles as f64);
    Ok(x_grid
        .iter()
        .map(|&x| {
            let stats: RunningStats =
                maxima.iter().map(|m| if *m > x { 1.0 } else { 0.0 }).collect();
            EstimatorReport::from_stats("weight_tail", &stats, l_n)
                .with_param("alpha", params.alpha)
                .with_param("theta", params.theta)
                .with_param("n_particles", n_particles)
                .with_param("x", x)
                .with_reference(tail_reference(scaling.lambda, x))
        })
        .collect())
}
