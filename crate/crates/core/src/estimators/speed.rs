use super::report::EstimatorReport;
use crate::brw::{BrwConfig, Simulation};
use crate::error::{param, Result};
use crate::rng::McContext;
use crate::stats::RunningStats;

/// Mean `x_eq` increment pooled over `n_replicates` independent chains of
/// `t_steps` generations each. Increments are i.i.d. across generations,
/// so the standard error is the pooled standard deviation over the square
/// root of the total count. The reference is `ln ln N`.
pub fn estimate_speed(
    config: &BrwConfig,
    t_steps: usize,
    n_replicates: usize,
    mc: &McContext,
) -> Result<EstimatorReport> {
    config.validate()?;
    if t_steps.saturating_mul(n_replicates) < 100 {
        return param("speed estimation needs t_steps * n_replicates >= 100");
    }
    let per_rep = mc.try_map_replicates(n_replicates, |_, rng| {
        let mut sim = Simulation::new(config.clone())?;
        let mut stats = RunningStats::default();
        for _ in 0..t_steps {
            stats.push(sim.step(rng)?.increment);
        }
        Ok(stats)
    })?;
    let pooled = per_rep.iter().fold(RunningStats::default(), |a, b| a.merge(b));
    let n = config.n_particles as f64;
    let reference = (config.n_particles >= 2).then(|| n.ln().ln());
    Ok(EstimatorReport::from_stats("speed", &pooled, 1.0)
        .with_param("n_particles", config.n_particles)
        .with_param("beta", config.beta.to_string())
        .with_param("engine", serde_json::to_value(config.engine)?)
        .with_param("variant", serde_json::to_value(config.variant)?)
        .with_param("t_steps", t_steps)
        .with_param("replicates", n_replicates)
        .with_reference(reference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brw::Beta;
    use crate::special::EULER_GAMMA;

    #[test]
    fn single_particle_exponential_model_is_gumbel_mean() {
        let config = BrwConfig::new(1, Beta::Infinite).unwrap();
        let r = estimate_speed(&config, 5000, 20, &McContext::new(91)).unwrap();
        assert_eq!(r.n_samples, 100_000);
        assert!((r.estimate - EULER_GAMMA).abs() < 3.0 * r.std_error + 1e-3, "{r:?}");
        assert!(r.reference.is_none());
    }

    #[test]
    fn variance_halves_with_double_replicates() {
        let config = BrwConfig::new(4, Beta::Infinite).unwrap();
        let a = estimate_speed(&config, 2000, 10, &McContext::new(92)).unwrap();
        let b = estimate_speed(&config, 2000, 20, &McContext::new(93)).unwrap();
        let ratio = (b.std_error / a.std_error).powi(2);
        assert!((ratio - 0.5).abs() < 0.1, "variance ratio {ratio}");
    }

    #[test]
    fn rejects_tiny_runs() {
        let config = BrwConfig::new(4, Beta::Infinite).unwrap();
        assert!(estimate_speed(&config, 9, 10, &McContext::new(1)).is_err());
    }
}
