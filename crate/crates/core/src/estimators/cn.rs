use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::report::EstimatorReport;
use super::scaling::ScalingConstants;
use crate::distributions::PdParams;
use crate::error::{param, Error, Result};
use crate::rng::McContext;
use crate::stats::RunningStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnMode {
    /// Average of `Σ θ_j^2` over weight samples.
    SemiAnalytic,
    /// Frequency with which two tagged lineages pick the same parent.
    EmpiricalPair,
}

impl FromStr for CnMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semi_analytic" | "semi-analytic" => Ok(Self::SemiAnalytic),
            "empirical_pair" | "empirical-pair" => Ok(Self::EmpiricalPair),
            _ => Err(Error::Parameter(format!("unknown c_N mode '{s}'"))),
        }
    }
}

/// Pair-coalescence probability of the PD(α, θ) weight model with `N`
/// particles; the reference is `(1 - θ/α) / L_N` when `θ < α`.
pub fn estimate_cn(
    params: PdParams,
    n_particles: usize,
    n_replicates: usize,
    mode: CnMode,
    mc: &McContext,
) -> Result<EstimatorReport> {
    params.validate()?;
    if n_particles < 2 {
        return param("c_N needs n_particles >= 2");
    }
    if n_replicates == 0 {
        return param("c_N needs at least one replicate");
    }
    let values = mc.try_map_replicates(n_replicates, |_, rng| {
        let theta = super::pd_theta(params, n_particles, rng)?;
        Ok(match mode {
            CnMode::SemiAnalytic => theta.iter().map(|t| t * t).sum(),
            CnMode::EmpiricalPair => {
                let a = super::pick(&theta, rng);
                let b = super::pick(&theta, rng);
                if a == b { 1.0 } else { 0.0 }
            }
        })
    })?;
    let stats = RunningStats::from_slice(&values);
    let scaling = ScalingConstants::new(params)?;
    Ok(EstimatorReport::from_stats("c_n", &stats, 1.0)
        .with_param("alpha", params.alpha)
        .with_param("theta", params.theta)
        .with_param("n_particles", n_particles)
        .with_param("mode", serde_json::to_value(mode)?)
        .with_reference(scaling.cn_reference(n_particles as f64)))
}
