use super::report::EstimatorReport;
use crate::distributions::{mittag_leffler_moment, phi_moment, psi_alpha, stick_breaking, PdParams};
use crate::error::{param, Result};
use crate::rng::McContext;
use crate::stats::RunningStats;

/// Checkpoints `100, 1000, …` up to `n_sticks`, always ending at `n_sticks`.
fn checkpoints(n_sticks: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 100;
    while n < n_sticks {
        out.push(n);
        n *= 10;
    }
    out.push(n_sticks);
    out
}

/// Convergence diagnostics of the stick-breaking scheme at decade
/// checkpoints up to `n_sticks`:
///
/// - `martingale_moment`: `E[(n^{(1-α)/α} M_n)^γ]` against `Φ(γ)`;
/// - `series_centering`: `E[S_n] - Ψ_α ln n`, which stays bounded;
/// - `sigma_over_log_n`: `E[Σ_n] / ln n` against `Ψ_α Φ(α)` (the
///   Mittag-Leffler first moment when `θ = 0`).
pub fn pd_diagnostics(
    params: PdParams,
    n_sticks: usize,
    n_replicates: usize,
    gamma_exp: f64,
    mc: &McContext,
) -> Result<Vec<EstimatorReport>> {
    params.validate()?;
    if n_sticks < 100 {
        return param("pd diagnostics need n_sticks >= 100");
    }
    if n_replicates == 0 {
        return param("pd diagnostics need at least one replicate");
    }
    let alpha = params.alpha;
    let psi = psi_alpha(alpha)?;
    let phi = phi_moment(params, gamma_exp)?;
    let sigma_ref = if params.theta == 0.0 {
        mittag_leffler_moment(alpha, 1.0)?
    } else {
        psi * phi_moment(params, alpha)?
    };
    let points = checkpoints(n_sticks);
    let rows = mc.try_map_replicates(n_replicates, |_, rng| {
        let s = stick_breaking(params, n_sticks, rng)?;
        Ok(points
            .iter()
            .map(|&n| {
                let ln_n = (n as f64).ln();
                let i = n - 1;
                let scaled = if gamma_exp == 0.0 {
                    1.0
                } else {
                    (gamma_exp * ((1.0 - alpha) / alpha * ln_n + s.log_m[i])).exp()
                };
                [scaled, s.s[i] - psi * ln_n, s.sigma[i] / ln_n]
            })
            .collect::<Vec<_>>())
    })?;
    let mut out = Vec::new();
    for (c, &n) in points.iter().enumerate() {
        let column = |k: usize| -> RunningStats { rows.iter().map(|r| r[c][k]).collect() };
        let tag = |r: EstimatorReport| {
            r.with_param("alpha", alpha)
                .with_param("theta", params.theta)
                .with_param("n", n)
                .with_param("gamma", gamma_exp)
        };
        out.push(tag(EstimatorReport::from_stats("martingale_moment", &column(0), 1.0))
            .with_reference(Some(phi)));
        out.push(tag(EstimatorReport::from_stats("series_centering", &column(1), 1.0)));
        out.push(tag(EstimatorReport::from_stats("sigma_over_log_n", &column(2), 1.0))
            .with_reference(Some(sigma_ref)));
    }
    Ok(out)
}
