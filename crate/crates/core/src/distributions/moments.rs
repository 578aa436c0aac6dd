use super::PdParams;
use crate::error::{param, Result};
use crate::special::{gamma, ln_gamma};

/// `Ψ_α = α^{-α} / Γ(1-α)`.
pub fn psi_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("alpha must lie in (0,1), got {alpha}"));
    }
    Ok((-alpha * alpha.ln() - ln_gamma(1.0 - alpha)).exp())
}

/// Limit moment `E[M_∞^γ]` of the normalized stick residual:
/// `α^γ Γ(θ+1) Γ((θ+γ)/α + 1) / (Γ(θ+γ+1) Γ(θ/α + 1))`.
pub fn phi_moment(params: PdParams, gamma_exp: f64) -> Result<f64> {
    params.validate()?;
    let PdParams { alpha, theta } = params;
    if !(gamma_exp > -(theta + alpha)) || !gamma_exp.is_finite() {
        return param(format!(
            "moment order must exceed -(theta + alpha) = {}, got {gamma_exp}",
            -(theta + alpha)
        ));
    }
    let ln = gamma_exp * alpha.ln() + ln_gamma(theta + 1.0) + ln_gamma((theta + gamma_exp) / alpha + 1.0)
        - ln_gamma(theta + gamma_exp + 1.0)
        - ln_gamma(theta / alpha + 1.0);
    Ok(ln.exp())
}

/// The same moment in the form `α^γ Γ(θ) Γ((θ+γ)/α) / (Γ(θ+γ) Γ(θ/α))`,
/// valid for `θ > 0` and `γ > -θ`.
pub fn phi_moment_simplified(params: PdParams, gamma_exp: f64) -> Result<f64> {
    params.validate()?;
    let PdParams { alpha, theta } = params;
    if !(theta > 0.0) || !(gamma_exp > -theta) {
        return param("simplified form needs theta > 0 and gamma > -theta");
    }
    let ln = gamma_exp * alpha.ln() + ln_gamma(theta) + ln_gamma((theta + gamma_exp) / alpha)
        - ln_gamma(theta + gamma_exp)
        - ln_gamma(theta / alpha);
    Ok(ln.exp())
}

/// `Γ(p+1) / (Γ(pα+1) Γ(1-α)^p)`, the p-th moment of a Mittag-Leffler(α) law.
pub fn mittag_leffler_moment(alpha: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(p > -1.0) || !p.is_finite() {
        return param(format!("moment order must exceed -1, got {p}"));
    }
    Ok((ln_gamma(p + 1.0) - ln_gamma(p * alpha + 1.0) - p * gamma(1.0 - alpha).ln()).exp())
}

/// Exact finite-n moment `E[(n^{(1-α)/α} M_n)^γ]`, from the independent
/// factors `E[(1 - Y_k)^γ]` of the stick product.
pub fn residual_moment(params: PdParams, n: usize, gamma_exp: f64) -> Result<f64> {
    params.validate()?;
    let PdParams { alpha, theta } = params;
    if !(gamma_exp > -(theta + alpha)) || !gamma_exp.is_finite() {
        return param("moment order must exceed -(theta + alpha)");
    }
    let p = 1.0 - alpha;
    let ln_prod: f64 = (1..=n)
        .map(|k| {
            let q = theta + k as f64 * alpha;
            ln_gamma(q + gamma_exp) + ln_gamma(p + q) - ln_gamma(q) - ln_gamma(p + q + gamma_exp)
        })
        .sum();
    Ok((ln_prod + gamma_exp * (1.0 - alpha) / alpha * (n as f64).ln()).exp())
}

/// Exact `E[Σ_n] = Σ_{j≤n} E[Y_j^α] Π_{k<j} E[(1 - Y_k)^α]`.
pub fn sigma_mean(params: PdParams, n: usize) -> Result<f64> {
    params.validate()?;
    let PdParams { alpha, theta } = params;
    let p = 1.0 - alpha;
    let mut ln_prefix = 0.0;
    let mut total = 0.0;
    for k in 1..=n {
        let q = theta + k as f64 * alpha;
        let ln_y = ln_gamma(p + alpha) + ln_gamma(p + q) - ln_gamma(p) - ln_gamma(p + q + alpha);
        total += (ln_prefix + ln_y).exp();
        ln_prefix += ln_gamma(q + alpha) + ln_gamma(p + q) - ln_gamma(q) - ln_gamma(p + q + alpha);
    }
    Ok(total)
}
