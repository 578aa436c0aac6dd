use serde::{Deserialize, Serialize};

use crate::distributions::PdParams;
use crate::error::Result;
use crate::special::gamma;

/// `λ = 1 + θ/α`, `c_{α,θ} = 1 / (Γ(1-θ/α) Γ(1-α)^{θ/α} Γ(1+θ))` and
/// `L_N = c_{α,θ} (ln N)^λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub alpha: f64,
    pub theta: f64,
    pub lambda: f64,
    pub c_alpha_theta: f64,
}

impl ScalingConstants {
    pub fn new(params: PdParams) -> Result<Self> {
        params.validate()?;
        let PdParams { alpha, theta } = params;
        let r = theta / alpha;
        let g = 1.0 - r;
        // 1/Γ vanishes at the poles 0, -1, -2, …
        let inv_gamma_g = if g <= 0.0 && g == g.round() { 0.0 } else { 1.0 / gamma(g) };
        let c = inv_gamma_g / (gamma(1.0 - alpha).powf(r) * gamma(1.0 + theta));
        Ok(Self { alpha, theta, lambda: 1.0 + r, c_alpha_theta: c })
    }

    /// `L_N`.
    pub fn l_n(&self, n: f64) -> f64 {
        self.c_alpha_theta * n.ln().powf(self.lambda)
    }

    /// `(1 - θ/α) / L_N`, the first-order pair-coalescence probability,
    /// defined for `-α < θ < α`.
    pub fn cn_reference(&self, n: f64) -> Option<f64> {
        (self.theta < self.alpha).then(|| (1.0 - self.theta / self.alpha) / self.l_n(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_zero_gives_log_n() {
        for a in [0.1, 0.5, 0.9] {
            let s = ScalingConstants::new(PdParams::new(a, 0.0).unwrap()).unwrap();
            assert_eq!(s.lambda, 1.0);
            assert!((s.c_alpha_theta - 1.0).abs() < 1e-14);
            assert!((s.l_n(1e4) - 1e4f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn general_value() {
        let s = ScalingConstants::new(PdParams::new(0.5, 0.25).unwrap()).unwrap();
        assert_eq!(s.lambda, 1.5);
        let expected = 1.0 / (gamma(0.5) * gamma(0.5).powf(0.5) * gamma(1.25));
        assert!((s.c_alpha_theta - expected).abs() < 1e-14);
        assert!(s.cn_reference(1e3).is_some());
    }

    #[test]
    fn boundary_theta_equals_alpha() {
        let s = ScalingConstants::new(PdParams::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(s.c_alpha_theta, 0.0);
        assert!(s.cn_reference(1e3).is_none());
    }
}
