use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use serde::{Deserialize, Serialize};

use super::samplers::poisson;
use crate::error::{param, Error, Result};

/// Default cap on the expected atom count of an above-cutoff sample.
pub const DEFAULT_MAX_ATOMS: f64 = 5.0e7;

/// Ranked atoms of a PPP(e^{-x} dx) above `cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PppSample {
    /// Strictly decreasing atoms, all above `cutoff`.
    pub points: Vec<f64>,
    /// Every atom of the process above this level is present.
    pub cutoff: f64,
    /// Expected residual weight `Σ_{x < cutoff} e^{βx}` once a weight
    /// exponent has been attached.
    pub tail_weight_bound: Option<f64>,
}

impl PppSample {
    /// Attaches the weight exponent `beta`, filling in the tail bound.
    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.tail_weight_bound = Some(tail_weight_bound(self.cutoff, beta)?);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The `k` largest atoms, built from the arrival times of a unit-rate Poisson
/// process: `x_j = -ln Γ_j`. The cutoff is `x_k`.
pub fn sample_ppp_top_k<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<PppSample> {
    if k == 0 {
        return param("top-k sample needs k >= 1");
    }
    let mut points = Vec::with_capacity(k);
    top_k_into(k, rng, &mut points);
    let cutoff = points[k - 1];
    Ok(PppSample { points, cutoff, tail_weight_bound: None })
}

pub(crate) fn top_k_into<R: Rng + ?Sized>(k: usize, rng: &mut R, out: &mut Vec<f64>) {
    let mut arrival = 0.0f64;
    for _ in 0..k {
        let mut e: f64 = Exp1.sample(rng);
        while e == 0.0 {
            e = Exp1.sample(rng);
        }
        arrival += e;
        out.push(-arrival.ln());
    }
}

/// All atoms above `cutoff`, capped at [`DEFAULT_MAX_ATOMS`] expected atoms.
pub fn sample_ppp_above<R: Rng + ?Sized>(cutoff: f64, rng: &mut R) -> Result<PppSample> {
    sample_ppp_above_capped(cutoff, DEFAULT_MAX_ATOMS, rng)
}

/// All atoms above `cutoff`: a Poisson(e^{-cutoff}) count of i.i.d.
/// `cutoff + Exp(1)` atoms, ranked.
pub fn sample_ppp_above_capped<R: Rng + ?Sized>(
    cutoff: f64,
    max_expected_atoms: f64,
    rng: &mut R,
) -> Result<PppSample> {
    sample_ppp_band(cutoff, f64::INFINITY, max_expected_atoms, rng)
}

/// All atoms in `(lower, upper)`, ranked decreasing.
pub fn sample_ppp_band<R: Rng + ?Sized>(
    lower: f64,
    upper: f64,
    max_expected_atoms: f64,
    rng: &mut R,
) -> Result<PppSample> {
    let mut points = Vec::new();
    ppp_band_into(lower, upper, max_expected_atoms, rng, &mut points)?;
    points.sort_by(|a, b| b.total_cmp(a));
    points.dedup();
    Ok(PppSample { points, cutoff: lower, tail_weight_bound: None })
}

/// Appends the atoms in `(lower, upper)` to `out`, unsorted.
pub(crate) fn ppp_band_into<R: Rng + ?Sized>(
    lower: f64,
    upper: f64,
    max_expected_atoms: f64,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<()> {
    if lower.is_nan() || upper.is_nan() || !(upper > lower) {
        return param(format!("empty or invalid band ({lower}, {upper})"));
    }
    let width = upper - lower;
    // e^{-lower} (1 - e^{-width})
    let span = -(-width).exp_m1();
    let log_mass = -lower + span.ln();
    if log_mass > max_expected_atoms.ln() {
        return Err(Error::Resource(format!(
            "expected PPP atom count e^{log_mass:.3} exceeds the cap {max_expected_atoms:e}; \
             raise the cutoff or the truncation epsilon"
        )));
    }
    let count = poisson(log_mass.exp(), rng)? as usize;
    out.reserve(count);
    for _ in 0..count {
        let u: f64 = rng.sample(Open01);
        out.push(lower - (-u * span).ln_1p());
    }
    Ok(())
}

/// `E[Σ_{x < cutoff} e^{βx}] = e^{(β-1) cutoff} / (β - 1)` under PPP(e^{-x} dx).
pub fn tail_weight_bound(cutoff: f64, beta: f64) -> Result<f64> {
    if !(beta > 1.0) || !beta.is_finite() {
        return param(format!("weight exponent must be finite and > 1, got {beta}"));
    }
    if cutoff == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok(((beta - 1.0) * cutoff).exp() / (beta - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;
    use crate::stats::ks_statistic;

    #[test]
    fn top_point_is_gumbel() {
        let mut rng = seed_stream(11, 0);
        let xs: Vec<f64> =
            (0..100_000).map(|_| sample_ppp_top_k(1, &mut rng).unwrap().points[0]).collect();
        let d = ks_statistic(&xs, |x| (-(-x).exp()).exp());
        assert!(d < 0.006, "KS {d}");
    }

    #[test]
    fn eleventh_point_transforms_to_gamma_11() {
        let mut rng = seed_stream(12, 0);
        let n = 100_000;
        let s: f64 = (0..n)
            .map(|_| (-sample_ppp_top_k(11, &mut rng).unwrap().points[10]).exp())
            .sum();
        assert!((s / n as f64 - 11.0).abs() < 0.05);
    }

    #[test]
    fn top_k_is_strictly_decreasing_with_k_entries() {
        let mut rng = seed_stream(13, 0);
        for k in [1, 2, 10, 500] {
            let s = sample_ppp_top_k(k, &mut rng).unwrap();
            assert_eq!(s.len(), k);
            assert!(s.points.windows(2).all(|w| w[0] > w[1]));
            assert_eq!(s.cutoff, s.points[k - 1]);
        }
        assert!(sample_ppp_top_k(0, &mut rng).is_err());
    }

    #[test]
    fn above_zero_has_unit_mean_count() {
        let mut rng = seed_stream(14, 0);
        let n = 1_000_000;
        let total: usize = (0..n).map(|_| sample_ppp_above(0.0, &mut rng).unwrap().len()).sum();
        assert!((total as f64 / n as f64 - 1.0).abs() < 0.003);
    }

    #[test]
    fn above_minus_log_100_has_mean_100() {
        let mut rng = seed_stream(15, 0);
        let n = 20_000;
        let c = -(100f64.ln());
        let mut total = 0usize;
        for _ in 0..n {
            let s = sample_ppp_above(c, &mut rng).unwrap();
            assert!(s.points.iter().all(|&x| x > c));
            assert!(s.points.windows(2).all(|w| w[0] > w[1]));
            total += s.len();
        }
        // sd of the mean is 10 / sqrt(n) ≈ 0.07
        assert!((total as f64 / n as f64 - 100.0).abs() < 0.3);
    }

    #[test]
    fn band_counts_match_intensity() {
        let mut rng = seed_stream(16, 0);
        let n = 50_000;
        let total: usize =
            (0..n).map(|_| sample_ppp_band(-1.0, 1.0, 1e6, &mut rng).unwrap().len()).sum();
        let expected = (1f64).exp() - (-1f64).exp();
        assert!((total as f64 / n as f64 - expected).abs() < 0.03);
    }

    #[test]
    fn resource_cap_refuses_huge_samples() {
        let mut rng = seed_stream(17, 0);
        let err = sample_ppp_above(-100.0, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn tail_bound_values() {
        assert_eq!(tail_weight_bound(f64::NEG_INFINITY, 2.0).unwrap(), 0.0);
        assert!(tail_weight_bound(-800.0, 2.0).unwrap() < 1e-300);
        assert!((tail_weight_bound(0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((tail_weight_bound(0.0, 1.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(tail_weight_bound(0.0, 1.0).is_err());
        assert!(tail_weight_bound(0.0, f64::INFINITY).is_err());
    }
}
