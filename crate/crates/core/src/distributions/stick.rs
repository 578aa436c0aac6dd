use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};
use serde::{Deserialize, Serialize};

use super::samplers::{log_beta_from_log_gammas, log_gamma_unchecked, unit_from_logs};
use super::PdParams;
use crate::error::{param, Result};

/// Sequential source of the stick fractions `Y_j ~ Beta(1-α, θ+jα)` as
/// `(ln Y_j, ln(1-Y_j))`.
pub(crate) struct StickDraws {
    alpha: f64,
    theta: f64,
    j: u64,
    shifted_a: Gamma<f64>,
    inv_a: f64,
}

impl StickDraws {
    pub(crate) fn new(params: PdParams) -> Self {
        let a = 1.0 - params.alpha;
        Self {
            alpha: params.alpha,
            theta: params.theta,
            j: 0,
            shifted_a: Gamma::new(a + 1.0, 1.0).expect("alpha validated"),
            inv_a: 1.0 / a,
        }
    }

    #[inline]
    pub(crate) fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (f64, f64) {
        self.j += 1;
        // same draw order as sample_log_beta(1 - α, θ + jα)
        let u: f64 = rng.sample(Open01);
        let la = self.shifted_a.sample(rng).ln() + u.ln() * self.inv_a;
        let b = self.theta + self.j as f64 * self.alpha;
        let lb = log_gamma_unchecked(b, rng);
        log_beta_from_log_gammas(la, lb)
    }
}

/// A stick-breaking realization of length `n`. Index `j - 1` holds the
/// quantities with subscript `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickSample {
    pub params: PdParams,
    /// Stick fractions `Y_j`.
    pub y: Vec<f64>,
    /// Size-biased weights `V_j = Y_j Π_{i<j} (1 - Y_i)`, stored as exact
    /// differences `M_{j-1} - M_j`; the error is relative to `M_{j-1}`, so use
    /// `log_v` when relative accuracy in small weights matters.
    pub v: Vec<f64>,
    /// Residuals `M_j = Π_{i≤j} (1 - Y_i)`.
    pub m: Vec<f64>,
    /// `S_j = Σ_{i≤j} Y_i^α i^{α-1}`.
    pub s: Vec<f64>,
    /// `Σ_j = Σ_{i≤j} V_i^α`.
    pub sigma: Vec<f64>,
    /// `ln V_j`, accumulated in log space.
    pub log_v: Vec<f64>,
    /// `ln M_j`, accumulated in log space.
    pub log_m: Vec<f64>,
}

impl StickSample {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Draws `n` sticks of PD(α, θ).
///
/// The linear residual is updated so that `V_j = M_{j-1} - M_j` holds exactly
/// in floating point: the smaller of `Y_j`, `1 - Y_j` is multiplied in and the
/// other factor is obtained by an exact (Sterbenz) subtraction. Logarithms are
/// accumulated separately and stay finite after the linear values underflow.
pub fn stick_breaking<R: Rng + ?Sized>(
    params: PdParams,
    n: usize,
    rng: &mut R,
) -> Result<StickSample> {
    params.validate()?;
    if n == 0 {
        return param("stick-breaking needs n >= 1");
    }
    let alpha = params.alpha;
    let mut draws = StickDraws::new(params);
    let mut out = StickSample {
        params,
        y: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        m: Vec::with_capacity(n),
        s: Vec::with_capacity(n),
        sigma: Vec::with_capacity(n),
        log_v: Vec::with_capacity(n),
        log_m: Vec::with_capacity(n),
    };
    let mut m_prev = 1.0f64;
    let mut log_m_prev = 0.0f64;
    let mut s = 0.0f64;
    let mut sigma = 0.0f64;
    for j in 1..=n {
        let (ly, l1y) = draws.next(rng);
        let y = unit_from_logs(ly, l1y);
        let (v, m) = if y <= 0.5 {
            let m = m_prev * l1y.exp();
            (m_prev - m, m)
        } else {
            let v = m_prev * y;
            (v, m_prev - v)
        };
        let log_v = log_m_prev + ly;
        let log_m = log_m_prev + l1y;
        s += (alpha * ly + (alpha - 1.0) * (j as f64).ln()).exp();
        sigma += (alpha * log_v).exp();
        out.y.push(y);
        out.v.push(v);
        out.m.push(m);
        out.s.push(s);
        out.sigma.push(sigma);
        out.log_v.push(log_v);
        out.log_m.push(log_m);
        m_prev = m;
        log_m_prev = log_m;
    }
    Ok(out)
}

/// Log size-biased weights `ln V_1..ln V_keep` and the log residual
/// `ln M_total` of one PD(α, θ) stick sequence of length `total`. Consumes
/// the generator exactly like [`stick_breaking`] with `n = total`.
pub fn size_biased_log_weights<R: Rng + ?Sized>(
    params: PdParams,
    total: usize,
    keep: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    params.validate()?;
    if total == 0 || keep > total {
        return param(format!("need 1 <= keep <= total, got keep={keep}, total={total}"));
    }
    let mut draws = StickDraws::new(params);
    let mut log_v = Vec::with_capacity(keep);
    let mut log_m = 0.0f64;
    for j in 0..total {
        let (ly, l1y) = draws.next(rng);
        if j < keep {
            log_v.push(log_m + ly);
        }
        log_m += l1y;
    }
    Ok((log_v, log_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::sample_log_beta;
    use crate::rng::seed_stream;
    use crate::stats::compensated_sum;

    #[test]
    fn first_stick_matches_beta_sampler_stream() {
        let p = PdParams::new(0.4, 0.3).unwrap();
        let mut r1 = seed_stream(21, 0);
        let mut r2 = seed_stream(21, 0);
        let s = stick_breaking(p, 1, &mut r1).unwrap();
        let (ly, _) = sample_log_beta(0.6, 0.7, &mut r2).unwrap();
        assert_eq!(s.log_v[0], ly);
    }

    #[test]
    fn arcsine_first_stick_mean() {
        let p = PdParams::new(0.5, 0.0).unwrap();
        let mut rng = seed_stream(22, 0);
        let n = 1_000_000;
        let mut draws = StickDraws::new(p);
        let mut total = 0.0;
        for _ in 0..n {
            draws.j = 0;
            let (ly, l1y) = draws.next(&mut rng);
            total += unit_from_logs(ly, l1y);
        }
        assert!((total / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn defining_relations_hold() {
        let p = PdParams::new(0.5, 0.25).unwrap();
        let mut rng = seed_stream(23, 0);
        let s = stick_breaking(p, 2000, &mut rng).unwrap();
        assert!((s.v[0] - s.y[0]).abs() <= 2.0 * f64::EPSILON * s.y[0]);
        let mut prod = 1.0;
        for j in 0..s.len() {
            let expected = s.y[j] * prod;
            assert!((s.v[j] - expected).abs() <= 1e-12 * prod);
            assert!((s.log_v[j].exp() / expected - 1.0).abs() < 1e-9);
            prod *= 1.0 - s.y[j];
            assert!((s.log_m[j].exp() / s.m[j] - 1.0).abs() < 1e-9);
        }
        assert!(s.m.windows(2).all(|w| w[1] < w[0]));
        assert!(s.m.iter().all(|&m| m > 0.0 && m < 1.0));
        assert!(s.s.windows(2).all(|w| w[1] >= w[0]));
        assert!(s.sigma.windows(2).all(|w| w[1] >= w[0]));
        assert!(s.y.iter().all(|&y| y > 0.0 && y < 1.0));
    }

    #[test]
    fn residual_telescopes_exactly() {
        let p = PdParams::new(0.5, 0.0).unwrap();
        let mut rng = seed_stream(24, 0);
        let s = stick_breaking(p, 100_000, &mut rng).unwrap();
        let mut worst = 0.0f64;
        let mut acc = compensated_sum::Accumulator::default();
        for j in 0..s.len() {
            acc.add(s.v[j]);
            let residual = acc.one_minus();
            worst = worst.max((residual - s.m[j]).abs() / s.m[j]);
        }
        assert!(worst <= 1e-10, "worst relative gap {worst}");
    }

    #[test]
    fn light_path_consumes_identically() {
        let p = PdParams::new(0.7, 0.1).unwrap();
        let full = stick_breaking(p, 300, &mut seed_stream(25, 3)).unwrap();
        let (lv, lm) = size_biased_log_weights(p, 300, 40, &mut seed_stream(25, 3)).unwrap();
        assert_eq!(&full.log_v[..40], &lv[..]);
        assert_eq!(full.log_m[299], lm);
    }

    #[test]
    fn n_times_residual_has_unit_mean() {
        // Φ(1) = 1 at α = 1/2, θ = 0
        let p = PdParams::new(0.5, 0.0).unwrap();
        let n = 10_000;
        let reps = 3000;
        let mut total = 0.0;
        let mut total_sq = 0.0;
        for r in 0..reps {
            let (_, lm) = size_biased_log_weights(p, n, 0, &mut seed_stream(26, r)).unwrap();
            let x = n as f64 * lm.exp();
            total += x;
            total_sq += x * x;
        }
        let mean = total / reps as f64;
        let se = ((total_sq / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - 1.0).abs() < 0.02_f64.max(3.0 * se), "mean {mean} se {se}");
    }

    #[test]
    fn rejects_empty() {
        let p = PdParams::new(0.5, 0.0).unwrap();
        assert!(stick_breaking(p, 0, &mut seed_stream(0, 0)).is_err());
        assert!(size_biased_log_weights(p, 3, 4, &mut seed_stream(0, 0)).is_err());
    }
}
