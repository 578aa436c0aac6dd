use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, Poisson};

use crate::error::{param, Result};
use crate::special::ln_add_exp;

/// Natural log of a Gamma(shape, 1) variate.
///
/// Shapes below one use `G(a) = G(a + 1) · U^{1/a}`, evaluated as
/// `ln G(a + 1) + ln U / a`, which stays finite even when `G(a)` itself
/// underflows.
pub fn sample_log_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return param(format!("gamma shape must be positive and finite, got {shape}"));
    }
    Ok(log_gamma_unchecked(shape, rng))
}

pub(crate) fn log_gamma_unchecked<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        log_gamma_at_least_one(shape + 1.0, rng) + u.ln() / shape
    } else {
        log_gamma_at_least_one(shape, rng)
    }
}

fn log_gamma_at_least_one<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0).expect("shape checked by caller");
    g.sample(rng).ln()
}

/// Draws `(ln Y, ln(1 - Y))` for `Y ~ Beta(a, b)` from a ratio of Gamma
/// variates kept in log space.
pub fn sample_log_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return param(format!("beta shapes must be positive and finite, got ({a}, {b})"));
    }
    let la = log_gamma_unchecked(a, rng);
    let lb = log_gamma_unchecked(b, rng);
    Ok(log_beta_from_log_gammas(la, lb))
}

#[inline]
pub(crate) fn log_beta_from_log_gammas(la: f64, lb: f64) -> (f64, f64) {
    let total = ln_add_exp(la, lb);
    (la - total, lb - total)
}

/// Converts `(ln y, ln(1 - y))` to `y`, using whichever log is more accurate
/// and keeping the result inside the open unit interval.
#[inline]
pub(crate) fn unit_from_logs(ln_y: f64, ln_1my: f64) -> f64 {
    let y = if ln_y < -std::f64::consts::LN_2 { ln_y.exp() } else { -ln_1my.exp_m1() };
    y.clamp(f64::from_bits(1), 1.0 - f64::EPSILON / 2.0)
}

/// One draw from Beta(a, b).
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let (ly, l1y) = sample_log_beta(a, b, rng)?;
    Ok(unit_from_logs(ly, l1y))
}

/// Poisson variate that also accepts a zero mean.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    if !(mean > 0.0) || !mean.is_finite() || mean > Poisson::<f64>::MAX_LAMBDA {
        return param(format!("Poisson mean out of range: {mean}"));
    }
    let d = Poisson::new(mean).expect("mean checked");
    Ok(d.sample(rng) as u64)
}
