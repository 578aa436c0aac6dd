use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::partition::{coag, Partition};
use super::trajectory::CoalescentTrajectory;
use crate::error::{param, Error, Result};
use crate::io::{fmt_f64, write_csv};
use crate::special::{ln_beta, ln_binomial, ln_gamma, tanh_sinh};

/// Absolute accuracy target of quadrature-based rates.
const QUAD_TOL: f64 = 1e-10;

/// Density callback receiving `(x, 1 - x)`.
pub type Density = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Finite measure Λ on [0, 1] driving a Λ-coalescent.
#[derive(Clone)]
pub enum LambdaMeasure {
    /// Beta(2-λ, λ) probability measure, `λ ∈ (0, 2)`; `λ = 1` is uniform
    /// (Bolthausen-Sznitman).
    BetaFamily { lambda: f64 },
    /// Unit point mass at zero.
    Kingman,
    /// Absolutely continuous measure with the given density and total mass.
    General { density: Density, total_mass: f64 },
}

impl fmt::Debug for LambdaMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaMeasure::BetaFamily { lambda } => write!(f, "BetaFamily({lambda})"),
            LambdaMeasure::Kingman => write!(f, "Kingman"),
            LambdaMeasure::General { total_mass, .. } => write!(f, "General(mass={total_mass})"),
        }
    }
}

impl LambdaMeasure {
    pub fn beta(lambda: f64) -> Result<Self> {
        let m = LambdaMeasure::BetaFamily { lambda };
        m.validate()?;
        Ok(m)
    }

    pub fn bolthausen_sznitman() -> Self {
        LambdaMeasure::BetaFamily { lambda: 1.0 }
    }

    pub fn general<F>(density: F, total_mass: f64) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let m = LambdaMeasure::General { density: Arc::new(density), total_mass };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LambdaMeasure::BetaFamily { lambda } => {
                if !(*lambda > 0.0 && *lambda < 2.0) {
                    return param(format!("beta-family lambda must lie in (0,2), got {lambda}"));
                }
            }
            LambdaMeasure::Kingman => {}
            LambdaMeasure::General { total_mass, .. } => {
                if !(*total_mass > 0.0) || !total_mass.is_finite() {
                    return param("general measure needs a positive finite total mass");
                }
            }
        }
        Ok(())
    }

    /// `Λ(dx)/dx` at `x` (with `xc = 1 - x`); `None` for the point mass.
    pub fn density(&self, x: f64, xc: f64) -> Option<f64> {
        match self {
            LambdaMeasure::BetaFamily { lambda } => Some(beta_density(*lambda, 0.0, 0.0, x, xc)),
            LambdaMeasure::Kingman => None,
            LambdaMeasure::General { density, .. } => Some(density(x, xc)),
        }
    }
}

/// `x^{p} (1-x)^{q}` times the Beta(2-λ, λ) density, evaluated in log space.
fn beta_density(lambda: f64, p: f64, q: f64, x: f64, xc: f64) -> f64 {
    let ln = (1.0 - lambda + p) * x.ln() + (lambda - 1.0 + q) * xc.ln()
        - ln_gamma(lambda)
        - ln_gamma(2.0 - lambda);
    ln.exp()
}

fn check_bk(b: usize, k: usize) -> Result<()> {
    if b < 2 || k < 2 || k > b {
        return param(format!("rates need 2 <= k <= b, got b={b}, k={k}"));
    }
    Ok(())
}

/// `λ_{b,k} = ∫ x^{k-2} (1-x)^{b-k} Λ(dx)`: closed form for the Beta family
/// and Kingman, quadrature for general measures.
pub fn lambda_rate(b: usize, k: usize, measure: &LambdaMeasure) -> Result<f64> {
    check_bk(b, k)?;
    measure.validate()?;
    match measure {
        LambdaMeasure::BetaFamily { lambda } => {
            let (b, k) = (b as f64, k as f64);
            Ok((ln_beta(k - lambda, b - k + lambda) - ln_beta(2.0 - lambda, *lambda)).exp())
        }
        LambdaMeasure::Kingman => Ok(if k == 2 { 1.0 } else { 0.0 }),
        LambdaMeasure::General { .. } => quadrature_rate(b, k, measure),
    }
}

/// `λ_{b,k}` by tanh-sinh quadrature of the density (absolute accuracy
/// about 1e-10). The Kingman point mass has no density and is refused.
pub fn quadrature_rate(b: usize, k: usize, measure: &LambdaMeasure) -> Result<f64> {
    check_bk(b, k)?;
    measure.validate()?;
    let (p, q) = ((k - 2) as f64, (b - k) as f64);
    let q = match measure {
        LambdaMeasure::BetaFamily { lambda } => {
            let l = *lambda;
            tanh_sinh(|x, xc| beta_density(l, p, q, x, xc), QUAD_TOL)
        }
        LambdaMeasure::General { density, .. } => {
            tanh_sinh(|x, xc| x.powf(p) * xc.powf(q) * density(x, xc), QUAD_TOL)
        }
        LambdaMeasure::Kingman => return param("the Kingman measure has no density"),
    };
    if !q.value.is_finite() {
        return Err(Error::Internal(format!("quadrature failed for b={b}, k={k}")));
    }
    Ok(q.value)
}

/// `λ_{b,k}` for `2 <= k <= b <= b_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub b_max: usize,
    rates: Vec<Vec<f64>>,
}

impl RateTable {
    pub fn new(measure: &LambdaMeasure, b_max: usize) -> Result<Self> {
        if b_max < 2 {
            return param("rate tables need b_max >= 2");
        }
        let mut rates = vec![Vec::new(); b_max + 1];
        for (b, row) in rates.iter_mut().enumerate().skip(2) {
            *row = (2..=b).map(|k| lambda_rate(b, k, measure)).collect::<Result<_>>()?;
        }
        Ok(Self { b_max, rates })
    }

    pub fn get(&self, b: usize, k: usize) -> f64 {
        self.rates[b][k - 2]
    }

    /// Largest relative violation of `λ_{b,k} = λ_{b+1,k} + λ_{b+1,k+1}`.
    pub fn recursion_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in 2..self.b_max {
            for k in 2..=b {
                let lhs = self.get(b, k);
                let rhs = self.get(b + 1, k) + self.get(b + 1, k + 1);
                let scale = lhs.abs().max(f64::MIN_POSITIVE);
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
        worst
    }

    /// Total event rate `λ_b = Σ_k C(b,k) λ_{b,k}` with `b` blocks.
    pub fn total_rate(&self, b: usize) -> f64 {
        (2..=b).map(|k| binomial(b, k) * self.get(b, k)).sum()
    }

    /// CSV with columns `b,k,rate`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = (2..=self.b_max).flat_map(|b| {
            (2..=b).map(move |k| vec![b.to_string(), k.to_string(), fmt_f64(self.get(b, k))])
        });
        write_csv(w, &["b", "k", "rate"], rows)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    ln_binomial(n as u64, k as u64).exp()
}

/// Law of the size of the first merger starting from `n` blocks:
/// `C(n,k) λ_{n,k} / λ_n` for `k = 2..=n` (index 0 is `k = 2`).
pub fn first_merger_distribution(n: usize, measure: &LambdaMeasure) -> Result<Vec<f64>> {
    if n < 2 {
        return param("first merger needs n >= 2");
    }
    let raw: Vec<f64> = (2..=n)
        .map(|k| Ok(binomial(n, k) * lambda_rate(n, k, measure)?))
        .collect::<Result<_>>()?;
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|r| r / total).collect())
}

/// Continuous-time Λ-coalescent from `n` singletons until one block remains.
pub fn simulate_lambda_coalescent<R: Rng + ?Sized>(
    n: usize,
    measure: &LambdaMeasure,
    rng: &mut R,
) -> Result<CoalescentTrajectory> {
    if n < 2 {
        return param("coalescent simulation needs n >= 2");
    }
    let table = RateTable::new(measure, n)?;
    let mut traj = CoalescentTrajectory::new(Partition::singletons(n));
    let mut time = 0.0;
    while traj.last().n_blocks() > 1 {
        let b = traj.last().n_blocks();
        let weights: Vec<f64> = (2..=b).map(|k| binomial(b, k) * table.get(b, k)).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Internal(format!("nonpositive event rate with {b} blocks")));
        }
        time += Exp::new(total).expect("positive rate").sample(rng);
        let mut u = rng.random::<f64>() * total;
        let mut k = b;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                k = i + 2;
                break;
            }
            u -= w;
        }
        let chosen = sample_indices(rng, b, k).into_vec();
        let mut labels: Vec<usize> = (0..b).collect();
        let target = *chosen.iter().min().expect("k >= 2");
        for &c in &chosen {
            labels[c] = target;
        }
        let merger = Partition::from_labels(&labels);
        let next = coag(traj.last(), &merger)?;
        traj.push(time, next);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn bolthausen_sznitman_closed_form() {
        let bs = LambdaMeasure::bolthausen_sznitman();
        assert!((lambda_rate(3, 2, &bs).unwrap() - 0.5).abs() < 1e-14);
        assert!((lambda_rate(3, 3, &bs).unwrap() - 0.5).abs() < 1e-14);
        for b in 2..=30 {
            for k in 2..=b {
                let exact = factorial(k - 2) * factorial(b - k) / factorial(b - 1);
                assert!((lambda_rate(b, k, &bs).unwrap() / exact - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn total_mass_is_one() {
        for l in [0.3, 1.0, 1.7] {
            assert!((lambda_rate(2, 2, &LambdaMeasure::beta(l).unwrap()).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let m = LambdaMeasure::beta(1.5).unwrap();
        let closed = lambda_rate(4, 3, &m).unwrap();
        let expected = (ln_beta(1.5, 2.5) - ln_beta(0.5, 1.5)).exp();
        assert!((closed - expected).abs() < 1e-15);
        assert!((quadrature_rate(4, 3, &m).unwrap() - closed).abs() < 1e-8);
    }

    #[test]
    fn general_measure_uses_quadrature() {
        // uniform density written as a general measure
        let m = LambdaMeasure::general(|_, _| 1.0, 1.0).unwrap();
        let bs = LambdaMeasure::bolthausen_sznitman();
        for (b, k) in [(3, 2), (5, 3), (10, 10)] {
            let a = lambda_rate(b, k, &m).unwrap();
            let e = lambda_rate(b, k, &bs).unwrap();
            assert!((a - e).abs() < 1e-10, "{b} {k}: {a} vs {e}");
        }
    }

    #[test]
    fn invalid_arguments() {
        let bs = LambdaMeasure::bolthausen_sznitman();
        assert!(lambda_rate(1, 2, &bs).is_err());
        assert!(lambda_rate(3, 4, &bs).is_err());
        assert!(lambda_rate(3, 1, &bs).is_err());
        assert!(LambdaMeasure::beta(2.0).is_err());
        assert!(quadrature_rate(3, 2, &LambdaMeasure::Kingman).is_err());
    }

    #[test]
    fn recursion_holds() {
        for l in [0.5, 1.0, 1.5] {
            let t = RateTable::new(&LambdaMeasure::beta(l).unwrap(), 31).unwrap();
            assert!(t.recursion_error() < 1e-10, "lambda {l}: {}", t.recursion_error());
        }
    }

    #[test]
    fn first_merger_laws() {
        let d = first_merger_distribution(3, &LambdaMeasure::bolthausen_sznitman()).unwrap();
        assert!((d[0] - 0.75).abs() < 1e-14 && (d[1] - 0.25).abs() < 1e-14);
        let d = first_merger_distribution(6, &LambdaMeasure::Kingman).unwrap();
        assert_eq!(d, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let d = first_merger_distribution(20, &LambdaMeasure::beta(0.7).unwrap()).unwrap();
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kingman_pair_time_is_unit_exponential() {
        let mut rng = seed_stream(71, 0);
        let n = 100_000;
        let total: f64 = (0..n)
            .map(|_| *simulate_lambda_coalescent(2, &LambdaMeasure::Kingman, &mut rng).unwrap().times.last().unwrap())
            .sum();
        assert!((total / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn bolthausen_sznitman_triple_probability() {
        let mut rng = seed_stream(72, 0);
        let n = 100_000;
        let bs = LambdaMeasure::bolthausen_sznitman();
        let mut triples = 0;
        for _ in 0..n {
            let t = simulate_lambda_coalescent(3, &bs, &mut rng).unwrap();
            assert!(t.states.windows(2).all(|w| w[1].n_blocks() < w[0].n_blocks()));
            if t.first_merger().unwrap().1 == 3 {
                triples += 1;
            }
        }
        assert!((triples as f64 / n as f64 - 0.25).abs() < 0.005);
    }

    #[test]
    fn rate_csv_contains_bs_value() {
        let t = RateTable::new(&LambdaMeasure::bolthausen_sznitman(), 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("b,k,rate\n2,2,"));
        let row = s.lines().find(|l| l.starts_with("3,2,")).unwrap();
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }
}
