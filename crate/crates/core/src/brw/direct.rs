use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};

use super::marks::MarkSampler;
use super::{finish_step, lse, BrwConfig, Engine, PopulationState, StepOutcome};
use crate::distributions::{poisson, ppp_band_into, DEFAULT_MAX_ATOMS};
use crate::error::{param, Error, Result};
use crate::special::ln_add_exp;

const EXTRA_POINTS: usize = 64;
const MAX_DEEPENING: usize = 8;

/// Child cloud of one generation, relative to the parents' `x_eq`.
///
/// `points` hold every child above `cutoff`, decreasing when produced by
/// [`branch_direct`]. Children below the cutoff are
/// not listed; their expected total selection weight is `tail_weight_bound`
/// and [`select_weighted_without_replacement`] realizes the ones that can
/// matter by thinning. Those appear in `tail_points`, and selection indices
/// at or beyond `points.len()` refer to them.
#[derive(Debug, Clone)]
pub struct ChildPointsSample {
    /// `x_eq` of the parent generation; absolute child positions are
    /// `origin + point`.
    pub origin: f64,
    pub points: Vec<f64>,
    /// 0-based parent index of every explicit point (empty when marks are
    /// drawn lazily for the selected children only).
    pub parent_marks: Vec<u32>,
    pub cutoff: f64,
    pub tail_weight_bound: f64,
    pub tail_points: Vec<f64>,
    pub tail_marks: Vec<u32>,
    marks: MarkSampler,
}

impl ChildPointsSample {
    /// A child cloud given explicitly, with nothing below the last point.
    pub fn from_points(origin: f64, points: Vec<f64>, parent_marks: Vec<u32>) -> Result<Self> {
        if parent_marks.len() != points.len() {
            return param("one parent mark per point is required");
        }
        if points.windows(2).any(|w| w[0] < w[1]) {
            return param("points must be decreasing");
        }
        let cutoff = points.last().copied().unwrap_or(f64::NEG_INFINITY);
        Ok(Self {
            origin,
            points,
            parent_marks,
            cutoff,
            tail_weight_bound: 0.0,
            tail_points: Vec::new(),
            tail_marks: Vec::new(),
            marks: MarkSampler::Single,
        })
    }

    /// Relative position of the child with selection index `idx`.
    pub fn point(&self, idx: usize) -> f64 {
        if idx < self.points.len() {
            self.points[idx]
        } else {
            self.tail_points[idx - self.points.len()]
        }
    }

    /// Parent of the child with selection index `idx`.
    pub fn mark(&self, idx: usize) -> u32 {
        if idx < self.points.len() {
            self.parent_marks[idx]
        } else {
            self.tail_marks[idx - self.points.len()]
        }
    }

    /// `tail_weight_bound / Σ e^{β·point}` over the explicit points.
    pub fn truncation_ratio(&self, beta: f64) -> f64 {
        let w: Vec<f64> = self.points.iter().map(|x| beta * x).collect();
        (self.tail_weight_bound.ln() - lse(&w)).exp()
    }
}

fn check_direct(state: &PopulationState, config: &BrwConfig) -> Result<f64> {
    config.validate()?;
    if config.engine != Engine::Direct {
        return param("direct step called with another engine configured");
    }
    if state.len() != config.n_particles {
        return param("state size differs from n_particles");
    }
    config.beta.finite().ok_or_else(|| Error::Parameter("direct engine needs finite beta".into()))
}

/// Samples the child cloud: the top `n_selected + 64` points from Poisson
/// arrival times, then bands below the cutoff until the relative tail
/// weight drops under `truncation_epsilon` or the explicit-child budget
/// runs out. Each point gets an i.i.d. parent mark.
pub fn branch_direct<R: Rng + ?Sized>(
    state: &PopulationState,
    config: &BrwConfig,
    rng: &mut R,
) -> Result<ChildPointsSample> {
    let beta = check_direct(state, config)?;
    let marks = MarkSampler::from_positions(&state.positions)?;
    let mut children = branch_points(state.x_eq, config, beta, marks, true, rng)?;
    let sampler = children.marks.clone();
    children.parent_marks = (0..children.points.len()).map(|_| sampler.sample(rng)).collect();
    Ok(children)
}

fn branch_points<R: Rng + ?Sized>(
    origin: f64,
    config: &BrwConfig,
    beta: f64,
    marks: MarkSampler,
    sorted: bool,
    rng: &mut R,
) -> Result<ChildPointsSample> {
    let k0 = config.n_selected() + EXTRA_POINTS;
    let budget = config.effective_max_children();
    let mut points = Vec::with_capacity(budget);
    crate::distributions::ppp_top_k_into(k0, rng, &mut points);
    let mut cutoff = points[k0 - 1];
    let mut log_weight = {
        let w: Vec<f64> = points.iter().map(|x| beta * x).collect();
        lse(&w)
    };
    let log_eps = config.truncation_epsilon.ln();
    let b1 = beta - 1.0;
    // about e^{-c} points lie above c
    let floor = -(budget as f64).ln();
    for _ in 0..MAX_DEEPENING {
        let log_tail = b1 * cutoff - b1.ln();
        if log_tail <= log_eps + log_weight {
            break;
        }
        let target = ((log_eps + log_weight + b1.ln()) / b1).max(floor);
        if !(target < cutoff) {
            break;
        }
        let start = points.len();
        ppp_band_into(target, cutoff, DEFAULT_MAX_ATOMS, rng, &mut points)?;
        if sorted {
            points[start..].sort_unstable_by(|a, b| b.total_cmp(a));
        }
        if points.len() > start {
            let w: Vec<f64> = points[start..].iter().map(|x| beta * x).collect();
            log_weight = ln_add_exp(log_weight, lse(&w));
        }
        cutoff = target;
    }
    let tail_weight_bound = (b1 * cutoff).exp() / b1;
    Ok(ChildPointsSample {
        origin,
        points,
        parent_marks: Vec::new(),
        cutoff,
        tail_weight_bound,
        tail_points: Vec::new(),
        tail_marks: Vec::new(),
        marks,
    })
}

/// Samples `n_select` children sequentially without replacement with
/// probability proportional to `e^{β·point}` and returns their indices in
/// sampling order.
///
/// Implemented as an exponential race: child `x` finishes at time
/// `E_x e^{-βx}` with `E_x` standard exponential, and finishing order is
/// the sampling order. Children below the cutoff finishing before the
/// `n_select`-th explicit child are generated by thinning a dominating
/// Poisson process, so the unlisted tail is accounted for exactly.
pub fn select_weighted_without_replacement<R: Rng + ?Sized>(
    children: &mut ChildPointsSample,
    n_select: usize,
    beta: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    select_inner(children, n_select, beta, 1e8, true, rng)
}

fn select_inner<R: Rng + ?Sized>(
    children: &mut ChildPointsSample,
    n_select: usize,
    beta: f64,
    max_tail_proposals: f64,
    tail_marks: bool,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if !(beta > 1.0) || !beta.is_finite() {
        return param(format!("selection needs finite beta > 1, got {beta}"));
    }
    let m = children.points.len();
    if n_select == 0 || m < n_select {
        return Err(Error::Internal(format!(
            "{m} explicit children cannot supply {n_select} selections"
        )));
    }
    // key = -ln(race time) = βx - ln E, encoded so that ascending integer
    // order is descending key order with ties broken by index
    let mut ranked: Vec<(u64, u32)> = children
        .points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let e: f64 = Exp1.sample(rng);
            (descending_bits(beta * x - e.ln()), i as u32)
        })
        .collect();
    ranked.select_nth_unstable(n_select - 1);
    let kstar = from_descending_bits(ranked[n_select - 1].0);
    ranked.truncate(n_select);

    children.tail_points.clear();
    children.tail_marks.clear();
    if children.tail_weight_bound > 0.0 {
        let log_mean = children.tail_weight_bound.ln() - kstar;
        if log_mean > max_tail_proposals.ln() {
            return Err(Error::Resource(format!(
                "tail thinning would need e^{log_mean:.2} proposals; raise truncation_epsilon \
                 or max_children"
            )));
        }
        let count = poisson(log_mean.exp(), rng)?;
        let b1 = beta - 1.0;
        for _ in 0..count {
            let u: f64 = rng.sample(Open01);
            let log_tau = u.ln() - kstar;
            let e: f64 = Exp1.sample(rng);
            let x = children.cutoff - e / b1;
            let accept: f64 = rng.sample(Open01);
            if accept < (-(log_tau + beta * x).exp()).exp() {
                ranked.push((descending_bits(-log_tau), (m + children.tail_points.len()) as u32));
                children.tail_points.push(x);
                if tail_marks {
                    let mark = children.marks.sample(rng);
                    children.tail_marks.push(mark);
                }
            }
        }
        if ranked.len() > n_select {
            ranked.select_nth_unstable(n_select - 1);
            ranked.truncate(n_select);
        }
    }
    ranked.sort_unstable();
    Ok(ranked.into_iter().map(|(_, i)| i as usize).collect())
}

/// Order-reversing map from finite floats to integers.
#[inline]
fn descending_bits(k: f64) -> u64 {
    let b = k.to_bits();
    let ascending = if b >> 63 == 1 { !b } else { b | (1 << 63) };
    !ascending
}

#[inline]
fn from_descending_bits(d: u64) -> f64 {
    let a = !d;
    f64::from_bits(if a >> 63 == 1 { a & !(1 << 63) } else { !a })
}

/// One generation with the direct engine.
pub fn step_direct<R: Rng + ?Sized>(
    state: &PopulationState,
    config: &BrwConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    let beta = check_direct(state, config)?;
    let marks = MarkSampler::from_positions(&state.positions)?;
    let mut children = branch_points(state.x_eq, config, beta, marks, false, rng)?;
    let n_sel = config.n_selected();
    let order =
        select_inner(&mut children, n_sel, beta, config.max_tail_proposals, false, rng)?;
    let relative: Vec<f64> = order.iter().map(|&i| children.point(i)).collect();
    let parents: Vec<u32> = (0..n_sel).map(|_| children.marks.sample(rng)).collect();
    Ok(finish_step(state, config, relative, parents))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brw::{Beta, Variant};
    use crate::rng::seed_stream;

    fn cfg(n: usize, beta: f64) -> BrwConfig {
        BrwConfig::new(n, Beta::Finite(beta)).unwrap()
    }

    #[test]
    fn key_encoding_reverses_order() {
        let ks = [-1e300, -2.5, -0.0, 0.0, 1e-300, 3.0, 7e200];
        for w in ks.windows(2) {
            assert!(descending_bits(w[0]) >= descending_bits(w[1]));
        }
        for k in ks {
            assert_eq!(from_descending_bits(descending_bits(k)).to_bits(), k.to_bits());
        }
    }

    #[test]
    fn single_parent_marks_are_all_zero() {
        let state = PopulationState::zeros(1).unwrap();
        let mut rng = seed_stream(31, 0);
        let c = branch_direct(&state, &cfg(1, 2.0), &mut rng).unwrap();
        assert!(c.parent_marks.iter().all(|&m| m == 0));
        assert!(c.points.len() >= 65);
        assert!(c.points.windows(2).all(|w| w[0] > w[1]));
        assert!(c.points.iter().all(|&x| x >= c.cutoff));
    }

    fn mark_frequency(positions: Vec<f64>, seed: u64) -> f64 {
        let state = PopulationState::new(positions).unwrap();
        let mut rng = seed_stream(seed, 0);
        let (mut hits, mut total) = (0usize, 0usize);
        for _ in 0..400 {
            let c = branch_direct(&state, &cfg(2, 2.0), &mut rng).unwrap();
            hits += c.parent_marks.iter().filter(|&&m| m == 0).count();
            total += c.parent_marks.len();
        }
        hits as f64 / total as f64
    }

    #[test]
    fn symmetric_parents_share_marks_evenly() {
        let f = mark_frequency(vec![0.0, 0.0], 32);
        assert!((f - 0.5).abs() < 0.005, "{f}");
    }

    #[test]
    fn mark_law_follows_exponential_weights() {
        let f = mark_frequency(vec![2f64.ln(), 0.0], 33);
        assert!((f - 2.0 / 3.0).abs() < 0.005, "{f}");
    }

    #[test]
    fn selection_equal_weights() {
        let mut rng = seed_stream(34, 0);
        let n = 100_000;
        let mut first = 0;
        for _ in 0..n {
            let mut c = ChildPointsSample::from_points(0.0, vec![0.0, 0.0], vec![0, 0]).unwrap();
            if select_weighted_without_replacement(&mut c, 1, 2.0, &mut rng).unwrap()[0] == 0 {
                first += 1;
            }
        }
        assert!((first as f64 / n as f64 - 0.5).abs() < 0.005);
    }

    #[test]
    fn selection_three_to_one_weights() {
        let beta = 2.0;
        let pts = vec![3f64.ln() / beta, 0.0];
        let mut rng = seed_stream(35, 0);
        let n = 100_000;
        let (mut single_first, mut order_12) = (0, 0);
        for _ in 0..n {
            let mut c = ChildPointsSample::from_points(0.0, pts.clone(), vec![0, 0]).unwrap();
            if select_weighted_without_replacement(&mut c, 1, beta, &mut rng).unwrap()[0] == 0 {
                single_first += 1;
            }
            let mut c = ChildPointsSample::from_points(0.0, pts.clone(), vec![0, 0]).unwrap();
            let o = select_weighted_without_replacement(&mut c, 2, beta, &mut rng).unwrap();
            assert_eq!(o.len(), 2);
            if o == vec![0, 1] {
                order_12 += 1;
            }
        }
        assert!((single_first as f64 / n as f64 - 0.75).abs() < 0.005);
        assert!((order_12 as f64 / n as f64 - 0.75).abs() < 0.005);
    }

    #[test]
    fn insufficient_children_is_internal_error() {
        let mut rng = seed_stream(36, 0);
        let mut c = ChildPointsSample::from_points(0.0, vec![0.0], vec![0]).unwrap();
        let e = select_weighted_without_replacement(&mut c, 2, 2.0, &mut rng).unwrap_err();
        assert!(matches!(e, Error::Internal(_)));
    }

    #[test]
    fn step_contract() {
        let config = cfg(20, 1.5);
        let state = PopulationState::zeros(20).unwrap();
        let mut rng = seed_stream(37, 0);
        let out = step_direct(&state, &config, &mut rng).unwrap();
        assert_eq!(out.state.generation, 1);
        assert_eq!(out.parents.len(), 20);
        assert_eq!(out.state.positions.len(), 20);
        assert!(out.parents.iter().all(|&p| p < 20));
        let lse_check = lse(&out.state.positions);
        assert!((lse_check - out.state.x_eq).abs() < 1e-12 * lse_check.abs().max(1.0));
    }

    #[test]
    fn translation_equivariance() {
        let config = cfg(30, 2.0).with_variant(Variant::DropFirstSampled);
        let base: Vec<f64> = (0..30).map(|i| (i as f64 * 0.731).sin()).collect();
        let c = 57.25;
        let a = PopulationState::new(base.clone()).unwrap();
        let b = PopulationState::new(base.iter().map(|x| x + c).collect()).unwrap();
        let oa = step_direct(&a, &config, &mut seed_stream(38, 1)).unwrap();
        let ob = step_direct(&b, &config, &mut seed_stream(38, 1)).unwrap();
        assert_eq!(oa.parents, ob.parents);
        for (x, y) in oa.state.positions.iter().zip(&ob.state.positions) {
            assert!((y - x - c).abs() < 1e-12 * c);
        }
        assert!((oa.increment - ob.increment).abs() < 1e-12 * c);
    }

    #[test]
    fn deepening_reaches_epsilon_with_generous_budget() {
        let mut config = cfg(10, 5.0);
        config.max_children = Some(1_000_000);
        let state = PopulationState::zeros(10).unwrap();
        let mut rng = seed_stream(39, 0);
        for _ in 0..20 {
            let c = branch_direct(&state, &config, &mut rng).unwrap();
            assert!(c.truncation_ratio(5.0) <= config.truncation_epsilon);
        }
    }

    #[test]
    fn tail_is_realized_when_budget_is_tight() {
        // With the explicit band at its minimum the thinning step must
        // still produce the right law: the first pick's normalized weight
        // is Beta(1 - 1/β, 1/β), mean 1 - 1/β.
        let mut config = cfg(1, 1.5);
        config.max_children = Some(0);
        let state = PopulationState::zeros(1).unwrap();
        let mut rng = seed_stream(40, 0);
        let n = 40_000;
        let mut sum = 0.0;
        let mut realized = 0usize;
        for _ in 0..n {
            let mut c = branch_points(0.0, &config, 1.5, MarkSampler::Single, false, &mut rng).unwrap();
            let o = select_inner(&mut c, 1, 1.5, 1e8, false, &mut rng).unwrap();
            realized += c.tail_points.len();
            let w: Vec<f64> = c.points.iter().map(|x| 1.5 * x).collect();
            let total = (lse(&w)).exp() + c.tail_weight_bound;
            sum += (1.5 * c.point(o[0])).exp() / total;
        }
        assert!(realized > 0);
        let mean = sum / n as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.006, "{mean}");
        let _ = state;
    }
}
