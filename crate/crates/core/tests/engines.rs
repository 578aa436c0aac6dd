use std::f64::consts::PI;

use pdbrw::brw::{
    branch_direct, log_sum_exp, run, select_weighted_without_replacement, Beta, BrwConfig, Engine,
    PopulationState, Variant,
};
use pdbrw::estimators::estimate_speed;
use pdbrw::rng::{seed_stream, McContext};
use pdbrw::stats::{correlation, ks_statistic};

fn arcsine_cdf(x: f64) -> f64 {
    2.0 / PI * x.sqrt().asin()
}

/// Weight of the first selected child relative to the whole child cloud;
/// the unexposed tail enters through its expected weight.
fn first_selected_weight(config: &BrwConfig, seed: u64, n: usize) -> Vec<f64> {
    let beta = config.beta.finite().unwrap();
    let state = PopulationState::zeros(config.n_particles).unwrap();
    let mut rng = seed_stream(seed, 0);
    (0..n)
        .map(|_| {
            let mut children = branch_direct(&state, config, &mut rng).unwrap();
            let logs: Vec<f64> = children.points.iter().map(|x| beta * x).collect();
            let total = log_sum_exp(&logs).unwrap().exp() + children.tail_weight_bound;
            let order =
                select_weighted_without_replacement(&mut children, config.n_particles, beta, &mut rng).unwrap();
            (beta * children.point(order[0])).exp() / total
        })
        .collect()
}

#[test]
fn first_selected_weight_is_arcsine_at_beta_two() {
    let config = BrwConfig::new(20, Beta::Finite(2.0)).unwrap();
    let w = first_selected_weight(&config, 401, 30_000);
    let ks = ks_statistic(&w, arcsine_cdf);
    assert!(ks < 0.0125, "KS {ks}");
}

#[test]
fn increments_agree_between_direct_and_pd_exact() {
    let direct = BrwConfig::new(10, Beta::Finite(2.0)).unwrap();
    let reference = estimate_speed(&direct, 20_000, 2, &McContext::new(402)).unwrap();
    for (sticks, steps) in [(1_000, 20_000), (10_000, 4_000), (100_000, 600)] {
        let pd = direct.clone().with_engine(Engine::PdExact).unwrap().with_n_sticks(sticks);
        let r = estimate_speed(&pd, steps, 1, &McContext::new(403)).unwrap();
        let joint = (r.std_error.powi(2) + reference.std_error.powi(2)).sqrt();
        assert!(
            (r.estimate - reference.estimate).abs() < 4.0 * joint,
            "n_sticks {sticks}: {} vs {} (joint se {joint})",
            r.estimate,
            reference.estimate
        );
    }
}

#[test]
fn single_particle_step_means_agree() {
    let direct = BrwConfig::new(1, Beta::Finite(2.0)).unwrap();
    let pd = direct.clone().with_engine(Engine::PdExact).unwrap().with_n_sticks(2_000);
    let a = estimate_speed(&direct, 20_000, 2, &McContext::new(404)).unwrap();
    let b = estimate_speed(&pd, 20_000, 1, &McContext::new(405)).unwrap();
    let joint = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() < 4.0 * joint, "{} vs {}", a.estimate, b.estimate);
}

#[test]
fn parent_labels_are_independent_across_generations() {
    for engine in [Engine::Direct, Engine::PdExact] {
        let config = BrwConfig::new(5, Beta::Finite(1.5)).unwrap().with_engine(engine).unwrap().with_n_sticks(1000);
        let out = run(&config, 10_000, None, &mut seed_stream(406, 0)).unwrap();
        let labels: Vec<f64> = out.genealogy.parents.iter().map(|p| p[0] as f64).collect();
        let r = correlation(&labels[..labels.len() - 1], &labels[1..]);
        assert!(r.abs() < 0.03, "{engine:?}: correlation {r}");
    }
}

#[test]
fn exponential_model_runs_drop_first_variant() {
    let config = BrwConfig::new(6, Beta::Infinite).unwrap().with_variant(Variant::DropFirstSampled);
    let out = run(&config, 50, None, &mut seed_stream(407, 0)).unwrap();
    assert_eq!(out.states.len(), 51);
    assert!(out.states.iter().all(|s| s.len() == 6));
    assert!(out.genealogy.parents.iter().flatten().all(|&p| p < 6));
}
