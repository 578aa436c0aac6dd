use std::collections::HashMap;

use pdbrw::brw::{run, Beta, BrwConfig, Engine};
use pdbrw::coalescent::{
    ancestral_partition, multinomial_coalescent_step, restrict, sample_pd_weights, Partition, PdWeights,
};
use pdbrw::distributions::PdParams;
use pdbrw::rng::{seed_stream, McContext};
use pdbrw::stats::RunningStats;

fn total_variation(a: &HashMap<String, u64>, b: &HashMap<String, u64>, n: f64) -> f64 {
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (*a.get(k).unwrap_or(&0) as f64 - *b.get(k).unwrap_or(&0) as f64).abs() / n)
        .sum::<f64>()
        / 2.0
}

fn relabel(p: &Partition, sigma: &[usize]) -> Partition {
    let blocks = p.blocks().iter().map(|b| b.iter().map(|&i| sigma[i]).collect()).collect();
    Partition::from_blocks(p.n(), blocks).unwrap()
}

#[test]
fn multinomial_step_is_exchangeable() {
    let mut rng = seed_stream(301, 0);
    let weights = sample_pd_weights(PdParams::new(0.5, 0.0).unwrap(), 6, &mut rng).unwrap();
    let sigma = [2, 0, 3, 1];
    let start = Partition::singletons(4);
    let reps = 200_000;
    let mut plain = HashMap::new();
    let mut permuted = HashMap::new();
    for _ in 0..reps {
        let p = multinomial_coalescent_step(&start, &weights, &mut rng).unwrap();
        *plain.entry(p.to_string()).or_insert(0u64) += 1;
        let q = multinomial_coalescent_step(&start, &weights, &mut rng).unwrap();
        *permuted.entry(relabel(&q, &sigma).to_string()).or_insert(0u64) += 1;
    }
    let tv = total_variation(&plain, &permuted, reps as f64);
    assert!(tv < 0.01, "total variation {tv}");
}

#[test]
fn stepping_commutes_with_restriction_in_law() {
    let mut rng = seed_stream(302, 0);
    let weights = PdWeights::from_weights(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let pi: Partition = "1 4|2|3 5|6".parse().unwrap();
    let m = 3;
    let reps = 100_000;
    let mut after = HashMap::new();
    let mut before = HashMap::new();
    for _ in 0..reps {
        let stepped = multinomial_coalescent_step(&pi, &weights, &mut rng).unwrap();
        *after.entry(restrict(&stepped, m).unwrap().to_string()).or_insert(0u64) += 1;
        let small = restrict(&pi, m).unwrap();
        let stepped = multinomial_coalescent_step(&small, &weights, &mut rng).unwrap();
        *before.entry(stepped.to_string()).or_insert(0u64) += 1;
    }
    let tv = total_variation(&after, &before, reps as f64);
    assert!(tv < 0.01, "total variation {tv}");
}

#[test]
fn pair_merge_given_weights_is_collision_probability() {
    let weights = PdWeights::from_weights(vec![0.5, 0.3, 0.2]).unwrap();
    let mut rng = seed_stream(303, 0);
    let reps = 100_000;
    let merged = (0..reps)
        .filter(|_| {
            multinomial_coalescent_step(&Partition::singletons(2), &weights, &mut rng).unwrap().n_blocks() == 1
        })
        .count() as f64
        / reps as f64;
    let c = weights.collision_probability();
    assert!((c - 0.38).abs() < 1e-15);
    assert!((merged - c).abs() < 4.0 * (c * (1.0 - c) / reps as f64).sqrt(), "{merged} vs {c}");
}

/// Two individuals of the last generation share a parent with probability
/// `Σ θ_i^2`, where `θ_i ∝ e^{X(i)}` over the previous generation.
#[test]
fn ancestral_pairs_match_parent_weights() {
    let config = BrwConfig::new(8, Beta::Finite(2.0)).unwrap();
    let pairs = McContext::new(304)
        .try_map_replicates(20_000, |_, rng| {
            let out = run(&config, 2, None, rng)?;
            let parents_gen = &out.states[1];
            let w = PdWeights::from_log_weights(&parents_gen.positions)?;
            let traj = ancestral_partition(&out.genealogy, &[0, 1], 1)?;
            let merged = if traj.last().n_blocks() == 1 { 1.0 } else { 0.0 };
            Ok((merged, w.collision_probability()))
        })
        .unwrap();
    let diff: RunningStats = pairs.iter().map(|(m, c)| m - c).collect();
    assert!(diff.mean.abs() < 4.0 * diff.std_error(), "mean difference {} ± {}", diff.mean, diff.std_error());
}

#[test]
fn ancestral_partition_of_pd_exact_run_is_consistent() {
    let config = BrwConfig::new(30, Beta::Finite(1.5)).unwrap().with_engine(Engine::PdExact).unwrap();
    let out = run(&config, 40, None, &mut seed_stream(305, 0)).unwrap();
    let sample: Vec<usize> = (0..10).collect();
    let traj = ancestral_partition(&out.genealogy, &sample, 40).unwrap();
    traj.validate().unwrap();
    assert_eq!(traj.states[0], Partition::singletons(10));
    assert!(traj.states.windows(2).all(|w| w[1].n_blocks() <= w[0].n_blocks()));
}
