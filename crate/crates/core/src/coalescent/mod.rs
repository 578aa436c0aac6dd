//! Partitions, coagulation, Λ-coalescent rates, and the discrete coalescents
//! generated by Poisson-Dirichlet weights or recorded BRW genealogies.

mod lambda;
mod multinomial;
mod partition;
mod trajectory;

pub use lambda::{
    first_merger_distribution, lambda_rate, quadrature_rate, simulate_lambda_coalescent,
    LambdaMeasure, RateTable,
};
pub use multinomial::{
    ancestral_partition, multinomial_coalescent_step, sample_pd_weights, PdWeights,
};
pub use partition::{coag, restrict, Partition};
pub use trajectory::CoalescentTrajectory;
