pub mod brw;
pub mod coalescent;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod estimators;
pub mod io;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
