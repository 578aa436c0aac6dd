use std::io::Write;

use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::error::{param, Result};
use crate::io::{fmt_f64, write_csv};

/// Partition-valued path. Discrete-time paths use integer times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescentTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Partition>,
}

impl CoalescentTrajectory {
    pub fn new(start: Partition) -> Self {
        Self { times: vec![0.0], states: vec![start] }
    }

    pub fn push(&mut self, time: f64, state: Partition) {
        self.times.push(time);
        self.states.push(state);
    }

    pub fn last(&self) -> &Partition {
        self.states.last().expect("trajectory is never empty")
    }

    /// Checks increasing times, nonincreasing block counts and that every
    /// state coarsens its predecessor.
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.states.len() || self.states.is_empty() {
            return param("times and states must be nonempty and of equal length");
        }
        for w in self.times.windows(2) {
            if !(w[1] >= w[0]) {
                return param("times must be nondecreasing");
            }
        }
        for w in self.states.windows(2) {
            if merged_sizes(&w[0], &w[1]).is_none() {
                return param(format!("{} is not a coagulation of {}", w[1], w[0]));
            }
        }
        Ok(())
    }

    /// Time and size of the first event that reduces the block count. The
    /// size is the largest number of previous blocks joined into one block
    /// (a discrete step may contain several simultaneous mergers).
    pub fn first_merger(&self) -> Option<(f64, usize)> {
        for (i, w) in self.states.windows(2).enumerate() {
            if w[1].n_blocks() < w[0].n_blocks() {
                let sizes = merged_sizes(&w[0], &w[1])?;
                return Some((self.times[i + 1], sizes.into_iter().max().unwrap_or(1)));
            }
        }
        None
    }

    /// CSV with columns `time,n_blocks,partition`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = self.times.iter().zip(&self.states).map(|(t, s)| {
            vec![fmt_f64(*t), s.n_blocks().to_string(), s.to_string()]
        });
        write_csv(w, &["time", "n_blocks", "partition"], rows)
    }
}

/// For each block of `next`, how many blocks of `prev` it contains; `None`
/// when `next` does not coarsen `prev`.
fn merged_sizes(prev: &Partition, next: &Partition) -> Option<Vec<usize>> {
    if prev.n() != next.n() {
        return None;
    }
    let next_labels = next.labels();
    let mut counts = vec![0usize; next.n_blocks()];
    for b in prev.blocks() {
        let l = next_labels[b[0]];
        if b.iter().any(|&i| next_labels[i] != l) {
            return None;
        }
        counts[l] += 1;
    }
    Some(counts)
}
