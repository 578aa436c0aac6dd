use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// A partition of `{0, …, n-1}` in canonical form: every block sorted, blocks
/// ordered by least element. Displayed 1-based with blocks separated by `|`
/// and elements by spaces, e.g. `1|2 3|4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn singletons(n: usize) -> Self {
        Self { n, blocks: (0..n).map(|i| vec![i]).collect() }
    }

    /// Single block holding everything.
    pub fn trivial(n: usize) -> Self {
        Self { n, blocks: if n == 0 { vec![] } else { vec![(0..n).collect()] } }
    }

    /// Validates and canonicalizes 0-based blocks covering `{0, …, n-1}`.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(blocks.len());
        for mut b in blocks {
            if b.is_empty() {
                return param("partition blocks must be nonempty");
            }
            for &i in &b {
                if i >= n {
                    return param(format!("element {i} outside 0..{n}"));
                }
                if seen[i] {
                    return param(format!("element {i} appears twice"));
                }
                seen[i] = true;
            }
            b.sort_unstable();
            out.push(b);
        }
        if seen.iter().any(|s| !s) {
            return param("blocks do not cover every element");
        }
        out.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n, blocks: out })
    }

    /// Groups positions with equal labels.
    pub fn from_labels<T: Eq + std::hash::Hash + Copy>(labels: &[T]) -> Self {
        let mut index = std::collections::HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            let k = *index.entry(*l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[k].push(i);
        }
        // first occurrence order equals least-element order
        Self { n: labels.len(), blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.n];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                l[i] = k;
            }
        }
        l
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "{}", s.join("|"))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut n = 0;
        if !s.trim().is_empty() {
            for part in s.split('|') {
                let mut b = Vec::new();
                for tok in part.split_whitespace() {
                    let v: usize = tok
                        .parse()
                        .map_err(|_| Error::Parameter(format!("bad partition element '{tok}'")))?;
                    if v == 0 {
                        return param("partition elements are 1-based");
                    }
                    n = n.max(v);
                    b.push(v - 1);
                }
                blocks.push(b);
            }
        }
        Partition::from_blocks(n, blocks)
    }
}

/// `Coag(π, π')`: block `j` of the result is the union of the blocks of `pi`
/// indexed by block `j` of `pi_prime`. Indices of `pi_prime` beyond the block
/// count of `pi` are ignored.
pub fn coag(pi: &Partition, pi_prime: &Partition) -> Result<Partition> {
    let b = pi.n_blocks();
    if pi_prime.n() < b {
        return param(format!(
            "coagulator covers {} indices but the partition has {b} blocks",
            pi_prime.n()
        ));
    }
    let mut blocks = Vec::with_capacity(pi_prime.n_blocks());
    for group in pi_prime.blocks() {
        let merged: Vec<usize> = group
            .iter()
            .filter(|&&j| j < b)
            .flat_map(|&j| pi.blocks()[j].iter().copied())
            .collect();
        if !merged.is_empty() {
            blocks.push(merged);
        }
    }
    Partition::from_blocks(pi.n(), blocks)
}

/// `π|_m`: the partition induced on `{0, …, m-1}`.
pub fn restrict(pi: &Partition, m: usize) -> Result<Partition> {
    if m > pi.n() {
        return param(format!("cannot restrict a partition of {} elements to {m}", pi.n()));
    }
    let blocks: Vec<Vec<usize>> = pi
        .blocks()
        .iter()
        .map(|b| b.iter().copied().filter(|&i| i < m).collect::<Vec<_>>())
        .filter(|b| !b.is_empty())
        .collect();
    Partition::from_blocks(m, blocks)
}
