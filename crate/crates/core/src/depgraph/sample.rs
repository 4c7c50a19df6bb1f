use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{DependencyGraph, Relation};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Per-node, per-relation neighbor lists fed to the aggregation step. An
/// empty list marks a relation with no neighbors for that node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborSample {
    lists: [Vec<Vec<usize>>; 3],
}

impl NeighborSample {
    /// Uses every neighbor exactly once, without sampling.
    pub fn full(g: &DependencyGraph) -> Self {
        let lists = Relation::ALL.map(|r| (0..g.len()).map(|i| g.neighbors(i, r).to_vec()).collect());
        NeighborSample { lists }
    }

    pub fn from_lists(lists: [Vec<Vec<usize>>; 3]) -> Result<Self> {
        let n = lists[0].len();
        if lists.iter().any(|l| l.len() != n) {
            return Err(Error::Structure("relation lists differ in node count".into()));
        }
        if lists.iter().flatten().flatten().any(|&j| j >= n) {
            return Err(Error::Structure("sampled neighbor outside the graph".into()));
        }
        Ok(NeighborSample { lists })
    }

    pub fn nodes(&self) -> usize {
        self.lists[0].len()
    }

    pub fn get(&self, node: usize, rel: Relation) -> &[usize] {
        &self.lists[rel.index()][node]
    }
}

/// Draws `s` neighbors with replacement for every node and relation. The
/// stream walks relations in order and nodes within each, so a seed fixes
/// the whole sample.
pub fn sample_neighbors(g: &DependencyGraph, s: usize, seed: u64) -> Result<NeighborSample> {
    if s == 0 {
        return Err(Error::Config("neighbor sample size must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let lists = Relation::ALL.map(|r| {
        (0..g.len())
            .map(|i| {
                let pool = g.neighbors(i, r);
                if pool.is_empty() {
                    Vec::new()
                } else {
                    (0..s).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
                }
            })
            .collect()
    });
    Ok(NeighborSample { lists })
}
