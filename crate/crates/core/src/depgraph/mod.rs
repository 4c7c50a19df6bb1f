//! Dependency graphs over document tokens: CoNLL-U ingestion, the three
//! relations, and seeded neighbor sampling.

mod conllu;
mod graph;
mod sample;

pub use conllu::parse_conllu;
pub use graph::{graph_stats, DependencyGraph, GraphStats, Relation, Token};
pub use sample::{sample_neighbors, NeighborSample};
