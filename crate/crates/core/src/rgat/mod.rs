//! The relation graph attention layer.
//!
//! Each token's frozen vector is compressed to a base vector. For each of
//! the three relations the sampled neighbors' base vectors are pooled and
//! projected to an edge embedding; a softmax over the three relation logits
//! weighs how much each edge embedding adds back onto the base vector. The
//! three relation outputs are merged and concatenated with a compact
//! projection of the frozen vector.

mod checkpoint;
mod forward;
pub mod layer;
mod params;
mod rgcn;

pub use checkpoint::Checkpoint;
pub use forward::{gather_features, rgat_forward, rgat_on_tape, NodeState, RgatOutput, RgatTrace};
pub use layer::{aggregate_neighbors, attend, combine, compress, finalize};
pub use params::{FinalAggregator, InnerAggregator, RgatConfig, RgatParams, RgatWeights};
pub use rgcn::{normalized_adjacency, rgcn_forward, rgcn_on_tape, RgcnParams};
