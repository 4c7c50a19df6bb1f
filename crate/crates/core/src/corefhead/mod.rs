//! The A/B/NEITHER classifier: locating mentions in a graph, pooling their
//! blended vectors and scoring the concatenation.

mod head;
mod instance;

pub use head::{
    argmax_label, classify, head_on_tape, loss, loss_on_tape, mention_pool_on_tape, mention_vector, Classified,
    HeadConfig, HeadParams, HeadWeights,
};
pub use instance::{locate_mentions, GapInstance, Label, MentionTokens};
