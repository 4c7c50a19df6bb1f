//! Frozen per-token contextual embeddings: the RGEB container, a text form
//! for hand-written fixtures, and seeded synthetic tables.

mod synth;
mod table;

pub use synth::{synth_embeddings, SignalMark, SignalSpec};
pub use table::{load_table, lookup, write_table, TokenEmbeddingTable};
