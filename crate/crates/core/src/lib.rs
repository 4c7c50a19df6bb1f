//! Relation graph attention (RGAT) over three-relation syntactic dependency
//! graphs, blended with frozen contextual token embeddings, for the
//! three-way GAP pronoun resolution task.
//!
//! The crate is split along the data flow:
//!
//! - [`numcore`]: dense matrices and a reverse-mode tape.
//! - [`optim`]: Adam, warmup schedule, L2 penalty, dropout and batch norm.
//! - [`depgraph`]: CoNLL-U ingestion and neighbor sampling.
//! - [`embedstore`]: frozen token embedding tables (RGEB files).
//! - [`rgat`]: the attention layer, its RGCN baseline and checkpoints.
//! - [`corefhead`]: mention location and the A/B/NEITHER classifier.
//! - [`corefmetrics`]: micro-F1, MUC, B³ and CEAF-φ4.
//! - [`pipeline`]: GAP ingestion, cross-validated training and ablations.

// index loops mirror the per-relation math
#![allow(clippy::needless_range_loop)]

pub mod corefhead;
pub mod corefmetrics;
pub mod depgraph;
pub mod embedstore;
pub mod error;
pub mod numcore;
pub mod optim;
pub mod pipeline;
pub mod rgat;
pub mod rng;

pub use error::{Error, Result};
