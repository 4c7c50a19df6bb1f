use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::table::TokenEmbeddingTable;
use crate::depgraph::DependencyGraph;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, hash_str, seeded};

/// One additive mark: `amplitude` is added to `coordinate` of each listed
/// token of a document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalMark {
    pub doc_id: String,
    pub tokens: Vec<usize>,
    pub coordinate: usize,
}

/// Class-correlated signal injected into synthetic embeddings so labels
/// become decodable from mention tokens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub amplitude: f32,
    pub marks: Vec<SignalMark>,
}

/// Per-token vectors uniform in [-1, 1), seeded on `(seed, doc_id, index)`
/// so a token's vector does not depend on which other graphs are present.
pub fn synth_embeddings(
    graphs: &[DependencyGraph],
    dim: usize,
    seed: u64,
    signal: Option<&SignalSpec>,
) -> Result<TokenEmbeddingTable> {
    if dim < 4 {
        return Err(Error::Config(format!("synthetic embedding dim must be at least 4, got {dim}")));
    }
    let mut vectors: Vec<Vec<Vec<f32>>> = graphs
        .iter()
        .map(|g| {
            let doc = hash_str(&g.doc_id);
            (0..g.len())
                .map(|i| {
                    let mut rng = seeded(derive_seed(seed, &[doc, i as u64]));
                    (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect()
                })
                .collect()
        })
        .collect();
    if let Some(spec) = signal {
        let by_id: HashMap<&str, usize> = graphs.iter().enumerate().map(|(k, g)| (g.doc_id.as_str(), k)).collect();
        for mark in &spec.marks {
            if mark.coordinate >= dim {
                return Err(Error::Config(format!(
                    "signal coordinate {} outside dim {dim}",
                    mark.coordinate
                )));
            }
            let missing = |t: usize| Error::Lookup {
                doc_id: mark.doc_id.clone(),
                token: t as u32,
            };
            let doc = by_id
                .get(mark.doc_id.as_str())
                .ok_or_else(|| missing(mark.tokens.first().copied().unwrap_or(0)))?;
            for &t in &mark.tokens {
                vectors[*doc].get_mut(t).ok_or_else(|| missing(t))?[mark.coordinate] += spec.amplitude;
            }
        }
    }
    let mut table = TokenEmbeddingTable::new(dim);
    for (g, vs) in graphs.iter().zip(vectors) {
        for (i, v) in vs.into_iter().enumerate() {
            table.insert(&g.doc_id, i as u32, v)?;
        }
    }
    Ok(table)
}
