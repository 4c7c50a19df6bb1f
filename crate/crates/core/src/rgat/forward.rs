use serde::Serialize;

use crate::depgraph::{DependencyGraph, NeighborSample, Relation};
use crate::embedstore::TokenEmbeddingTable;
use crate::error::{Error, Result};
use crate::numcore::{Axis, Tape, Tensor2, Var};

use super::params::{FinalAggregator, InnerAggregator, RgatConfig, RgatParams, RgatWeights};

/// Tape handles for one graph-level forward. Column `k` of every matrix
/// belongs to node `nodes[k]`.
#[derive(Clone, Debug)]
pub struct RgatTrace {
    pub nodes: Vec<usize>,
    /// d × K.
    pub base: Var,
    /// Per relation, m × K.
    pub edge: [Var; 3],
    /// 3 × K, each column on the simplex.
    pub attention: Var,
    /// Per relation, d × K.
    pub relation_out: [Var; 3],
    /// final_dim × K.
    pub syntactic: Var,
    /// blend_dim × K.
    pub blended: Var,
}

/// Frozen embeddings of `tokens` as a `d_bert × tokens.len()` matrix.
pub fn gather_features(
    table: &TokenEmbeddingTable,
    doc_id: &str,
    tokens: &[usize],
    d_bert: usize,
) -> Result<Tensor2> {
    if table.dim() != d_bert {
        return Err(Error::dim("embeddings", format!("table dim {}", table.dim()), format!("d_bert {d_bert}")));
    }
    let mut x = Tensor2::zeros(d_bert, tokens.len());
    for (c, &t) in tokens.iter().enumerate() {
        for (r, v) in table.lookup(doc_id, t)?.iter().enumerate() {
            x.set(r, c, f64::from(*v));
        }
    }
    Ok(x)
}

/// Runs the layer for `nodes` of `g`. Only the requested nodes and their
/// sampled neighbors are touched, so a classifier that reads a handful of
/// mention tokens does not pay for the whole document.
pub fn rgat_on_tape(
    tape: &mut Tape,
    w: &RgatWeights<Var>,
    config: &RgatConfig,
    g: &DependencyGraph,
    table: &TokenEmbeddingTable,
    samples: &NeighborSample,
    nodes: &[usize],
) -> Result<RgatTrace> {
    if samples.nodes() != g.len() {
        return Err(Error::Structure(format!(
            "doc {}: sample covers {} nodes, graph has {}",
            g.doc_id,
            samples.nodes(),
            g.len()
        )));
    }
    if let Some(&bad) = nodes.iter().find(|&&i| i >= g.len()) {
        return Err(Error::Range(format!("node {bad} of doc {} with {} tokens", g.doc_id, g.len())));
    }
    let k = nodes.len();

    let mut universe: Vec<usize> = nodes.to_vec();
    for &i in nodes {
        for r in Relation::ALL {
            universe.extend_from_slice(samples.get(i, r));
        }
    }
    universe.sort_unstable();
    universe.dedup();
    let mut local = vec![usize::MAX; g.len()];
    for (li, &t) in universe.iter().enumerate() {
        local[t] = li;
    }
    let nu = universe.len();

    let x_all = gather_features(table, &g.doc_id, &universe, config.d_bert)?;
    let mut select = Tensor2::zeros(nu, k);
    for (c, &i) in nodes.iter().enumerate() {
        select.set(local[i], c, 1.0);
    }
    let x_nodes = tape.constant(x_all.matmul(&select)?);
    let x_all = tape.constant(x_all);
    let select = tape.constant(select);

    let base_all = tape.matmul(w.compress, x_all)?;
    let base = tape.matmul(base_all, select)?;

    let mut edge = Vec::with_capacity(3);
    for r in Relation::ALL {
        let pooled = match config.inner {
            InnerAggregator::Sum | InnerAggregator::Mean => {
                let mut counts = Tensor2::zeros(nu, k);
                for (c, &i) in nodes.iter().enumerate() {
                    let picks = samples.get(i, r);
                    let unit = match config.inner {
                        InnerAggregator::Mean => 1.0 / picks.len().max(1) as f64,
                        _ => 1.0,
                    };
                    for &j in picks {
                        counts.set(local[j], c, counts.get(local[j], c) + unit);
                    }
                }
                let counts = tape.constant(counts);
                tape.matmul(base_all, counts)?
            }
            InnerAggregator::MaxPool => {
                let pools: Vec<Vec<usize>> =
                    nodes.iter().map(|&i| samples.get(i, r).iter().map(|&j| local[j]).collect()).collect();
                tape.max_pool_columns(base_all, &pools)?
            }
        };
        edge.push(tape.matmul(w.neighbor_proj[r.index()], pooled)?);
    }
    let edge = [edge[0], edge[1], edge[2]];

    let mut logits = Vec::with_capacity(3);
    for r in 0..3 {
        let slot = w.attn_slot(r);
        let hidden = tape.matmul(w.attn_proj[slot], edge[r])?;
        let hidden = tape.tanh(hidden)?;
        logits.push(tape.matmul(w.attn_vec[slot], hidden)?);
    }
    let logits = tape.concat(&logits, Axis::Rows)?;
    let attention = tape.softmax(logits, Axis::Rows)?;

    let mut relation_out = Vec::with_capacity(3);
    for r in 0..3 {
        let a_r = tape.slice_rows(attention, r, 1)?;
        let msg = tape.matmul(w.value_proj[r], edge[r])?;
        let weighted = tape.mul_row(msg, a_r)?;
        relation_out.push(tape.add(base, weighted)?);
    }
    let syntactic = match config.aggregator {
        FinalAggregator::Concat => tape.concat(&relation_out, Axis::Rows)?,
        FinalAggregator::Sum => tape.sum(&relation_out)?,
        FinalAggregator::Mean => tape.mean(&relation_out)?,
    };
    let compact = tape.matmul(w.shortcut, x_nodes)?;
    let blended = tape.concat(&[syntactic, compact], Axis::Rows)?;

    Ok(RgatTrace {
        nodes: nodes.to_vec(),
        base,
        edge,
        attention,
        relation_out: [relation_out[0], relation_out[1], relation_out[2]],
        syntactic,
        blended,
    })
}

/// Intermediate quantities of one node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeState {
    pub u_base: Vec<f64>,
    pub edge: [Vec<f64>; 3],
    pub attention: [f64; 3],
    pub relation_out: [Vec<f64>; 3],
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RgatOutput {
    /// blend_dim × T, one column per token.
    pub blended: Tensor2,
    pub states: Vec<NodeState>,
}

/// Evaluates the layer on every token of `g` with fixed parameters.
pub fn rgat_forward(
    g: &DependencyGraph,
    table: &TokenEmbeddingTable,
    samples: &NeighborSample,
    params: &RgatParams,
    config: &RgatConfig,
) -> Result<RgatOutput> {
    let mut tape = Tape::new();
    let w = params.map(|t| tape.constant(t.clone()));
    let nodes: Vec<usize> = (0..g.len()).collect();
    let tr = rgat_on_tape(&mut tape, &w, config, g, table, samples, &nodes)?;
    let col = |v: Var, c: usize| tape.value(v).col(c);
    let states = (0..nodes.len())
        .map(|c| NodeState {
            u_base: col(tr.base, c),
            edge: tr.edge.map(|e| col(e, c)),
            attention: {
                let a = col(tr.attention, c);
                [a[0], a[1], a[2]]
            },
            relation_out: tr.relation_out.map(|v| col(v, c)),
            v: col(tr.syntactic, c),
        })
        .collect();
    Ok(RgatOutput {
        blended: tape.value(tr.blended).clone(),
        states,
    })
}
