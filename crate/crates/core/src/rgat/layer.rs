//! Per-node forms of the layer's steps. The graph-level forward in
//! `forward.rs` computes the same quantities for many nodes at once on a
//! tape; these are the readable single-node versions.

use crate::depgraph::{NeighborSample, Relation};
use crate::error::{Error, Result};
use crate::numcore::{softmax, Axis, Tensor2};

use super::params::{FinalAggregator, InnerAggregator, RgatParams};

fn matvec(w: &Tensor2, x: &[f64], op: &'static str) -> Result<Vec<f64>> {
    if w.cols() != x.len() {
        return Err(Error::dim(op, w.shape_str(), format!("vector of {}", x.len())));
    }
    Ok(w.matmul(&Tensor2::column(x))?.into_data())
}

/// `u_base = W0 · u_out`.
pub fn compress(u_out: &[f64], params: &RgatParams) -> Result<Vec<f64>> {
    matvec(&params.compress, u_out, "compress")
}

/// Edge embeddings of relation `r` for every node: `W1_r · agg(sampled
/// bases)`, returned as `m × T`. `bases` is `d × T`. A node with no sampled
/// neighbors gets a zero column.
pub fn aggregate_neighbors(
    samples: &NeighborSample,
    bases: &Tensor2,
    r: Relation,
    params: &RgatParams,
    inner: InnerAggregator,
) -> Result<Tensor2> {
    let t = samples.nodes();
    if bases.cols() != t {
        return Err(Error::dim("aggregate_neighbors", bases.shape_str(), format!("{t} nodes")));
    }
    let d = bases.rows();
    let mut pooled = Tensor2::zeros(d, t);
    for i in 0..t {
        let picks = samples.get(i, r);
        if picks.is_empty() {
            continue;
        }
        for k in 0..d {
            let vals = picks.iter().map(|&j| bases.get(k, j));
            let v = match inner {
                InnerAggregator::Sum => vals.sum(),
                InnerAggregator::Mean => vals.sum::<f64>() / picks.len() as f64,
                InnerAggregator::MaxPool => vals.fold(f64::NEG_INFINITY, f64::max),
            };
            pooled.set(k, i, v);
        }
    }
    params.neighbor_proj[r.index()].matmul(&pooled)
}

/// Relation attention of one node: one softmax over the three logits
/// `wᵀ tanh(W2 · U_r)`.
pub fn attend(u: [&[f64]; 3], params: &RgatParams) -> Result<[f64; 3]> {
    let mut logits = [0.0; 3];
    for (r, ur) in u.iter().enumerate() {
        let slot = params.attn_slot(r);
        let h: Vec<f64> = matvec(&params.attn_proj[slot], ur, "attend")?
            .into_iter()
            .map(f64::tanh)
            .collect();
        logits[r] = matvec(&params.attn_vec[slot], &h, "attend")?[0];
    }
    let a = softmax(&Tensor2::column(&logits), Axis::Rows);
    Ok([a.get(0, 0), a.get(1, 0), a.get(2, 0)])
}

/// `v_r = u_base + a_r · M_r · U_r`.
pub fn combine(u_base: &[f64], u_r: &[f64], a_r: f64, r: Relation, params: &RgatParams) -> Result<Vec<f64>> {
    let mu = matvec(&params.value_proj[r.index()], u_r, "combine")?;
    if mu.len() != u_base.len() {
        return Err(Error::dim("combine", format!("base of {}", u_base.len()), format!("{}", mu.len())));
    }
    Ok(u_base.iter().zip(mu).map(|(b, x)| b + a_r * x).collect())
}

pub fn finalize(v: [&[f64]; 3], mode: FinalAggregator) -> Result<Vec<f64>> {
    let d = v[0].len();
    if v.iter().any(|x| x.len() != d) {
        return Err(Error::dim("finalize", format!("{}", d), "unequal relation vectors"));
    }
    Ok(match mode {
        FinalAggregator::Concat => v.concat(),
        FinalAggregator::Sum => (0..d).map(|k| v[0][k] + v[1][k] + v[2][k]).collect(),
        FinalAggregator::Mean => (0..d).map(|k| (v[0][k] + v[1][k] + v[2][k]) / 3.0).collect(),
    })
}
