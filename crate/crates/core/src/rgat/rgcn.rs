//! Relational graph convolution baseline: each layer sums the neighbors of
//! every relation, normalized by neighbor count, through a per-relation
//! weight, then applies ReLU. No sampling.

use crate::depgraph::{DependencyGraph, Relation};
use crate::error::{Error, Result};
use crate::numcore::{Tape, Tensor2, Var};
use crate::rng::{derive_seed, seeded};

#[derive(Clone, Debug, PartialEq)]
pub struct RgcnParams {
    /// `layers[l][r]` is the d × d weight of relation `r` in layer `l`.
    pub layers: Vec<[Tensor2; 3]>,
}

impl RgcnParams {
    pub fn init(d: usize, layers: usize, seed: u64) -> Self {
        let layers = (0..layers)
            .map(|l| {
                [0, 1, 2].map(|r| {
                    let mut rng = seeded(derive_seed(seed, &[l as u64, r as u64]));
                    Tensor2::glorot(d, d, &mut rng)
                })
            })
            .collect();
        RgcnParams { layers }
    }

    pub fn validate(&self) -> Result<usize> {
        let Some(first) = self.layers.first() else {
            return Err(Error::Config("RGCN needs at least one layer".into()));
        };
        let d = first[0].rows();
        for (l, ws) in self.layers.iter().enumerate() {
            for (r, w) in ws.iter().enumerate() {
                if w.shape() != (d, d) {
                    return Err(Error::dim("rgcn", format!("layer {l} relation {r} {}", w.shape_str()), format!("{d}x{d}")));
                }
            }
        }
        Ok(d)
    }
}

/// `T × T` matrix with entry `(j, i) = 1 / |N_r(i)|` for each neighbor `j`
/// of `i`, so `H · A` averages neighbor columns.
pub fn normalized_adjacency(g: &DependencyGraph, r: Relation) -> Tensor2 {
    let t = g.len();
    let mut a = Tensor2::zeros(t, t);
    for i in 0..t {
        let ns = g.neighbors(i, r);
        for &j in ns {
            a.set(j, i, a.get(j, i) + 1.0 / ns.len() as f64);
        }
    }
    a
}

/// `h` is d × T; `layers[l][r]` are tape handles of the weights.
pub fn rgcn_on_tape(tape: &mut Tape, g: &DependencyGraph, h: Var, layers: &[[Var; 3]]) -> Result<Var> {
    let adj: Vec<Var> = Relation::ALL
        .iter()
        .map(|&r| tape.constant(normalized_adjacency(g, r)))
        .collect();
    let mut h = h;
    for ws in layers {
        let mut terms = Vec::with_capacity(3);
        for r in 0..3 {
            let mixed = tape.matmul(h, adj[r])?;
            terms.push(tape.matmul(ws[r], mixed)?);
        }
        let pre = tape.sum(&terms)?;
        h = tape.relu(pre)?;
    }
    Ok(h)
}

/// Per-node outputs (d × T) for `features` (d × T).
pub fn rgcn_forward(g: &DependencyGraph, features: &Tensor2, params: &RgcnParams) -> Result<Tensor2> {
    let d = params.validate()?;
    if features.shape() != (d, g.len()) {
        return Err(Error::dim("rgcn_forward", features.shape_str(), format!("{d}x{}", g.len())));
    }
    let mut tape = Tape::new();
    let h = tape.constant(features.clone());
    let layers: Vec<[Var; 3]> = params
        .layers
        .iter()
        .map(|ws| [0, 1, 2].map(|r| tape.constant(ws[r].clone())))
        .collect();
    let out = rgcn_on_tape(&mut tape, g, h, &layers)?;
    Ok(tape.value(out).clone())
}
