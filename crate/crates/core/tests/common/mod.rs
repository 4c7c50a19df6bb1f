//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's math; inputs are read out as plain
//! numbers and everything is recomputed with nested loops.

#![allow(dead_code, clippy::needless_range_loop)]

use rgat_core::depgraph::DependencyGraph;
use rgat_core::embedstore::TokenEmbeddingTable;
use rgat_core::numcore::Tensor2;
use rgat_core::pipeline::TrainConfig;
use rgat_core::rgat::{FinalAggregator, InnerAggregator, RgatConfig, RgatParams};

type Mat = Vec<Vec<f64>>;

fn mat(t: &Tensor2) -> Mat {
    (0..t.rows()).map(|r| (0..t.cols()).map(|c| t.data()[r * t.cols() + c]).collect()).collect()
}

fn mv(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum()).collect()
}

/// Neighbor sets per relation, read straight off the head column:
/// [the token's head, its dependents, itself].
pub fn oracle_neighbors(g: &DependencyGraph) -> [Vec<Vec<usize>>; 3] {
    let n = g.len();
    let mut up = vec![Vec::new(); n];
    let mut down = vec![Vec::new(); n];
    for (i, t) in g.tokens().iter().enumerate() {
        if let Some(h) = t.head {
            up[i].push(h);
            down[h].push(i);
        }
    }
    [up, down, (0..n).map(|i| vec![i]).collect()]
}

/// Blended vectors (one per token) of the layer, evaluated node by node.
/// `lists[r][i]` are the neighbors aggregated for node `i` under relation `r`.
pub fn oracle_forward(
    g: &DependencyGraph,
    table: &TokenEmbeddingTable,
    lists: &[Vec<Vec<usize>>; 3],
    p: &RgatParams,
    cfg: &RgatConfig,
) -> Vec<Vec<f64>> {
    let x: Vec<Vec<f64>> = (0..g.len())
        .map(|t| table.lookup(&g.doc_id, t).unwrap().iter().map(|&v| f64::from(v)).collect())
        .collect();
    let w0 = mat(&p.compress);
    let base: Vec<Vec<f64>> = x.iter().map(|xi| mv(&w0, xi)).collect();
    let mut out = Vec::new();
    for i in 0..g.len() {
        let mut edge = Vec::new();
        for r in 0..3 {
            let nb = &lists[r][i];
            let mut pooled = vec![0.0; cfg.d];
            match cfg.inner {
                InnerAggregator::Sum | InnerAggregator::Mean => {
                    for &j in nb {
                        for k in 0..cfg.d {
                            pooled[k] += base[j][k];
                        }
                    }
                    if cfg.inner == InnerAggregator::Mean && !nb.is_empty() {
                        for v in &mut pooled {
                            *v /= nb.len() as f64;
                        }
                    }
                }
                InnerAggregator::MaxPool => {
                    if !nb.is_empty() {
                        for k in 0..cfg.d {
                            pooled[k] = nb.iter().map(|&j| base[j][k]).fold(f64::NEG_INFINITY, f64::max);
                        }
                    }
                }
            }
            edge.push(mv(&mat(&p.neighbor_proj[r]), &pooled));
        }
        let mut logits = [0.0; 3];
        for r in 0..3 {
            let h = if p.attn_proj.len() == 1 { 0 } else { r };
            let hidden: Vec<f64> = mv(&mat(&p.attn_proj[h]), &edge[r]).iter().map(|v| v.tanh()).collect();
            logits[r] = mv(&mat(&p.attn_vec[h]), &hidden)[0];
        }
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = e.iter().sum();
        let v: Vec<Vec<f64>> = (0..3)
            .map(|r| {
                let msg = mv(&mat(&p.value_proj[r]), &edge[r]);
                (0..cfg.d).map(|k| base[i][k] + e[r] / z * msg[k]).collect()
            })
            .collect();
        let mut col = match cfg.aggregator {
            FinalAggregator::Concat => v.concat(),
            FinalAggregator::Sum => (0..cfg.d).map(|k| v[0][k] + v[1][k] + v[2][k]).collect(),
            FinalAggregator::Mean => (0..cfg.d).map(|k| (v[0][k] + v[1][k] + v[2][k]) / 3.0).collect(),
        };
        col.extend(mv(&mat(&p.shortcut), &x[i]));
        out.push(col);
    }
    out
}

// ---- cluster metrics by brute force ----

/// All set partitions of `0..n` (restricted growth strings).
pub fn partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn grow(i: usize, n: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            let k = rgs.iter().copied().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); k];
            for (m, &b) in rgs.iter().enumerate() {
                blocks[b].push(m);
            }
            out.push(blocks);
            return;
        }
        let k = rgs.iter().copied().max().map_or(0, |m| m + 1);
        for b in 0..=k {
            rgs.push(b);
            grow(i + 1, n, rgs, out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    grow(0, n, &mut Vec::new(), &mut out);
    out
}

fn cluster_of(p: &[Vec<usize>], m: usize) -> Option<usize> {
    p.iter().position(|c| c.contains(&m))
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// (P, R) from the link view: for each key cluster, |K| minus the number of
/// connected components left when only response links are kept.
pub fn brute_muc(key: &[Vec<usize>], resp: &[Vec<usize>]) -> (f64, f64) {
    fn side(a: &[Vec<usize>], b: &[Vec<usize>]) -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for c in a {
            // union-find over c using links present in b
            let mut parent: Vec<usize> = (0..c.len()).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    let (ci, cj) = (cluster_of(b, c[i]), cluster_of(b, c[j]));
                    if ci.is_some() && ci == cj {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        parent[ri] = rj;
                    }
                }
            }
            let comps = (0..c.len()).filter(|&i| find(&mut parent, i) == i).count();
            num += (c.len() - comps) as f64;
            den += (c.len() - 1) as f64;
        }
        (num, den)
    }
    let (rn, rd) = side(key, resp);
    let (pn, pd) = side(resp, key);
    (ratio(pn, pd), ratio(rn, rd))
}

/// (P, R) averaged per mention.
pub fn brute_b_cubed(key: &[Vec<usize>], resp: &[Vec<usize>]) -> (f64, f64) {
    let mentions: Vec<usize> = key.iter().flatten().copied().collect();
    let (mut p, mut r) = (0.0, 0.0);
    for &m in &mentions {
        let k = &key[cluster_of(key, m).unwrap()];
        let s = &resp[cluster_of(resp, m).unwrap()];
        let common = k.iter().filter(|x| s.contains(x)).count() as f64;
        r += common / k.len() as f64;
        p += common / s.len() as f64;
    }
    let n = mentions.len() as f64;
    (ratio(p, n), ratio(r, n))
}

fn phi4(k: &[usize], r: &[usize]) -> f64 {
    let common = k.iter().filter(|x| r.contains(x)).count() as f64;
    2.0 * common / (k.len() + r.len()) as f64
}

/// Best total φ4 over every injective map from the smaller side into the
/// larger, by permutation search.
pub fn brute_ceaf_total(key: &[Vec<usize>], resp: &[Vec<usize>]) -> f64 {
    fn search(k: &[Vec<usize>], r: &[Vec<usize>], i: usize, used: &mut Vec<bool>) -> f64 {
        if i == k.len() {
            return 0.0;
        }
        // key cluster i may stay unmatched when there are more key clusters
        let mut best = if k.len() > r.len() { search(k, r, i + 1, used) } else { f64::NEG_INFINITY };
        for j in 0..r.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(phi4(&k[i], &r[j]) + search(k, r, i + 1, used));
                used[j] = false;
            }
        }
        if best == f64::NEG_INFINITY {
            0.0
        } else {
            best
        }
    }
    search(key, resp, 0, &mut vec![false; resp.len()])
}

pub fn brute_ceaf(key: &[Vec<usize>], resp: &[Vec<usize>]) -> (f64, f64) {
    let t = brute_ceaf_total(key, resp);
    (ratio(t, resp.len() as f64), ratio(t, key.len() as f64))
}

// ---- shared fixtures ----

/// Small model used by the synthetic training checks.
pub fn synth_config(seed: u64) -> TrainConfig {
    TrainConfig {
        d: 16,
        hidden: 32,
        epochs: 60,
        batch_size: 16,
        lr: 1e-2,
        seed,
        ..TrainConfig::default()
    }
}

pub const SYNTH_DIM: usize = 16;
pub const SYNTH_AMPLITUDE: f32 = 3.0;
