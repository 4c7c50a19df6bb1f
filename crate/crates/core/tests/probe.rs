//! A one-layer softmax probe on raw mention embeddings, trained here by
//! plain gradient descent, recovers the planted labels.

use rgat_core::corefhead::Label;
use rgat_core::pipeline::synth_dataset;

fn mention_mean(ds: &rgat_core::pipeline::Dataset, i: usize, toks: &[usize]) -> Vec<f64> {
    let doc = &ds.instances[i].doc_id;
    let dim = ds.d_bert();
    let mut v = vec![0.0; dim];
    for &t in toks {
        for (k, x) in ds.embeddings.lookup(doc, t).unwrap().iter().enumerate() {
            v[k] += f64::from(*x) / toks.len() as f64;
        }
    }
    v
}

#[test]
fn linear_probe_decodes_planted_labels() {
    let ds = synth_dataset(300, 11, "probe", 16, 3.0).unwrap();
    let feats: Vec<Vec<f64>> = (0..ds.len())
        .map(|i| {
            let m = ds.mentions(i);
            let mut f = mention_mean(&ds, i, &m.a);
            f.extend(mention_mean(&ds, i, &m.b));
            f.extend(mention_mean(&ds, i, &m.p));
            f.push(1.0);
            f
        })
        .collect();
    let labels: Vec<usize> = ds.instances.iter().map(|x| x.label.index()).collect();
    let (train, test) = (200, 100);
    let dim = feats[0].len();
    let mut w = vec![vec![0.0; dim]; 3];
    for _ in 0..500 {
        let mut grad = vec![vec![0.0; dim]; 3];
        for i in 0..train {
            let z: Vec<f64> = w.iter().map(|row| row.iter().zip(&feats[i]).map(|(a, b)| a * b).sum()).collect();
            let top = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = z.iter().map(|v| (v - top).exp()).collect();
            let s: f64 = e.iter().sum();
            for c in 0..3 {
                let delta = e[c] / s - f64::from(u8::from(c == labels[i]));
                for k in 0..dim {
                    grad[c][k] += delta * feats[i][k] / train as f64;
                }
            }
        }
        for c in 0..3 {
            for k in 0..dim {
                w[c][k] -= 0.5 * grad[c][k];
            }
        }
    }
    let correct = (train..train + test)
        .filter(|&i| {
            let z: Vec<f64> = w.iter().map(|row| row.iter().zip(&feats[i]).map(|(a, b)| a * b).sum()).collect();
            let best = (0..3).max_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap();
            best == labels[i]
        })
        .count();
    assert!(correct as f64 / test as f64 > 0.95, "probe accuracy {correct}/{test}");
    assert!(ds.instances.iter().any(|x| x.label == Label::Neither));
}
