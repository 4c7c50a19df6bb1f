//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{
    brute_b_cubed, brute_ceaf, brute_ceaf_total, brute_muc, oracle_forward, oracle_neighbors, partitions,
    synth_config, SYNTH_AMPLITUDE, SYNTH_DIM,
};
use rand::Rng;
use rgat_core::corefhead::Label;
use rgat_core::corefmetrics::{b_cubed, ceaf_alignment, ceaf_phi4, micro_f1, muc, Clustering, MetricMode};
use rgat_core::depgraph::{DependencyGraph, NeighborSample};
use rgat_core::embedstore::{synth_embeddings, TokenEmbeddingTable};
use rgat_core::pipeline::*;
use rgat_core::rgat::{attend, rgat_forward, Checkpoint, FinalAggregator, InnerAggregator, RgatConfig, RgatParams};
use rgat_core::rng::seeded;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tiny_rgat(aggregator: FinalAggregator, inner: InnerAggregator, per_relation_attention: bool) -> RgatConfig {
    RgatConfig {
        d_bert: 8,
        d: 4,
        m: 3,
        n: 5,
        sample_size: 4,
        inner,
        aggregator,
        per_relation_attention,
    }
}

fn gradient_integrity() -> Outcome {
    let start = Instant::now();
    let data = tiny_dataset(8, 0).map_err(|e| e.to_string())?;
    let batch: Vec<usize> = (0..data.len()).collect();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for aggregator in [FinalAggregator::Concat, FinalAggregator::Sum, FinalAggregator::Mean] {
        for per_relation_attention in [false, true] {
            let cfg = TrainConfig {
                d: 4,
                m: 3,
                n: 5,
                hidden: 6,
                aggregator,
                per_relation_attention,
                ..TrainConfig::default()
            };
            let model = Model::init(&cfg, 8, 11).map_err(|e| e.to_string())?;
            let report = model_grad_check(&model, &data, &batch, &cfg.regularizer(), 3, 1e-5, 1e-4)
                .map_err(|e| e.to_string())?;
            ensure(report.tensors.len() == model.named().len(), || "not every tensor was checked".into())?;
            for t in &report.tensors {
                worst = worst.max(t.max_rel_error);
                ensure(t.passed, || format!("{aggregator:?} {}: rel {:e}", t.name, t.max_rel_error))?;
            }
            checked += report.tensors.len();
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{checked} tensors, max rel {worst:.2e}, {:.1}s", took.as_secs_f64()))
}

fn attention_contract() -> Outcome {
    let mut rng = seeded(2024);
    let mut worst: f64 = 0.0;
    for draw in 0..1000u64 {
        let per_relation = draw % 2 == 1;
        let cfg = tiny_rgat(FinalAggregator::Concat, InnerAggregator::Sum, per_relation);
        let params = RgatParams::init(&cfg, draw).map_err(|e| e.to_string())?;
        let scale = rng.gen_range(0.1..20.0);
        let u: Vec<Vec<f64>> = (0..3).map(|_| (0..cfg.m).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).collect();
        let a = attend([&u[0], &u[1], &u[2]], &params).map_err(|e| e.to_string())?;
        ensure(a.iter().all(|&x| x >= 0.0), || format!("draw {draw}: negative weight {a:?}"))?;
        worst = worst.max((a.iter().sum::<f64>() - 1.0).abs());
        let same = attend([&u[0], &u[0], &u[0]], &params).map_err(|e| e.to_string())?;
        if !per_relation {
            ensure(same == [1.0 / 3.0; 3], || format!("draw {draw}: identical inputs gave {same:?}"))?;
        }
    }
    ensure(worst <= 1e-9, || format!("sum off by {worst:e}"))?;
    Ok(format!("1000 draws, max |sum-1| {worst:.1e}"))
}

fn zero_edge_identity() -> Outcome {
    let g = DependencyGraph::from_heads("iso", &[Some(1), None, Some(1), Some(2), Some(1)]).map_err(|e| e.to_string())?;
    let table = synth_embeddings(std::slice::from_ref(&g), 8, 5, None).map_err(|e| e.to_string())?;
    let empty = NeighborSample::from_lists([vec![vec![]; 5], vec![vec![]; 5], vec![vec![]; 5]]).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for inner in [InnerAggregator::Sum, InnerAggregator::Mean, InnerAggregator::MaxPool] {
        let cfg = tiny_rgat(FinalAggregator::Concat, inner, false);
        let params = RgatParams::init(&cfg, 9).map_err(|e| e.to_string())?;
        let out = rgat_forward(&g, &table, &empty, &params, &cfg).map_err(|e| e.to_string())?;
        for (i, st) in out.states.iter().enumerate() {
            for r in 0..3 {
                ensure(st.relation_out[r] == st.u_base, || format!("node {i} relation {r}: v differs from u_base"))?;
            }
            let x: Vec<f64> = table.lookup("iso", i).unwrap().iter().map(|&v| f64::from(v)).collect();
            let col = out.blended.col(i);
            for k in 0..cfg.d {
                for r in 0..3 {
                    ensure(col[r * cfg.d + k] == st.u_base[k], || format!("node {i}: block {r} row {k}"))?;
                }
                let want: f64 = (0..cfg.d_bert).map(|j| params.shortcut.get(k, j) * x[j]).sum();
                worst = worst.max((col[3 * cfg.d + k] - want).abs());
            }
        }
    }
    ensure(worst < 1e-12, || format!("shortcut block off by {worst:e}"))?;
    Ok(format!("v == u_base exactly; shortcut block within {worst:.1e}"))
}

fn forward_oracle() -> Outcome {
    let graphs = [
        DependencyGraph::from_heads("chain", &[Some(1), Some(2), None]),
        DependencyGraph::from_heads("star", &[None, Some(0), Some(0), Some(0), Some(0)]),
        DependencyGraph::from_heads("forest", &[Some(1), None, Some(1), Some(4), None, Some(4), Some(5)]),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut seed = 100;
    for aggregator in [FinalAggregator::Concat, FinalAggregator::Sum, FinalAggregator::Mean] {
        for inner in [InnerAggregator::Sum, InnerAggregator::Mean, InnerAggregator::MaxPool] {
            for per_relation in [false, true] {
                seed += 1;
                let cfg = tiny_rgat(aggregator, inner, per_relation);
                let table: TokenEmbeddingTable = synth_embeddings(&graphs, 8, seed, None).map_err(|e| e.to_string())?;
                let params = RgatParams::init(&cfg, seed).map_err(|e| e.to_string())?;
                for g in &graphs {
                    let got = rgat_forward(g, &table, &NeighborSample::full(g), &params, &cfg).map_err(|e| e.to_string())?;
                    let want = oracle_forward(g, &table, &oracle_neighbors(g), &params, &cfg);
                    for (c, col) in want.iter().enumerate() {
                        for (r, v) in col.iter().enumerate() {
                            worst = worst.max((got.blended.get(r, c) - v).abs());
                        }
                    }
                }
            }
        }
    }
    ensure(worst < 1e-10, || format!("max diff {worst:e}"))?;
    Ok(format!("18 configurations x 3 graphs, max diff {worst:.1e}"))
}

fn metric_oracles() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let mut pairs = 0usize;
    for n in 1..=6 {
        let all = partitions(n);
        for k in &all {
            let key = Clustering::new(k.clone()).map_err(|e| e.to_string())?;
            for r in &all {
                let resp = Clustering::new(r.clone()).map_err(|e| e.to_string())?;
                let m = muc(&key, &resp);
                let (mp, mr) = brute_muc(k, r);
                ensure(close(m.precision, mp) && close(m.recall, mr), || format!("MUC {k:?} vs {r:?}"))?;
                let b = b_cubed(&key, &resp, MetricMode::Standard);
                let (bp, br) = brute_b_cubed(k, r);
                ensure(close(b.precision, bp) && close(b.recall, br), || format!("B3 {k:?} vs {r:?}"))?;
                let c = ceaf_phi4(&key, &resp, MetricMode::Standard);
                let (cp, cr) = brute_ceaf(k, r);
                ensure(close(c.precision, cp) && close(c.recall, cr), || format!("CEAF {k:?} vs {r:?}"))?;
                let total: f64 = ceaf_alignment(&key, &resp).iter().map(|t| t.2).sum();
                ensure(close(total, brute_ceaf_total(k, r)), || format!("CEAF alignment {k:?} vs {r:?}"))?;
                pairs += 1;
            }
        }
    }
    let key = Clustering::new(vec![vec!["a", "b", "c"], vec!["d", "e"]]).map_err(|e| e.to_string())?;
    let resp = Clustering::new(vec![vec!["a", "b"], vec!["c"], vec!["d", "e"]]).map_err(|e| e.to_string())?;
    let f1 = muc(&key, &resp).f1;
    ensure(f1 == 0.8, || format!("hand case MUC F1 {f1}"))?;
    Ok(format!("{pairs} partition pairs, hand case MUC F1 {f1}"))
}

fn micro_f1_is_accuracy() -> Outcome {
    let mut rng = seeded(77);
    for s in 0..1000 {
        let n = rng.gen_range(1..60);
        let draw = |rng: &mut rand_xoshiro::SplitMix64| Label::ALL[rng.gen_range(0..3)];
        let gold: Vec<Label> = (0..n).map(|_| draw(&mut rng)).collect();
        let pred: Vec<Label> = (0..n).map(|_| draw(&mut rng)).collect();
        let acc = gold.iter().zip(&pred).filter(|(g, p)| g == p).count() as f64 / n as f64;
        let f1 = micro_f1(&gold, &pred).map_err(|e| e.to_string())?.f1;
        ensure(f1 == acc, || format!("sequence {s}: F1 {f1} vs accuracy {acc}"))?;
    }
    Ok("1000 sequences, exact".into())
}

fn ensemble_f1(models: &[Model], data: &Dataset, seed: u64) -> Result<f64, String> {
    let preds = predict_ensemble(models, data, seed).map_err(|e| e.to_string())?;
    let labels: Vec<Label> = preds.iter().map(|p| p.1).collect();
    Ok(micro_f1(&data.labels(), &labels).map_err(|e| e.to_string())?.f1)
}

fn learnability() -> Outcome {
    let start = Instant::now();
    let train = synth_dataset(64, 7, "train", SYNTH_DIM, SYNTH_AMPLITUDE).map_err(|e| e.to_string())?;
    let test = synth_dataset(64, 8, "test", SYNTH_DIM, SYNTH_AMPLITUDE).map_err(|e| e.to_string())?;
    let cfg = synth_config(42);
    ensure(cfg.epochs <= 200 && cfg.folds == 5, || "config outside the budget".into())?;
    let cv = cross_validate(&train, &cfg, &mut |_, _| {}).map_err(|e| e.to_string())?;
    let models: Vec<Model> = cv.models().into_iter().cloned().collect();
    let train_f1 = ensemble_f1(&models, &train, cfg.seed)?;
    let test_f1 = ensemble_f1(&models, &test, cfg.seed)?;
    let took = start.elapsed();
    ensure(train_f1 >= 0.95, || format!("train micro-F1 {train_f1:.4}"))?;
    ensure(test_f1 >= 0.90, || format!("test micro-F1 {test_f1:.4}"))?;
    ensure(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!(
        "train {train_f1:.4}, test {test_f1:.4}, oof {:.4}, {} epochs, {:.1}s",
        cv.oof_f1,
        cfg.epochs,
        took.as_secs_f64()
    ))
}

/// Trains, saves the ensemble into `dir`, and writes predictions and a
/// score report next to it.
fn end_to_end(dir: &Path) -> Result<(), String> {
    let train = synth_dataset(40, 3, "train", SYNTH_DIM, SYNTH_AMPLITUDE).map_err(|e| e.to_string())?;
    let test = synth_dataset(20, 4, "test", SYNTH_DIM, SYNTH_AMPLITUDE).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { epochs: 10, ..synth_config(5) };
    let cv = cross_validate(&train, &cfg, &mut |_, _| {}).map_err(|e| e.to_string())?;
    save_ensemble(dir, &cfg, train.d_bert(), &cv).map_err(|e| e.to_string())?;
    let preds: Vec<Prediction> = predict_ensemble(&cv.models().into_iter().cloned().collect::<Vec<_>>(), &test, cfg.seed)
        .map_err(|e| e.to_string())?
        .into_iter()
        .zip(&test.instances)
        .map(|((probs, label), inst)| Prediction {
            id: inst.doc_id.clone(),
            probs,
            label,
        })
        .collect();
    let mut buf = Vec::new();
    write_predictions(&mut buf, &preds).map_err(|e| e.to_string())?;
    fs::write(dir.join("predictions.tsv"), buf).map_err(|e| e.to_string())?;
    let prf = score_predictions(&test.instances, &preds).map_err(|e| e.to_string())?;
    fs::write(dir.join("report.json"), serde_json::to_vec_pretty(&prf).unwrap()).map_err(|e| e.to_string())?;
    Ok(())
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    end_to_end(&a)?;
    end_to_end(&b)?;
    let mut names: Vec<_> = fs::read_dir(&a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let left = fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let right = fs::read(b.join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        ensure(left == right, || format!("{name:?} differs"))?;
    }
    ensure(names.iter().any(|n| n == "predictions.tsv") && names.iter().any(|n| n == "report.json"), || {
        "missing outputs".into()
    })?;
    Ok(format!("{} files byte-identical", names.len()))
}

fn ablation_layout() -> Outcome {
    let data = synth_dataset(40, 12, "abl", SYNTH_DIM, SYNTH_AMPLITUDE).map_err(|e| e.to_string())?;
    let base = TrainConfig { epochs: 3, folds: 2, ..synth_config(1) };
    let cells = ablation_grid(&DEFAULT_SIZES, false);
    let layout: Vec<(usize, usize, &str)> = cells.iter().map(|c| (c.m, c.n, c.column.as_str())).collect();
    let want = [
        (5, 10, "Mean/Sum"),
        (5, 10, "Concat"),
        (10, 20, "Mean/Sum"),
        (10, 20, "Concat"),
        (30, 60, "Mean/Sum"),
        (30, 60, "Concat"),
    ];
    ensure(layout == want, || format!("grid {layout:?}"))?;
    let rows = run_ablation(&data, &base, &cells, None, &mut |_| {}).map_err(|e| e.to_string())?;
    ensure(rows.len() == 6, || format!("{} rows", rows.len()))?;
    let d = base.d;
    let g = &data.graphs[&data.instances[0].doc_id];
    for (cell, row) in cells.iter().zip(&rows) {
        let syntactic = match cell.aggregator {
            FinalAggregator::Concat => 3 * d,
            _ => d,
        };
        let cfg = TrainConfig {
            m: cell.m,
            n: cell.n,
            aggregator: cell.aggregator,
            ..base.clone()
        }
        .rgat(data.d_bert());
        let params = RgatParams::init(&cfg, 0).map_err(|e| e.to_string())?;
        let out = rgat_forward(g, &data.embeddings, &NeighborSample::full(g), &params, &cfg).map_err(|e| e.to_string())?;
        ensure(out.blended.rows() == syntactic + d && row.blend_dim == syntactic + d, || {
            format!("m={} n={} {}: width {} / {}", cell.m, cell.n, cell.column, out.blended.rows(), row.blend_dim)
        })?;
    }
    let table = ablation_table(&rows);
    let header: Vec<&str> = table.lines().next().unwrap_or_default().split_whitespace().collect();
    ensure(table.lines().count() == 4 && header[1..] == ["Mean/Sum", "Concat"], || format!("table:\n{table}"))?;
    Ok(format!("6 cells, widths Concat {}+{d} and Mean/Sum {d}+{d}", 3 * d))
}

fn format_round_trips() -> Outcome {
    let data = tiny_dataset(8, 4).map_err(|e| e.to_string())?;
    let mut first = Vec::new();
    data.embeddings.write_rgeb(&mut first).map_err(|e| e.to_string())?;
    let back = TokenEmbeddingTable::read_rgeb(first.as_slice()).map_err(|e| e.to_string())?;
    let mut second = Vec::new();
    back.write_rgeb(&mut second).map_err(|e| e.to_string())?;
    ensure(first == second, || "RGEB bytes differ".into())?;

    let cfg = TrainConfig { d: 4, m: 3, n: 5, hidden: 6, ..TrainConfig::default() };
    let ck = Model::init(&cfg, 8, 2).map_err(|e| e.to_string())?.to_checkpoint().map_err(|e| e.to_string())?;
    let mut one = Vec::new();
    ck.write(&mut one).map_err(|e| e.to_string())?;
    let mut two = Vec::new();
    Checkpoint::read(one.as_slice()).map_err(|e| e.to_string())?.write(&mut two).map_err(|e| e.to_string())?;
    ensure(one == two, || "RGCK bytes differ".into())?;
    Ok(format!("RGEB {} bytes, RGCK {} bytes ({} tensors)", first.len(), one.len(), ck.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("gradient integrity", gradient_integrity),
        ("attention contract", attention_contract),
        ("zero-edge identity", zero_edge_identity),
        ("forward oracle", forward_oracle),
        ("metric oracles", metric_oracles),
        ("micro-F1 equals accuracy", micro_f1_is_accuracy),
        ("learnability", learnability),
        ("determinism", determinism),
        ("ablation layout", ablation_layout),
        ("format round-trips", format_round_trips),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
