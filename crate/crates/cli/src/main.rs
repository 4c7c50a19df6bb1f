//! `rgat` command-line front end.
//!
//! Exit status is 0 on success, 1 for bad input or configuration and 2 for
//! failures while running (I/O, divergence, failed gradient checks).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rgat_core::corefmetrics::{micro_f1, parse_cluster_file, score_documents, MetricMode};
use rgat_core::depgraph::{graph_stats, parse_conllu};
use rgat_core::embedstore::{synth_embeddings, write_table};
use rgat_core::pipeline::{
    ablation_grid, ablation_table, ablation_tsv, cross_validate, ingest_gap, load_ensemble, model_grad_check,
    predict_ensemble, read_gap_tsv, read_predictions, run_ablation, save_ensemble, score_predictions, signal_for,
    synth_corpus, tiny_dataset, write_gap_tsv, write_predictions, Dataset, Model, Prediction, TrainConfig,
    DEFAULT_SIZES,
};
use rgat_core::rgat::FinalAggregator;
use rgat_core::{Error, Result};

#[derive(Parser)]
#[command(name = "rgat", version, about = "Relation graph attention for GAP pronoun resolution")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Standard,
    Paper,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble a GAP TSV, its CoNLL-U parses and token embeddings into a dataset directory.
    IngestGap {
        #[arg(long)]
        tsv: PathBuf,
        #[arg(long)]
        conllu: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated training; writes one checkpoint per fold.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// JSON config; omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Dataset to predict with the fold ensemble after training.
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Fold-averaged predictions as TSV.
    Predict {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Micro-F1 of a prediction file against a labelled GAP TSV.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// MUC, B3 and CEAF-phi4 between cluster files.
    ScoreClusters {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        response: PathBuf,
        #[arg(long, value_enum, default_value = "standard")]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Sweep (m, n) and the final aggregator, one cross-validation per cell.
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Score cells on this dataset instead of out-of-fold predictions.
        #[arg(long)]
        test: Option<PathBuf>,
        /// Separate Mean and Sum columns.
        #[arg(long)]
        split_mean_sum: bool,
    },
    /// Random token embeddings for every token of a CoNLL-U file.
    Synth {
        #[arg(long)]
        conllu: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        /// GAP TSV whose labels are planted into the embeddings.
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, default_value_t = 3.0)]
        amplitude: f32,
        /// `.rgeb` for binary, `.txt`/`.tsv` for text.
        #[arg(long)]
        out: PathBuf,
    },
    /// Templated GAP TSV and CoNLL-U files.
    SynthGap {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "synth")]
        prefix: String,
        /// Directory receiving gap.tsv and parses.conllu.
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference check of every model gradient on a five-token fixture.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Central-difference step.
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Per-document graph statistics.
    Stats {
        #[arg(long)]
        conllu: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        Some(p) => TrainConfig::load(p),
        None => Ok(TrainConfig::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn predictions(data: &Dataset, models: &[Model], seed: u64) -> Result<Vec<Prediction>> {
    Ok(predict_ensemble(models, data, seed)?
        .into_iter()
        .zip(&data.instances)
        .map(|((probs, label), inst)| Prediction {
            id: inst.doc_id.clone(),
            probs,
            label,
        })
        .collect())
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::IngestGap {
            tsv,
            conllu,
            embeddings,
            out,
        } => {
            let ds = ingest_gap(&tsv, &conllu, &embeddings)?;
            ds.save(&out)?;
            println!(
                "{} instances, {} graphs, {} embeddings (dim {}) -> {}",
                ds.len(),
                ds.graphs.len(),
                ds.embeddings.len(),
                ds.d_bert(),
                out.display()
            );
        }
        Cmd::Train {
            data,
            config,
            out,
            test,
            quiet,
        } => {
            let cfg = load_config(config.as_deref())?;
            let ds = Dataset::load(&data)?;
            let test = test.map(|t| Dataset::load(&t)).transpose()?;
            let cv = cross_validate(&ds, &cfg, &mut |fold, log| {
                if !quiet {
                    eprintln!(
                        "fold {fold} epoch {:>3} loss {:.4} val_f1 {:.4}",
                        log.epoch, log.mean_loss, log.val_f1
                    );
                }
            })?;
            let manifest = save_ensemble(&out, &cfg, ds.d_bert(), &cv)?;
            for f in &manifest.folds {
                println!(
                    "fold {} best_epoch {} val_f1 {:.4} train_f1 {:.4}",
                    f.fold, f.best_epoch, f.val_f1, f.train_f1
                );
            }
            println!("out-of-fold micro-F1 {:.4}", manifest.oof_f1);
            if let Some(t) = test {
                let models: Vec<Model> = cv.folds.into_iter().map(|f| f.model).collect();
                let preds = predictions(&t, &models, cfg.seed)?;
                write_predictions(create(&out.join("test_predictions.tsv"))?, &preds)?;
                let labels: Vec<_> = preds.iter().map(|p| p.label).collect();
                println!("test micro-F1 {:.4}", micro_f1(&t.labels(), &labels)?.f1);
            }
        }
        Cmd::Predict { data, models, out } => {
            let ds = Dataset::load(&data)?;
            let (manifest, models) = load_ensemble(&models)?;
            if manifest.d_bert != ds.d_bert() {
                return Err(Error::Config(format!(
                    "model expects {}-wide embeddings, dataset has {}",
                    manifest.d_bert,
                    ds.d_bert()
                )));
            }
            let preds = predictions(&ds, &models, manifest.config.seed)?;
            let mut w = create(&out)?;
            write_predictions(&mut w, &preds)?;
            w.flush()?;
            println!("{} predictions from {} folds -> {}", preds.len(), models.len(), out.display());
        }
        Cmd::Score { gold, pred, json } => {
            let gold = read_gap_tsv(BufReader::new(File::open(&gold)?))?;
            let preds = read_predictions(BufReader::new(File::open(&pred)?))?;
            let prf = score_predictions(&gold, &preds)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&prf)?);
            } else {
                println!("micro-F1 {:.4} (P {:.4} R {:.4}, {} rows)", prf.f1, prf.precision, prf.recall, gold.len());
            }
        }
        Cmd::ScoreClusters {
            key,
            response,
            mode,
            json,
        } => {
            let key = parse_cluster_file(&fs::read_to_string(&key)?)?;
            let resp = parse_cluster_file(&fs::read_to_string(&response)?)?;
            let mode = match mode {
                Mode::Standard => MetricMode::Standard,
                Mode::Paper => MetricMode::PaperLiteral,
            };
            let report = score_documents(&key, &resp, mode);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.table());
            }
        }
        Cmd::Ablate {
            data,
            out,
            config,
            test,
            split_mean_sum,
        } => {
            let cfg = load_config(config.as_deref())?;
            let ds = Dataset::load(&data)?;
            let test = test.map(|t| Dataset::load(&t)).transpose()?;
            let cells = ablation_grid(&DEFAULT_SIZES, split_mean_sum);
            let rows = run_ablation(&ds, &cfg, &cells, test.as_ref(), &mut |r| {
                eprintln!(
                    "m={} n={} {:<8} blend_dim {} micro-F1 {:.4} ({:.1}s)",
                    r.m, r.n, r.column, r.blend_dim, r.micro_f1, r.seconds
                );
            })?;
            let mut w = create(&out)?;
            w.write_all(ablation_tsv(&rows).as_bytes())?;
            w.flush()?;
            print!("{}", ablation_table(&rows));
        }
        Cmd::Synth {
            conllu,
            dim,
            seed,
            signal,
            amplitude,
            out,
        } => {
            let graphs = parse_conllu(&fs::read_to_string(&conllu)?)?;
            let spec = match signal {
                Some(p) => {
                    let rows = read_gap_tsv(BufReader::new(File::open(&p)?))?;
                    Some(signal_for(&rows, &graphs, amplitude)?)
                }
                None => None,
            };
            let table = synth_embeddings(&graphs, dim, seed, spec.as_ref())?;
            write_table(&table, &out)?;
            println!("{} token vectors (dim {dim}) -> {}", table.len(), out.display());
        }
        Cmd::SynthGap { n, seed, prefix, out } => {
            let corpus = synth_corpus(n, seed, &prefix);
            fs::create_dir_all(&out)?;
            let mut w = create(&out.join("gap.tsv"))?;
            write_gap_tsv(&mut w, &corpus.instances)?;
            w.flush()?;
            fs::write(out.join("parses.conllu"), &corpus.conllu)?;
            println!("{n} instances -> {}", out.display());
        }
        Cmd::Gradcheck { seed, tol, step } => {
            let data = tiny_dataset(8, seed)?;
            let batch: Vec<usize> = (0..data.len()).collect();
            let mut failed = Vec::new();
            for aggregator in [FinalAggregator::Concat, FinalAggregator::Sum, FinalAggregator::Mean] {
                let cfg = TrainConfig {
                    d: 4,
                    m: 3,
                    n: 5,
                    hidden: 6,
                    aggregator,
                    seed,
                    ..TrainConfig::default()
                };
                let model = Model::init(&cfg, 8, seed)?;
                let report = model_grad_check(&model, &data, &batch, &cfg.regularizer(), seed, step, tol)?;
                for t in &report.tensors {
                    println!(
                        "{:<8} {:<24} max_rel {:.3e} {}",
                        aggregator.name(),
                        t.name,
                        t.max_rel_error,
                        if t.passed { "ok" } else { "FAIL" }
                    );
                }
                failed.extend(report.failures().map(|t| format!("{}/{}", aggregator.name(), t.name)));
            }
            if !failed.is_empty() {
                return Err(Error::Check(format!("gradient mismatch in {}", failed.join(", "))));
            }
        }
        Cmd::Stats { conllu, json } => {
            let graphs = parse_conllu(&fs::read_to_string(&conllu)?)?;
            let stats: Vec<_> = graphs.iter().map(graph_stats).collect();
            if json {
                println!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                println!("doc_id\ttokens\troots\tmax_out_degree\tmax_neighbors\thead_to_dep\tdep_to_head\tself_loop");
                for s in &stats {
                    println!(
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                        s.doc_id,
                        s.tokens,
                        s.roots,
                        s.max_out_degree,
                        s.max_neighbors,
                        s.head_to_dep_edges,
                        s.dep_to_head_edges,
                        s.self_loop_edges
                    );
                }
            }
        }
    }
    Ok(())
}
