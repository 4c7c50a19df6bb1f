//! Fold ensembles, averaged predictions and the prediction file format.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::dataset::Dataset;
use super::model::Model;
use super::train::CvResult;
use crate::corefhead::{argmax_label, GapInstance, Label};
use crate::corefmetrics::{micro_f1, Prf};
use crate::error::{Error, Result};

/// Mean of per-model probability rows; the label is the argmax of the mean.
pub fn average_predictions(runs: &[Vec<[f64; 3]>]) -> Result<Vec<([f64; 3], Label)>> {
    let first = runs.first().ok_or_else(|| Error::Usage("no predictions to average".into()))?;
    if let Some(bad) = runs.iter().find(|r| r.len() != first.len()) {
        return Err(Error::Usage(format!("prediction runs have {} and {} rows", first.len(), bad.len())));
    }
    let k = runs.len() as f64;
    Ok((0..first.len())
        .map(|i| {
            let mut p = [0.0; 3];
            for r in runs {
                for c in 0..3 {
                    p[c] += r[i][c];
                }
            }
            let p = p.map(|v| v / k);
            (p, argmax_label(&p))
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub file: String,
    pub best_epoch: usize,
    pub val_f1: f64,
    pub train_f1: f64,
}

/// `model.json` in a model directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub d_bert: usize,
    pub config: TrainConfig,
    pub folds: Vec<FoldSummary>,
    pub oof_f1: f64,
}

/// Writes one checkpoint per fold plus `model.json`.
pub fn save_ensemble(dir: &Path, cfg: &TrainConfig, d_bert: usize, cv: &CvResult) -> Result<ModelManifest> {
    fs::create_dir_all(dir)?;
    let mut folds = Vec::with_capacity(cv.folds.len());
    for f in &cv.folds {
        let file = format!("fold_{}.rgck", f.fold);
        f.model.save(&dir.join(&file))?;
        folds.push(FoldSummary {
            fold: f.fold,
            file,
            best_epoch: f.best_epoch,
            val_f1: f.val_f1,
            train_f1: f.train_f1,
        });
    }
    let manifest = ModelManifest {
        d_bert,
        config: cfg.clone(),
        folds,
        oof_f1: cv.oof_f1,
    };
    let mut w = BufWriter::new(File::create(dir.join("model.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.flush()?;
    Ok(manifest)
}

pub fn load_ensemble(dir: &Path) -> Result<(ModelManifest, Vec<Model>)> {
    let manifest: ModelManifest = serde_json::from_str(&fs::read_to_string(dir.join("model.json"))?)?;
    manifest.config.validate()?;
    let rgat = manifest.config.rgat(manifest.d_bert);
    let head = manifest.config.head();
    let models = manifest
        .folds
        .iter()
        .map(|f| Model::load(&dir.join(&f.file), &rgat, &head))
        .collect::<Result<Vec<_>>>()?;
    if models.is_empty() {
        return Err(Error::Format(format!("{}: model has no folds", dir.display())));
    }
    Ok((manifest, models))
}

/// Fold-averaged probabilities for every row of `data`.
pub fn predict_ensemble(models: &[Model], data: &Dataset, seed: u64) -> Result<Vec<([f64; 3], Label)>> {
    let idx: Vec<usize> = (0..data.len()).collect();
    let runs = models
        .iter()
        .map(|m| m.predict(data, &idx, seed))
        .collect::<Result<Vec<_>>>()?;
    average_predictions(&runs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub probs: [f64; 3],
    pub label: Label,
}

const PRED_HEADER: &str = "ID\tp_A\tp_B\tp_NEITHER\tpredicted_label";

pub fn write_predictions<W: Write>(mut w: W, preds: &[Prediction]) -> Result<()> {
    writeln!(w, "{PRED_HEADER}")?;
    for p in preds {
        writeln!(w, "{}\t{:.6}\t{:.6}\t{:.6}\t{}", p.id, p.probs[0], p.probs[1], p.probs[2], p.label)?;
    }
    Ok(())
}

pub fn read_predictions<R: BufRead>(r: R) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim_end() != PRED_HEADER {
                return Err(Error::Format(format!("prediction header must be {PRED_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: k + 1, msg };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(bad(format!("expected 5 fields, got {}", f.len())));
        }
        let mut probs = [0.0; 3];
        for c in 0..3 {
            probs[c] = f[c + 1].parse().map_err(|_| bad(format!("bad probability {:?}", f[c + 1])))?;
        }
        let label = f[4].parse().map_err(|_| bad(format!("bad label {:?}", f[4])))?;
        out.push(Prediction {
            id: f[0].to_string(),
            probs,
            label,
        });
    }
    Ok(out)
}

/// Micro-F1 of predictions against gold rows, matched by ID. Every gold
/// row needs exactly one prediction.
pub fn score_predictions(gold: &[GapInstance], preds: &[Prediction]) -> Result<Prf> {
    let mut by_id: BTreeMap<&str, Label> = BTreeMap::new();
    for p in preds {
        if by_id.insert(&p.id, p.label).is_some() {
            return Err(Error::Duplicate(format!("prediction for {} appears twice", p.id)));
        }
    }
    let missing: Vec<&str> = gold.iter().map(|g| g.doc_id.as_str()).filter(|id| !by_id.contains_key(id)).collect();
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(10).copied().collect();
        return Err(Error::Coverage(format!(
            "{} gold rows have no prediction: {}",
            missing.len(),
            shown.join(", ")
        )));
    }
    let g: Vec<Label> = gold.iter().map(|x| x.label).collect();
    let p: Vec<Label> = gold.iter().map(|x| by_id[x.doc_id.as_str()]).collect();
    micro_f1(&g, &p)
}
