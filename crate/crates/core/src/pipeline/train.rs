//! Cross-validated training with Adam, warmup and per-fold model selection.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::config::TrainConfig;
use super::dataset::Dataset;
use super::model::{batch_loss_on_tape, Model, Sampling};
use crate::corefhead::{argmax_label, Label};
use crate::corefmetrics::micro_f1;
use crate::error::{Error, Result};
use crate::numcore::Tape;
use crate::optim::{AdamConfig, AdamState, WarmupSchedule};
use crate::rng::{derive_seed, seeded};

/// Splits `0..n` into `folds` validation sets: a seeded shuffle cut into
/// contiguous parts, the first `n % folds` parts one longer. Each part is
/// returned sorted.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Config(format!("folds must be at least 2, got {folds}")));
    }
    if folds > n {
        return Err(Error::Usage(format!("{folds} folds requested for {n} instances")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(derive_seed(seed, &[0x006b_666f_6c64])));
    let (base, extra) = (n / folds, n % folds);
    let mut parts = Vec::with_capacity(folds);
    let mut at = 0;
    for k in 0..folds {
        let len = base + usize::from(k < extra);
        let mut part = order[at..at + len].to_vec();
        part.sort_unstable();
        parts.push(part);
        at += len;
    }
    Ok(parts)
}

/// Shuffled batches of `idx`. A trailing batch of one is merged into the
/// previous batch since batch norm cannot train on a single sample.
pub fn make_batches(idx: &[usize], batch_size: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order = idx.to_vec();
    order.shuffle(&mut seeded(seed));
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect();
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
        let last = batches.pop().expect("non-empty");
        batches.last_mut().expect("non-empty").extend(last);
    }
    batches
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub val_f1: f64,
}

/// Outcome of training on one fold. `model` is the best epoch's weights as
/// stored on disk (rounded to f32).
#[derive(Clone, Debug)]
pub struct FoldResult {
    pub fold: usize,
    pub val_idx: Vec<usize>,
    pub best_epoch: usize,
    pub val_f1: f64,
    pub train_f1: f64,
    pub val_probs: Vec<[f64; 3]>,
    pub history: Vec<EpochLog>,
    pub model: Model,
}

pub fn labels_of(probs: &[[f64; 3]]) -> Vec<Label> {
    probs.iter().map(argmax_label).collect()
}

fn f1_of(data: &Dataset, idx: &[usize], probs: &[[f64; 3]]) -> Result<f64> {
    let gold: Vec<Label> = idx.iter().map(|&i| data.instances[i].label).collect();
    Ok(micro_f1(&gold, &labels_of(probs))?.f1)
}

/// Trains one fold, validating every epoch. The epoch with the strictly
/// highest validation micro-F1 wins; earlier epochs win ties.
pub fn train_fold(
    data: &Dataset,
    cfg: &TrainConfig,
    fold: usize,
    val_idx: &[usize],
    on_epoch: &mut dyn FnMut(usize, &EpochLog),
) -> Result<FoldResult> {
    cfg.validate()?;
    let mut in_val = vec![false; data.len()];
    for &i in val_idx {
        in_val[i] = true;
    }
    let train_idx: Vec<usize> = (0..data.len()).filter(|&i| !in_val[i]).collect();
    if train_idx.len() < 2 {
        return Err(Error::Usage(format!("fold {fold} leaves {} training instances", train_idx.len())));
    }

    let fold_seed = derive_seed(cfg.seed, &[fold as u64]);
    let mut model = Model::init(cfg, data.d_bert(), fold_seed)?;
    let shapes: Vec<(usize, usize)> = model.named().iter().map(|(_, t)| t.shape()).collect();
    let mut adam = AdamState::new(&shapes, AdamConfig::default());
    let per_epoch = make_batches(&train_idx, cfg.batch_size, 0).len() as u64;
    let schedule = WarmupSchedule::with_fraction(cfg.lr, cfg.warmup, per_epoch * cfg.epochs as u64)?;
    let reg = cfg.regularizer();

    let mut best: Option<(usize, f64, Model)> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let batches = make_batches(&train_idx, cfg.batch_size, derive_seed(fold_seed, &[epoch as u64, 1]));
        let sampling = Sampling::Train {
            fold: fold as u64,
            epoch: epoch as u64,
        };
        let mut dropout_rng = seeded(derive_seed(fold_seed, &[epoch as u64, 2]));
        let mut loss_sum = 0.0;
        for (b, batch) in batches.iter().enumerate() {
            let diverged = |msg: String| {
                Error::Divergence(format!("fold {fold} epoch {epoch} batch {b} (rows {:?}): {msg}", batch))
            };
            let mut tape = Tape::new();
            let rw = model.rgat.map(|t| tape.param(t.clone()));
            let hw = model.head.weights.map(|t| tape.param(t.clone()));
            let mut bn = model.head.bn.clone();
            let loss = batch_loss_on_tape(
                &mut tape,
                &rw,
                &hw,
                &model,
                &mut bn,
                data,
                batch,
                &reg,
                |doc| sampling.seed(cfg.seed, doc),
                &mut dropout_rng,
            )
            .map_err(|e| match e {
                Error::NonFinite(m) => diverged(m),
                e => e,
            })?;
            let value = tape.value(loss).get(0, 0);
            if !value.is_finite() {
                return Err(diverged(format!("loss is {value}")));
            }
            tape.backward(loss).map_err(|e| match e {
                Error::NonFinite(m) => diverged(m),
                e => e,
            })?;
            let mut grads: Vec<_> = rw.named().into_iter().map(|(_, v)| tape.grad(*v)).collect();
            grads.extend(hw.named().into_iter().map(|(_, v)| tape.grad(*v)));
            let lr = schedule.lr_at(adam.step_count() + 1)?;
            adam.step(&mut model.named_mut(), &grads, lr).map_err(|e| match e {
                Error::NonFinite(m) => diverged(m),
                e => e,
            })?;
            model.head.bn = bn;
            loss_sum += value;
        }

        let candidate = model.rounded()?;
        let probs = candidate.predict(data, val_idx, cfg.seed)?;
        let val_f1 = f1_of(data, val_idx, &probs)?;
        let log = EpochLog {
            epoch,
            mean_loss: loss_sum / batches.len() as f64,
            val_f1,
        };
        on_epoch(fold, &log);
        history.push(log);
        if best.as_ref().is_none_or(|(_, f, _)| val_f1 > *f) {
            best = Some((epoch, val_f1, candidate));
        }
    }

    let (best_epoch, val_f1, model) = best.expect("at least one epoch");
    let val_probs = model.predict(data, val_idx, cfg.seed)?;
    let train_probs = model.predict(data, &train_idx, cfg.seed)?;
    Ok(FoldResult {
        fold,
        val_idx: val_idx.to_vec(),
        best_epoch,
        val_f1,
        train_f1: f1_of(data, &train_idx, &train_probs)?,
        val_probs,
        history,
        model,
    })
}

#[derive(Clone, Debug)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    /// Out-of-fold probabilities, aligned with the dataset rows.
    pub oof_probs: Vec<[f64; 3]>,
    pub oof_f1: f64,
}

impl CvResult {
    pub fn models(&self) -> Vec<&Model> {
        self.folds.iter().map(|f| &f.model).collect()
    }
}

pub fn cross_validate(
    data: &Dataset,
    cfg: &TrainConfig,
    on_epoch: &mut dyn FnMut(usize, &EpochLog),
) -> Result<CvResult> {
    cfg.validate()?;
    let parts = kfold_split(data.len(), cfg.folds, cfg.seed)?;
    let mut oof_probs = vec![[0.0; 3]; data.len()];
    let mut folds = Vec::with_capacity(parts.len());
    for (k, val) in parts.iter().enumerate() {
        let r = train_fold(data, cfg, k, val, on_epoch)?;
        for (&i, p) in r.val_idx.iter().zip(&r.val_probs) {
            oof_probs[i] = *p;
        }
        folds.push(r);
    }
    let all: Vec<usize> = (0..data.len()).collect();
    let oof_f1 = f1_of(data, &all, &oof_probs)?;
    Ok(CvResult {
        folds,
        oof_probs,
        oof_f1,
    })
}
