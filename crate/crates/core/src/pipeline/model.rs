//! The joint model: RGAT encoder feeding the three-way classifier head.

use std::path::Path;

use rand::Rng;

use super::config::TrainConfig;
use super::dataset::Dataset;
use crate::corefhead::{head_on_tape, loss_on_tape, mention_pool_on_tape, HeadConfig, HeadParams, HeadWeights};
use crate::depgraph::sample_neighbors;
use crate::error::{Error, Result};
use crate::numcore::{grad_check, softmax, Axis, GradCheckReport, Tape, Tensor2, Var};
use crate::optim::{BatchNormState, RegularizerSpec};
use crate::rgat::{rgat_on_tape, Checkpoint, RgatConfig, RgatParams, RgatWeights};
use crate::rng::{derive_seed, hash_str, seeded};

const RUNNING_MEAN: &str = "head.bn_running_mean";
const RUNNING_VAR: &str = "head.bn_running_var";

/// Which neighbor sample a forward pass sees. Training draws a fresh sample
/// per epoch; evaluation always uses the same one so that scores are
/// reproducible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    Train { fold: u64, epoch: u64 },
    Eval,
}

impl Sampling {
    /// Seed of the neighbor sample for `doc_id`.
    pub fn seed(self, base: u64, doc_id: &str) -> u64 {
        match self {
            Sampling::Train { fold, epoch } => derive_seed(base, &[fold, epoch, hash_str(doc_id)]),
            Sampling::Eval => derive_seed(base, &[u64::MAX, hash_str(doc_id)]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub rgat_config: RgatConfig,
    pub head_config: HeadConfig,
    pub rgat: RgatParams,
    pub head: HeadParams,
}

impl Model {
    pub fn init(cfg: &TrainConfig, d_bert: usize, seed: u64) -> Result<Self> {
        let rgat_config = cfg.rgat(d_bert);
        let head_config = cfg.head();
        let rgat = RgatParams::init(&rgat_config, derive_seed(seed, &[1]))?;
        let head = HeadParams::init(3 * rgat_config.blend_dim(), &head_config, derive_seed(seed, &[2]))?;
        Ok(Model {
            rgat_config,
            head_config,
            rgat,
            head,
        })
    }

    /// Trainable tensors, RGAT first, in canonical order.
    pub fn named(&self) -> Vec<(String, &Tensor2)> {
        let mut out = self.rgat.named();
        out.extend(self.head.weights.named());
        out
    }

    pub fn named_mut(&mut self) -> Vec<(String, &mut Tensor2)> {
        let mut out = self.rgat.named_mut();
        out.extend(self.head.weights.named_mut());
        out
    }

    /// Trainable tensors and batch-norm running statistics, rounded to f32.
    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let mut ck = Checkpoint::new();
        for (name, t) in self.named() {
            ck.insert(&name, t)?;
        }
        ck.insert(RUNNING_MEAN, &Tensor2::column(&self.head.bn.running_mean))?;
        ck.insert(RUNNING_VAR, &Tensor2::column(&self.head.bn.running_var))?;
        Ok(ck)
    }

    pub fn from_checkpoint(ck: &Checkpoint, rgat_config: &RgatConfig, head_config: &HeadConfig) -> Result<Self> {
        let rgat = RgatParams::from_named(rgat_config, |n| ck.get(n).cloned())?;
        let input = 3 * rgat_config.blend_dim();
        let weights = HeadWeights::build(input, head_config.hidden, |name, shape| {
            let t = ck.require(name)?;
            if t.shape() != shape {
                return Err(Error::dim("load", format!("{name} {}", t.shape_str()), format!("{}x{}", shape.0, shape.1)));
            }
            Ok(t.clone())
        })?;
        let mut bn = BatchNormState::new(head_config.hidden, head_config.bn_momentum, head_config.bn_eps);
        for (name, slot) in [(RUNNING_MEAN, &mut bn.running_mean), (RUNNING_VAR, &mut bn.running_var)] {
            let t = ck.require(name)?;
            if t.shape() != (head_config.hidden, 1) {
                return Err(Error::dim("load", format!("{name} {}", t.shape_str()), format!("{}x1", head_config.hidden)));
            }
            *slot = t.data().to_vec();
        }
        Ok(Model {
            rgat_config: rgat_config.clone(),
            head_config: head_config.clone(),
            rgat,
            head: HeadParams { weights, bn },
        })
    }

    /// The model exactly as it would be after a save and load.
    pub fn rounded(&self) -> Result<Self> {
        Model::from_checkpoint(&self.to_checkpoint()?, &self.rgat_config, &self.head_config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_checkpoint()?.save(path)
    }

    pub fn load(path: &Path, rgat_config: &RgatConfig, head_config: &HeadConfig) -> Result<Self> {
        Model::from_checkpoint(&Checkpoint::load(path)?, rgat_config, head_config)
    }

    /// Class probabilities for instances `idx`, in evaluation mode.
    pub fn predict(&self, data: &Dataset, idx: &[usize], sample_seed: u64) -> Result<Vec<[f64; 3]>> {
        const CHUNK: usize = 256;
        let mut out = Vec::with_capacity(idx.len());
        let mut bn = self.head.bn.clone();
        for chunk in idx.chunks(CHUNK) {
            let mut tape = Tape::new();
            let rw = self.rgat.map(|t| tape.constant(t.clone()));
            let hw = self.head.weights.map(|t| tape.constant(t.clone()));
            let x = features_on_tape(&mut tape, &rw, &self.rgat_config, data, chunk, |doc| {
                Sampling::Eval.seed(sample_seed, doc)
            })?;
            let logits = head_on_tape(&mut tape, &hw, &mut bn, x, 0.0, false, &mut seeded(0))?;
            let p = softmax(tape.value(logits), Axis::Rows);
            out.extend((0..chunk.len()).map(|c| [p.get(0, c), p.get(1, c), p.get(2, c)]));
        }
        Ok(out)
    }
}

/// Stacked `[v_A; v_B; v_P]` columns (3·blend_dim × batch) for instances
/// `batch`, where each `v` is the mean blended vector of the mention tokens.
pub fn features_on_tape(
    tape: &mut Tape,
    w: &RgatWeights<Var>,
    config: &RgatConfig,
    data: &Dataset,
    batch: &[usize],
    sample_seed: impl Fn(&str) -> u64,
) -> Result<Var> {
    if data.d_bert() != config.d_bert {
        return Err(Error::dim("features", format!("embeddings {}", data.d_bert()), format!("d_bert {}", config.d_bert)));
    }
    let mut cols = Vec::with_capacity(batch.len());
    for &i in batch {
        let g = data.graph(i);
        let m = data.mentions(i);
        let samples = sample_neighbors(g, config.sample_size, sample_seed(&g.doc_id))?;
        let nodes = m.union();
        let trace = rgat_on_tape(tape, w, config, g, &data.embeddings, &samples, &nodes)?;
        let local = |toks: &[usize]| -> Vec<usize> {
            toks.iter().map(|t| nodes.binary_search(t).expect("mention tokens are in the union")).collect()
        };
        let va = mention_pool_on_tape(tape, trace.blended, &local(&m.a))?;
        let vb = mention_pool_on_tape(tape, trace.blended, &local(&m.b))?;
        let vp = mention_pool_on_tape(tape, trace.blended, &local(&m.p))?;
        cols.push(tape.concat(&[va, vb, vp], Axis::Rows)?);
    }
    tape.concat(&cols, Axis::Cols)
}

/// Training loss of one batch on the tape.
#[allow(clippy::too_many_arguments)]
pub fn batch_loss_on_tape<R: Rng>(
    tape: &mut Tape,
    rgat: &RgatWeights<Var>,
    head: &HeadWeights<Var>,
    model: &Model,
    bn: &mut BatchNormState,
    data: &Dataset,
    batch: &[usize],
    reg: &RegularizerSpec,
    sample_seed: impl Fn(&str) -> u64,
    rng: &mut R,
) -> Result<Var> {
    let x = features_on_tape(tape, rgat, &model.rgat_config, data, batch, sample_seed)?;
    let logits = head_on_tape(tape, head, bn, x, model.head_config.dropout, true, rng)?;
    let labels: Vec<_> = batch.iter().map(|&i| data.instances[i].label).collect();
    loss_on_tape(tape, logits, &labels, reg, rgat)
}

/// Compares analytic and central-difference gradients of the training loss
/// on `batch` for every trainable tensor. Dropout is switched off; batch
/// norm runs in training mode, so `batch` needs at least two instances.
pub fn model_grad_check(
    model: &Model,
    data: &Dataset,
    batch: &[usize],
    reg: &RegularizerSpec,
    seed: u64,
    h: f64,
    tol: f64,
) -> Result<GradCheckReport> {
    let mut probe = model.clone();
    probe.head_config.dropout = 0.0;
    let params: Vec<(String, Tensor2)> = probe.named().into_iter().map(|(n, t)| (n, t.clone())).collect();
    grad_check(
        &params,
        |tape, vars| {
            let mut it = vars.iter().copied();
            let rgat = RgatWeights::build(&probe.rgat_config, |_, _| Ok(it.next().expect("one var per tensor")))?;
            let head = HeadWeights::build(probe.head.input_dim(), probe.head_config.hidden, |_, _| {
                Ok(it.next().expect("one var per tensor"))
            })?;
            let mut bn = probe.head.bn.clone();
            batch_loss_on_tape(
                tape,
                &rgat,
                &head,
                &probe,
                &mut bn,
                data,
                batch,
                reg,
                |doc| Sampling::Eval.seed(seed, doc),
                &mut seeded(0),
            )
        },
        h,
        tol,
    )
}
