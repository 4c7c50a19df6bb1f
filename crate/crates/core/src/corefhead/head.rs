use rand::Rng;
use serde::{Deserialize, Serialize};

use super::instance::Label;
use crate::error::{Error, Result};
use crate::numcore::{softmax, Axis, Tape, Tensor2, Var};
use crate::optim::{dropout_on_tape, BatchNormState, ParamGroup, RegularizerSpec};
use crate::rgat::{RgatParams, RgatWeights};
use crate::rng::{derive_seed, hash_str, seeded};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadConfig {
    pub hidden: usize,
    pub dropout: f64,
    pub bn_momentum: f64,
    pub bn_eps: f64,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            hidden: 512,
            dropout: 0.5,
            bn_momentum: 0.9,
            bn_eps: 1e-5,
        }
    }
}

impl HeadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Config("hidden size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must be in [0, 1), got {}", self.dropout)));
        }
        if !(0.0..1.0).contains(&self.bn_momentum) {
            return Err(Error::Config(format!("bn_momentum must be in [0, 1), got {}", self.bn_momentum)));
        }
        if self.bn_eps < 0.0 {
            return Err(Error::Config("bn_eps must be non-negative".into()));
        }
        Ok(())
    }
}

/// Classifier weights over any element type, in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadWeights<T> {
    /// hidden × 3·blend_dim.
    pub hidden_w: T,
    pub hidden_b: T,
    pub bn_gamma: T,
    pub bn_beta: T,
    /// 3 × hidden.
    pub out_w: T,
    pub out_b: T,
}

const HEAD_NAMES: [&str; 6] = [
    "head.hidden_w",
    "head.hidden_b",
    "head.bn_gamma",
    "head.bn_beta",
    "head.out_w",
    "head.out_b",
];

impl<T> HeadWeights<T> {
    pub fn build(input: usize, hidden: usize, mut make: impl FnMut(&str, (usize, usize)) -> Result<T>) -> Result<Self> {
        let shapes = [(hidden, input), (hidden, 1), (hidden, 1), (hidden, 1), (3, hidden), (3, 1)];
        let mut it = HEAD_NAMES.iter().zip(shapes);
        let mut next = || {
            let (n, s) = it.next().expect("six head tensors");
            make(n, s)
        };
        Ok(HeadWeights {
            hidden_w: next()?,
            hidden_b: next()?,
            bn_gamma: next()?,
            bn_beta: next()?,
            out_w: next()?,
            out_b: next()?,
        })
    }

    fn refs(&self) -> [&T; 6] {
        [&self.hidden_w, &self.hidden_b, &self.bn_gamma, &self.bn_beta, &self.out_w, &self.out_b]
    }

    pub fn named(&self) -> Vec<(String, &T)> {
        HEAD_NAMES.iter().map(|n| n.to_string()).zip(self.refs()).collect()
    }

    pub fn named_mut(&mut self) -> Vec<(String, &mut T)> {
        let refs = [
            &mut self.hidden_w,
            &mut self.hidden_b,
            &mut self.bn_gamma,
            &mut self.bn_beta,
            &mut self.out_w,
            &mut self.out_b,
        ];
        HEAD_NAMES.iter().map(|n| n.to_string()).zip(refs).collect()
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> HeadWeights<U> {
        HeadWeights {
            hidden_w: f(&self.hidden_w),
            hidden_b: f(&self.hidden_b),
            bn_gamma: f(&self.bn_gamma),
            bn_beta: f(&self.bn_beta),
            out_w: f(&self.out_w),
            out_b: f(&self.out_b),
        }
    }
}

/// Trainable head weights plus the batch-norm running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadParams {
    pub weights: HeadWeights<Tensor2>,
    pub bn: BatchNormState,
}

impl HeadParams {
    /// Glorot-uniform matrices, zero biases, unit BN scale.
    pub fn init(input: usize, config: &HeadConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let weights = HeadWeights::build(input, config.hidden, |name, (r, c)| {
            Ok(match name {
                "head.bn_gamma" => Tensor2::filled(r, c, 1.0),
                "head.hidden_w" | "head.out_w" => {
                    Tensor2::glorot(r, c, &mut seeded(derive_seed(seed, &[hash_str(name)])))
                }
                _ => Tensor2::zeros(r, c),
            })
        })?;
        Ok(HeadParams {
            weights,
            bn: BatchNormState::new(config.hidden, config.bn_momentum, config.bn_eps),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.hidden_w.cols()
    }
}

/// Mean of the columns `cols` of `blended`, as a tape op.
pub fn mention_pool_on_tape(tape: &mut Tape, blended: Var, cols: &[usize]) -> Result<Var> {
    if cols.is_empty() {
        return Err(Error::Usage("mention with no tokens".into()));
    }
    let k = tape.shape(blended).1;
    let mut sel = Tensor2::zeros(k, 1);
    for &c in cols {
        if c >= k {
            return Err(Error::Range(format!("mention column {c} of {k}")));
        }
        sel.set(c, 0, sel.get(c, 0) + 1.0 / cols.len() as f64);
    }
    let sel = tape.constant(sel);
    tape.matmul(blended, sel)
}

/// Elementwise mean of the blended vectors (columns) of `tokens`.
pub fn mention_vector(tokens: &[usize], blended: &Tensor2) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let b = tape.constant(blended.clone());
    let v = mention_pool_on_tape(&mut tape, b, tokens)?;
    Ok(tape.value(v).data().to_vec())
}

/// Logits (3 × batch) for stacked inputs `x` (3·blend_dim × batch):
/// `W2 · dropout(relu(bn(W1 x + b1))) + b2`.
#[allow(clippy::too_many_arguments)]
pub fn head_on_tape<R: Rng>(
    tape: &mut Tape,
    w: &HeadWeights<Var>,
    bn: &mut BatchNormState,
    x: Var,
    dropout: f64,
    training: bool,
    rng: &mut R,
) -> Result<Var> {
    let pre = tape.matmul(w.hidden_w, x)?;
    let pre = tape.add_column(pre, w.hidden_b)?;
    let normed = bn.forward(tape, pre, w.bn_gamma, w.bn_beta, training)?;
    let act = tape.relu(normed)?;
    let act = dropout_on_tape(tape, act, dropout, training, rng)?;
    let logits = tape.matmul(w.out_w, act)?;
    tape.add_column(logits, w.out_b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classified {
    pub logits: [f64; 3],
    pub probs: [f64; 3],
}

impl Classified {
    pub fn label(&self) -> Label {
        argmax_label(&self.probs)
    }
}

/// Class with the largest probability; exact ties go to NEITHER, then A.
pub fn argmax_label(p: &[f64; 3]) -> Label {
    [Label::Neither, Label::A, Label::B]
        .into_iter()
        .fold(None, |best: Option<Label>, l| match best {
            Some(b) if p[b.index()] >= p[l.index()] => Some(b),
            _ => Some(l),
        })
        .expect("three labels")
}

/// Classifies one instance. Training mode is rejected here because batch
/// normalization needs at least two samples; use [`head_on_tape`].
pub fn classify<R: Rng>(
    va: &[f64],
    vb: &[f64],
    vp: &[f64],
    params: &mut HeadParams,
    config: &HeadConfig,
    training: bool,
    rng: &mut R,
) -> Result<Classified> {
    if va.len() != vb.len() || va.len() != vp.len() {
        return Err(Error::dim(
            "classify",
            format!("{}/{}", va.len(), vb.len()),
            format!("{}", vp.len()),
        ));
    }
    if 3 * va.len() != params.input_dim() {
        return Err(Error::dim("classify", format!("3x{}", va.len()), format!("{}", params.input_dim())));
    }
    let mut tape = Tape::new();
    let w = params.weights.map(|t| tape.constant(t.clone()));
    let x = tape.constant(Tensor2::column(&[va, vb, vp].concat()));
    let logits = head_on_tape(&mut tape, &w, &mut params.bn, x, config.dropout, training, rng)?;
    let l = tape.value(logits).clone();
    let p = softmax(&l, Axis::Rows);
    Ok(Classified {
        logits: [l.get(0, 0), l.get(1, 0), l.get(2, 0)],
        probs: [p.get(0, 0), p.get(1, 0), p.get(2, 0)],
    })
}

/// Mean cross-entropy plus the L2 penalty on the scoped RGAT weights.
pub fn loss_on_tape(
    tape: &mut Tape,
    logits: Var,
    labels: &[Label],
    reg: &RegularizerSpec,
    rgat: &RgatWeights<Var>,
) -> Result<Var> {
    let idx: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    let ce = tape.softmax_cross_entropy(logits, &idx)?;
    let tagged: Vec<(ParamGroup, Var)> = rgat.named().into_iter().map(|(_, v)| (ParamGroup::Rgat, *v)).collect();
    match reg.penalty(tape, &tagged)? {
        Some(p) => tape.add(ce, p),
        None => Ok(ce),
    }
}

/// Plain-value form of [`loss_on_tape`]; `logits` is 3 × batch.
pub fn loss(logits: &Tensor2, labels: &[Label], reg: &RegularizerSpec, rgat: &RgatParams) -> Result<f64> {
    let mut tape = Tape::new();
    let l = tape.constant(logits.clone());
    let w = rgat.map(|t| tape.constant(t.clone()));
    let out = loss_on_tape(&mut tape, l, labels, reg, &w)?;
    Ok(tape.value(out).get(0, 0))
}
