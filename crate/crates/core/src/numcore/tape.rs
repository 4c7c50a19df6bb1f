//! Reverse-mode automatic differentiation over [`Tensor2`] values.
//!
//! Nodes are appended in evaluation order, so the node index is already a
//! topological order and [`Tape::backward`] walks it in reverse.

use super::tensor::{gemm, Tensor2};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Matrix axis. `Rows` is axis 0: softmax along `Rows` normalizes each
/// column, concatenation along `Rows` stacks vertically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddColumn(Var, Var),
    Mul(Var, Var),
    MulRow(Var, Var),
    MulColumn(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Relu(Var),
    Softmax(Var, Axis),
    Concat(Vec<Var>, Axis),
    SliceRows(Var, usize),
    Sum(Vec<Var>),
    SumAll(Var),
    SumSquares(Var),
    MaxPoolColumns {
        x: Var,
        // source column per output entry, `usize::MAX` for empty pools
        argmax: Vec<usize>,
    },
    BatchNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        xhat: Tensor2,
        inv_std: Vec<f64>,
    },
    SoftmaxXent {
        logits: Var,
        probs: Tensor2,
        labels: Vec<usize>,
    },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::MatMul(..) => "matmul",
            Op::Add(..) => "add",
            Op::AddColumn(..) => "add_column",
            Op::Mul(..) => "mul",
            Op::MulRow(..) => "mul_row",
            Op::MulColumn(..) => "mul_column",
            Op::Scale(..) => "scale",
            Op::Tanh(..) => "tanh",
            Op::Relu(..) => "relu",
            Op::Softmax(..) => "softmax",
            Op::Concat(..) => "concat",
            Op::SliceRows(..) => "slice_rows",
            Op::Sum(..) => "sum",
            Op::SumAll(..) => "sum_reduce",
            Op::SumSquares(..) => "sum_squares",
            Op::MaxPoolColumns { .. } => "max_pool_columns",
            Op::BatchNorm { .. } => "batch_norm",
            Op::SoftmaxXent { .. } => "softmax_cross_entropy",
        }
    }
}

#[derive(Debug)]
struct Node {
    value: Tensor2,
    op: Op,
    requires_grad: bool,
}

/// A single-threaded computation record. Build one per forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor2>>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaf; gradients are accumulated for it.
    pub fn param(&mut self, value: Tensor2) -> Var {
        self.push_unchecked(value, Op::Leaf, true)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor2) -> Var {
        self.push_unchecked(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor2 {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// Gradient of the last `backward` target with respect to `v`; zeros if
    /// `v` did not influence it.
    pub fn grad(&self, v: Var) -> Tensor2 {
        match self.grads.get(v.0).and_then(Option::as_ref) {
            Some(g) => g.clone(),
            None => {
                let (r, c) = self.shape(v);
                Tensor2::zeros(r, c)
            }
        }
    }

    pub fn zero_grad(&mut self) {
        self.grads.clear();
    }

    fn push_unchecked(&mut self, value: Tensor2, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, value: Tensor2, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("output of {}", op.name())));
        }
        let rg = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        Ok(self.push_unchecked(value, op, rg))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.value(a), self.value(b));
        if sa.shape() != sb.shape() {
            return Err(Error::dim(op, sa.shape_str(), sb.shape_str()));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        self.push(value, Op::MatMul(a, b), &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let mut value = self.value(a).clone();
        value.add_assign(self.value(b));
        self.push(value, Op::Add(a, b), &[a, b])
    }

    /// `x (r×c) + b (r×1)` with `b` broadcast over columns.
    pub fn add_column(&mut self, x: Var, b: Var) -> Result<Var> {
        let (xv, bv) = (self.value(x), self.value(b));
        if bv.cols() != 1 || bv.rows() != xv.rows() {
            return Err(Error::dim("add_column", xv.shape_str(), bv.shape_str()));
        }
        let mut value = xv.clone();
        let cols = value.cols();
        for (i, v) in value.data_mut().iter_mut().enumerate() {
            *v += bv.data()[i / cols];
        }
        self.push(value, Op::AddColumn(x, b), &[x, b])
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let (av, bv) = (self.value(a), self.value(b));
        let data = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).collect();
        let value = Tensor2::new(av.rows(), av.cols(), data)?;
        self.push(value, Op::Mul(a, b), &[a, b])
    }

    /// `x (r×c) ⊙ s (1×c)`: scales column `j` of `x` by `s[j]`.
    pub fn mul_row(&mut self, x: Var, s: Var) -> Result<Var> {
        let (xv, sv) = (self.value(x), self.value(s));
        if sv.rows() != 1 || sv.cols() != xv.cols() {
            return Err(Error::dim("mul_row", xv.shape_str(), sv.shape_str()));
        }
        let mut value = xv.clone();
        let cols = value.cols();
        for (i, v) in value.data_mut().iter_mut().enumerate() {
            *v *= sv.data()[i % cols];
        }
        self.push(value, Op::MulRow(x, s), &[x, s])
    }

    /// `x (r×c) ⊙ s (r×1)`: scales row `i` of `x` by `s[i]`.
    pub fn mul_column(&mut self, x: Var, s: Var) -> Result<Var> {
        let (xv, sv) = (self.value(x), self.value(s));
        if sv.cols() != 1 || sv.rows() != xv.rows() {
            return Err(Error::dim("mul_column", xv.shape_str(), sv.shape_str()));
        }
        let mut value = xv.clone();
        let cols = value.cols();
        for (i, v) in value.data_mut().iter_mut().enumerate() {
            *v *= sv.data()[i / cols];
        }
        self.push(value, Op::MulColumn(x, s), &[x, s])
    }

    pub fn scale(&mut self, x: Var, k: f64) -> Result<Var> {
        let value = self.value(x).scaled(k);
        self.push(value, Op::Scale(x, k), &[x])
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(f64::tanh);
        self.push(value, Op::Tanh(x), &[x])
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(|v| v.max(0.0));
        self.push(value, Op::Relu(x), &[x])
    }

    pub fn softmax(&mut self, x: Var, axis: Axis) -> Result<Var> {
        let value = softmax(self.value(x), axis);
        self.push(value, Op::Softmax(x, axis), &[x])
    }

    pub fn concat(&mut self, parts: &[Var], axis: Axis) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Usage("concat of zero tensors".into()))?;
        let (r0, c0) = self.shape(*first);
        let value = match axis {
            Axis::Rows => {
                let mut data = Vec::new();
                let mut rows = 0;
                for p in parts {
                    let v = self.value(*p);
                    if v.cols() != c0 {
                        return Err(Error::dim("concat", format!("{r0}x{c0}"), v.shape_str()));
                    }
                    rows += v.rows();
                    data.extend_from_slice(v.data());
                }
                Tensor2::new(rows, c0, data)?
            }
            Axis::Cols => {
                let mut cols = 0;
                for p in parts {
                    let v = self.value(*p);
                    if v.rows() != r0 {
                        return Err(Error::dim("concat", format!("{r0}x{c0}"), v.shape_str()));
                    }
                    cols += v.cols();
                }
                let mut out = Tensor2::zeros(r0, cols);
                let mut off = 0;
                for p in parts {
                    let v = self.value(*p);
                    for r in 0..r0 {
                        for c in 0..v.cols() {
                            out.set(r, off + c, v.get(r, c));
                        }
                    }
                    off += v.cols();
                }
                out
            }
        };
        self.push(value, Op::Concat(parts.to_vec(), axis), parts)
    }

    /// Rows `start..start + len` of `x`.
    pub fn slice_rows(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let xv = self.value(x);
        if start + len > xv.rows() || len == 0 {
            return Err(Error::dim(
                "slice_rows",
                xv.shape_str(),
                format!("rows {start}..{}", start + len),
            ));
        }
        let cols = xv.cols();
        let data = xv.data()[start * cols..(start + len) * cols].to_vec();
        let value = Tensor2::new(len, cols, data)?;
        self.push(value, Op::SliceRows(x, start), &[x])
    }

    /// Elementwise sum of equally shaped tensors.
    pub fn sum(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::Usage("sum of zero tensors".into()))?;
        let mut value = self.value(first).clone();
        for p in &parts[1..] {
            self.same_shape("sum", first, *p)?;
            value.add_assign(self.value(*p));
        }
        self.push(value, Op::Sum(parts.to_vec()), parts)
    }

    /// Elementwise mean of equally shaped tensors.
    pub fn mean(&mut self, parts: &[Var]) -> Result<Var> {
        let s = self.sum(parts)?;
        self.scale(s, 1.0 / parts.len() as f64)
    }

    /// Sum of all entries as a `1 × 1` tensor.
    pub fn sum_reduce(&mut self, x: Var) -> Result<Var> {
        let value = Tensor2::filled(1, 1, self.value(x).sum());
        self.push(value, Op::SumAll(x), &[x])
    }

    /// `‖x‖²` as a `1 × 1` tensor.
    pub fn sum_squares(&mut self, x: Var) -> Result<Var> {
        let value = Tensor2::filled(1, 1, self.value(x).norm_sq());
        self.push(value, Op::SumSquares(x), &[x])
    }

    /// Output column `i` is the elementwise max over the columns of `x`
    /// listed in `pools[i]`; an empty pool yields a zero column.
    pub fn max_pool_columns(&mut self, x: Var, pools: &[Vec<usize>]) -> Result<Var> {
        let xv = self.value(x);
        let rows = xv.rows();
        let mut value = Tensor2::zeros(rows, pools.len());
        let mut argmax = vec![usize::MAX; rows * pools.len()];
        for (i, pool) in pools.iter().enumerate() {
            if let Some(&bad) = pool.iter().find(|&&j| j >= xv.cols()) {
                return Err(Error::dim("max_pool_columns", xv.shape_str(), format!("column {bad}")));
            }
            for r in 0..rows {
                let mut best: Option<(usize, f64)> = None;
                for &j in pool {
                    let v = xv.get(r, j);
                    if best.is_none_or(|(_, b)| v > b) {
                        best = Some((j, v));
                    }
                }
                if let Some((j, v)) = best {
                    value.set(r, i, v);
                    argmax[r * pools.len() + i] = j;
                }
            }
        }
        self.push(value, Op::MaxPoolColumns { x, argmax }, &[x])
    }

    /// Batch normalization in training mode. Features are rows, the batch
    /// runs along columns; `gamma` and `beta` are `rows × 1`.
    ///
    /// Returns the output and the per-feature batch mean and (biased) variance.
    pub fn batch_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        eps: f64,
    ) -> Result<(Var, Vec<f64>, Vec<f64>)> {
        let xv = self.value(x);
        let (rows, n) = xv.shape();
        for p in [gamma, beta] {
            if self.shape(p) != (rows, 1) {
                return Err(Error::dim("batch_norm", xv.shape_str(), self.value(p).shape_str()));
            }
        }
        if n < 2 {
            return Err(Error::Usage(format!(
                "batch norm needs at least 2 samples in training, got {n}"
            )));
        }
        let mut mean = vec![0.0; rows];
        let mut var = vec![0.0; rows];
        let mut inv_std = vec![0.0; rows];
        let mut xhat = Tensor2::zeros(rows, n);
        let mut out = Tensor2::zeros(rows, n);
        let (g, b) = (self.value(gamma), self.value(beta));
        for r in 0..rows {
            let row = xv.row_slice(r);
            let mu = row.iter().sum::<f64>() / n as f64;
            let v = row.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n as f64;
            let is = 1.0 / (v + eps).sqrt();
            for (c, x) in row.iter().enumerate() {
                let h = (x - mu) * is;
                xhat.set(r, c, h);
                out.set(r, c, g.get(r, 0) * h + b.get(r, 0));
            }
            mean[r] = mu;
            var[r] = v;
            inv_std[r] = is;
        }
        let op = Op::BatchNorm {
            x,
            gamma,
            beta,
            xhat,
            inv_std,
        };
        let y = self.push(out, op, &[x, gamma, beta])?;
        Ok((y, mean, var))
    }

    /// Mean softmax cross-entropy over the batch. `logits` is
    /// `classes × batch`, `labels[j]` is the gold class of column `j`.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let lv = self.value(logits);
        if lv.cols() != labels.len() {
            return Err(Error::dim(
                "softmax_cross_entropy",
                lv.shape_str(),
                format!("{} labels", labels.len()),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= lv.rows()) {
            return Err(Error::Usage(format!("label {bad} outside {} classes", lv.rows())));
        }
        let probs = softmax(lv, Axis::Rows);
        let mut loss = 0.0;
        for (j, &l) in labels.iter().enumerate() {
            // log-sum-exp form keeps saturated probabilities finite
            let col = lv.col(j);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + col.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            loss += lse - col[l];
        }
        loss /= labels.len().max(1) as f64;
        let op = Op::SoftmaxXent {
            logits,
            probs,
            labels: labels.to_vec(),
        };
        self.push(Tensor2::filled(1, 1, loss), op, &[logits])
    }

    /// Accumulates `d target / d node` for every node reachable from `target`,
    /// which must be `1 × 1`.
    pub fn backward(&mut self, target: Var) -> Result<()> {
        if self.shape(target) != (1, 1) {
            return Err(Error::dim("backward", self.value(target).shape_str(), "1x1"));
        }
        self.grads = vec![None; self.nodes.len()];
        self.grads[target.0] = Some(Tensor2::filled(1, 1, 1.0));
        for idx in (0..=target.0).rev() {
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let Some(g) = self.grads[idx].take() else {
                continue;
            };
            self.propagate(idx, &g);
            self.grads[idx] = Some(g);
        }
        Ok(())
    }

    fn slot(&mut self, v: Var) -> Option<&mut Tensor2> {
        if !self.nodes[v.0].requires_grad {
            return None;
        }
        let (r, c) = self.nodes[v.0].value.shape();
        Some(self.grads[v.0].get_or_insert_with(|| Tensor2::zeros(r, c)))
    }

    fn accumulate(&mut self, v: Var, delta: &Tensor2) {
        if let Some(slot) = self.slot(v) {
            slot.add_assign(delta);
        }
    }

    fn propagate(&mut self, idx: usize, g: &Tensor2) {
        let op = self.nodes[idx].op.clone();
        match op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.nodes[a.0].requires_grad {
                    let bv = self.nodes[b.0].value.clone();
                    let slot = self.slot(a).expect("requires grad");
                    gemm(1.0, g, false, &bv, true, 1.0, slot);
                }
                if self.nodes[b.0].requires_grad {
                    let av = self.nodes[a.0].value.clone();
                    let slot = self.slot(b).expect("requires grad");
                    gemm(1.0, &av, true, g, false, 1.0, slot);
                }
            }
            Op::Add(a, b) => {
                self.accumulate(a, g);
                self.accumulate(b, g);
            }
            Op::AddColumn(x, b) => {
                self.accumulate(x, g);
                let sums: Vec<f64> = (0..g.rows()).map(|r| g.row_slice(r).iter().sum()).collect();
                self.accumulate(b, &Tensor2::column(&sums));
            }
            Op::Mul(a, b) => {
                let da = hadamard(g, &self.nodes[b.0].value);
                let db = hadamard(g, &self.nodes[a.0].value);
                self.accumulate(a, &da);
                self.accumulate(b, &db);
            }
            Op::MulRow(x, s) => {
                let sv = self.nodes[s.0].value.clone();
                let xv = &self.nodes[x.0].value;
                let cols = g.cols();
                let mut dx = g.clone();
                let mut ds = Tensor2::zeros(1, cols);
                for (i, v) in dx.data_mut().iter_mut().enumerate() {
                    let c = i % cols;
                    ds.data_mut()[c] += *v * xv.data()[i];
                    *v *= sv.data()[c];
                }
                self.accumulate(x, &dx);
                self.accumulate(s, &ds);
            }
            Op::MulColumn(x, s) => {
                let sv = self.nodes[s.0].value.clone();
                let xv = &self.nodes[x.0].value;
                let cols = g.cols();
                let mut dx = g.clone();
                let mut ds = Tensor2::zeros(sv.rows(), 1);
                for (i, v) in dx.data_mut().iter_mut().enumerate() {
                    let r = i / cols;
                    ds.data_mut()[r] += *v * xv.data()[i];
                    *v *= sv.data()[r];
                }
                self.accumulate(x, &dx);
                self.accumulate(s, &ds);
            }
            Op::Scale(x, k) => self.accumulate(x, &g.scaled(k)),
            Op::Tanh(x) => {
                let y = &self.nodes[idx].value;
                let dx = zip_map(g, y, |g, y| g * (1.0 - y * y));
                self.accumulate(x, &dx);
            }
            Op::Relu(x) => {
                let y = &self.nodes[idx].value;
                let dx = zip_map(g, y, |g, y| if y > 0.0 { g } else { 0.0 });
                self.accumulate(x, &dx);
            }
            Op::Softmax(x, axis) => {
                let y = &self.nodes[idx].value;
                let (rows, cols) = y.shape();
                let mut dx = Tensor2::zeros(rows, cols);
                match axis {
                    Axis::Rows => {
                        for c in 0..cols {
                            let dot: f64 = (0..rows).map(|r| g.get(r, c) * y.get(r, c)).sum();
                            for r in 0..rows {
                                dx.set(r, c, y.get(r, c) * (g.get(r, c) - dot));
                            }
                        }
                    }
                    Axis::Cols => {
                        for r in 0..rows {
                            let dot: f64 = (0..cols).map(|c| g.get(r, c) * y.get(r, c)).sum();
                            for c in 0..cols {
                                dx.set(r, c, y.get(r, c) * (g.get(r, c) - dot));
                            }
                        }
                    }
                }
                self.accumulate(x, &dx);
            }
            Op::Concat(parts, axis) => {
                let mut off = 0;
                for p in parts {
                    let (pr, pc) = self.shape(p);
                    let piece = match axis {
                        Axis::Rows => {
                            let cols = g.cols();
                            let data = g.data()[off * cols..(off + pr) * cols].to_vec();
                            off += pr;
                            Tensor2::new(pr, pc, data).expect("concat shapes")
                        }
                        Axis::Cols => {
                            let mut t = Tensor2::zeros(pr, pc);
                            for r in 0..pr {
                                for c in 0..pc {
                                    t.set(r, c, g.get(r, off + c));
                                }
                            }
                            off += pc;
                            t
                        }
                    };
                    self.accumulate(p, &piece);
                }
            }
            Op::SliceRows(x, start) => {
                if let Some(slot) = self.slot(x) {
                    let cols = g.cols();
                    let dst = &mut slot.data_mut()[start * cols..start * cols + g.len()];
                    for (d, s) in dst.iter_mut().zip(g.data()) {
                        *d += s;
                    }
                }
            }
            Op::Sum(parts) => {
                for p in parts {
                    self.accumulate(p, g);
                }
            }
            Op::SumAll(x) => {
                let (r, c) = self.shape(x);
                self.accumulate(x, &Tensor2::filled(r, c, g.get(0, 0)));
            }
            Op::SumSquares(x) => {
                let dx = self.nodes[x.0].value.scaled(2.0 * g.get(0, 0));
                self.accumulate(x, &dx);
            }
            Op::MaxPoolColumns { x, argmax } => {
                if let Some(slot) = self.slot(x) {
                    let out_cols = g.cols();
                    for (k, &src) in argmax.iter().enumerate() {
                        if src != usize::MAX {
                            let r = k / out_cols;
                            let v = slot.get(r, src) + g.data()[k];
                            slot.set(r, src, v);
                        }
                    }
                }
            }
            Op::BatchNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            } => {
                let (rows, n) = xhat.shape();
                let gv = self.nodes[gamma.0].value.clone();
                let mut dx = Tensor2::zeros(rows, n);
                let mut dgamma = Tensor2::zeros(rows, 1);
                let mut dbeta = Tensor2::zeros(rows, 1);
                let nf = n as f64;
                for r in 0..rows {
                    let mut sum_dy = 0.0;
                    let mut sum_dy_xhat = 0.0;
                    for c in 0..n {
                        sum_dy += g.get(r, c);
                        sum_dy_xhat += g.get(r, c) * xhat.get(r, c);
                    }
                    dgamma.set(r, 0, sum_dy_xhat);
                    dbeta.set(r, 0, sum_dy);
                    let k = gv.get(r, 0) * inv_std[r] / nf;
                    for c in 0..n {
                        let v = k * (nf * g.get(r, c) - sum_dy - xhat.get(r, c) * sum_dy_xhat);
                        dx.set(r, c, v);
                    }
                }
                self.accumulate(x, &dx);
                self.accumulate(gamma, &dgamma);
                self.accumulate(beta, &dbeta);
            }
            Op::SoftmaxXent {
                logits,
                probs,
                labels,
            } => {
                let scale = g.get(0, 0) / labels.len().max(1) as f64;
                let mut d = probs.scaled(scale);
                for (j, &l) in labels.iter().enumerate() {
                    let v = d.get(l, j) - scale;
                    d.set(l, j, v);
                }
                self.accumulate(logits, &d);
            }
        }
    }
}

fn hadamard(a: &Tensor2, b: &Tensor2) -> Tensor2 {
    zip_map(a, b, |x, y| x * y)
}

fn zip_map(a: &Tensor2, b: &Tensor2, f: impl Fn(f64, f64) -> f64) -> Tensor2 {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor2::new(a.rows(), a.cols(), data).expect("same shape")
}

/// Numerically stable softmax (max subtracted before exponentiation).
pub fn softmax(x: &Tensor2, axis: Axis) -> Tensor2 {
    let (rows, cols) = x.shape();
    let mut out = x.clone();
    let lanes: Vec<Vec<usize>> = match axis {
        Axis::Rows => (0..cols).map(|c| (0..rows).map(|r| r * cols + c).collect()).collect(),
        Axis::Cols => (0..rows).map(|r| (0..cols).map(|c| r * cols + c).collect()).collect(),
    };
    let data = out.data_mut();
    for lane in lanes {
        let max = lane.iter().map(|&i| data[i]).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for &i in &lane {
            data[i] = (data[i] - max).exp();
            total += data[i];
        }
        for &i in &lane {
            data[i] /= total;
        }
    }
    out
}
