use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{Tape, Tensor2, Var};

/// Running statistics of a batch-norm layer. The learnable scale and shift
/// live with the other parameters; this holds only the non-trained buffers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchNormState {
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    pub eps: f64,
}

impl BatchNormState {
    pub fn new(features: usize, momentum: f64, eps: f64) -> Self {
        BatchNormState {
            running_mean: vec![0.0; features],
            running_var: vec![1.0; features],
            momentum,
            eps,
        }
    }

    pub fn features(&self) -> usize {
        self.running_mean.len()
    }

    /// Normalizes `x` (features × batch). In training mode the batch
    /// statistics are used and folded into the running averages as
    /// `running = momentum·running + (1 − momentum)·batch`.
    pub fn forward(
        &mut self,
        tape: &mut Tape,
        x: Var,
        gamma: Var,
        beta: Var,
        training: bool,
    ) -> Result<Var> {
        let (rows, n) = tape.shape(x);
        if rows != self.features() {
            return Err(Error::dim(
                "batch_norm",
                format!("{rows}x{n}"),
                format!("{} features", self.features()),
            ));
        }
        if training {
            if n < 2 {
                return Err(Error::Usage(format!(
                    "batch norm needs a batch of at least 2 in training, got {n}"
                )));
            }
            let (y, mean, var) = tape.batch_norm(x, gamma, beta, self.eps)?;
            let m = self.momentum;
            for i in 0..rows {
                self.running_mean[i] = m * self.running_mean[i] + (1.0 - m) * mean[i];
                self.running_var[i] = m * self.running_var[i] + (1.0 - m) * var[i];
            }
            return Ok(y);
        }
        let neg_mean: Vec<f64> = self.running_mean.iter().map(|v| -v).collect();
        let inv_std: Vec<f64> = self
            .running_var
            .iter()
            .map(|v| 1.0 / (v + self.eps).sqrt())
            .collect();
        let shift = tape.constant(Tensor2::column(&neg_mean));
        let scale = tape.constant(Tensor2::column(&inv_std));
        let centered = tape.add_column(x, shift)?;
        let normed = tape.mul_column(centered, scale)?;
        let scaled = tape.mul_column(normed, gamma)?;
        tape.add_column(scaled, beta)
    }
}

/// Plain-tensor batch normalization with unit scale and zero shift.
pub fn batch_norm(x: &Tensor2, state: &mut BatchNormState, training: bool) -> Result<Tensor2> {
    let mut tape = Tape::new();
    let xv = tape.constant(x.clone());
    let g = tape.constant(Tensor2::filled(x.rows(), 1, 1.0));
    let b = tape.constant(Tensor2::zeros(x.rows(), 1));
    let y = state.forward(&mut tape, xv, g, b, training)?;
    Ok(tape.value(y).clone())
}
