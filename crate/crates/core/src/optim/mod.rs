//! Training machinery: Adam, the warmup schedule, L2 penalty, dropout and
//! batch normalization.

mod adam;
mod batchnorm;
mod dropout;
mod regularize;
mod schedule;

pub use adam::{AdamConfig, AdamState};
pub use batchnorm::{batch_norm, BatchNormState};
pub use dropout::{dropout, dropout_mask, dropout_on_tape};
pub use regularize::{ParamGroup, RegularizerSpec};
pub use schedule::WarmupSchedule;

use crate::error::Result;
use crate::numcore::Tensor2;

/// Free-function form of [`AdamState::step`].
pub fn adam_step(
    params: &mut [(String, &mut Tensor2)],
    grads: &[Tensor2],
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    state.step(params, grads, lr)
}

/// Free-function form of [`WarmupSchedule::lr_at`].
pub fn lr_at(step: u64, schedule: &WarmupSchedule) -> Result<f64> {
    schedule.lr_at(step)
}
