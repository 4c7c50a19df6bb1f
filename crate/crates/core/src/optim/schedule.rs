use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear warmup from 0 to `peak_lr`, then linear decay to 0 at `total_steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarmupSchedule {
    pub peak_lr: f64,
    pub warmup_steps: u64,
    pub total_steps: u64,
}

impl WarmupSchedule {
    pub fn new(peak_lr: f64, warmup_steps: u64, total_steps: u64) -> Result<Self> {
        if !(peak_lr > 0.0 && peak_lr.is_finite()) {
            return Err(Error::Config(format!("peak learning rate must be > 0, got {peak_lr}")));
        }
        if total_steps == 0 {
            return Err(Error::Config("schedule needs at least one step".into()));
        }
        if warmup_steps == 0 || warmup_steps > total_steps {
            return Err(Error::Config(format!(
                "warmup steps must be in 1..={total_steps}, got {warmup_steps}"
            )));
        }
        Ok(WarmupSchedule {
            peak_lr,
            warmup_steps,
            total_steps,
        })
    }

    /// Warmup length as a fraction of the run, rounded and clamped to `1..=total`.
    pub fn with_fraction(peak_lr: f64, fraction: f64, total_steps: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Config(format!("warmup fraction must be in [0, 1], got {fraction}")));
        }
        let warmup = ((fraction * total_steps as f64).round() as u64).clamp(1, total_steps.max(1));
        WarmupSchedule::new(peak_lr, warmup, total_steps)
    }

    /// Learning rate for the 1-based `step`.
    pub fn lr_at(&self, step: u64) -> Result<f64> {
        if step == 0 || step > self.total_steps {
            return Err(Error::Range(format!(
                "step {step} (valid 1..={})",
                self.total_steps
            )));
        }
        if step <= self.warmup_steps {
            return Ok(self.peak_lr * step as f64 / self.warmup_steps as f64);
        }
        let remaining = (self.total_steps - step) as f64;
        let span = (self.total_steps - self.warmup_steps) as f64;
        Ok(self.peak_lr * remaining / span)
    }
}
