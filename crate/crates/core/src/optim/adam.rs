use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Tensor2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam moments for an ordered list of parameter tensors.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<Tensor2>,
    v: Vec<Tensor2>,
    t: u64,
}

impl AdamState {
    pub fn new(shapes: &[(usize, usize)], config: AdamConfig) -> Self {
        AdamState {
            config,
            m: shapes.iter().map(|&(r, c)| Tensor2::zeros(r, c)).collect(),
            v: shapes.iter().map(|&(r, c)| Tensor2::zeros(r, c)).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update at learning rate `lr`.
    ///
    /// Parameters are left untouched if any gradient is non-finite; the error
    /// names the first offending tensor.
    pub fn step(
        &mut self,
        params: &mut [(String, &mut Tensor2)],
        grads: &[Tensor2],
        lr: f64,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::dim(
                "adam_step",
                format!("{} moment tensors", self.m.len()),
                format!("{} params / {} grads", params.len(), grads.len()),
            ));
        }
        // the schedule ends at exactly 0, which is a valid no-op update
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be >= 0, got {lr}")));
        }
        for ((name, p), g) in params.iter().zip(grads) {
            if p.shape() != g.shape() {
                return Err(Error::dim("adam_step", p.shape_str(), g.shape_str()));
            }
            if let Some(i) = g.data().iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "gradient of {name} at entry {i} is {}",
                    g.data()[i]
                )));
            }
        }

        self.t += 1;
        let AdamConfig { beta1, beta2, eps } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for (k, ((name, p), g)) in params.iter_mut().zip(grads).enumerate() {
            let m = self.m[k].data_mut();
            let v = self.v[k].data_mut();
            for (i, w) in p.data_mut().iter_mut().enumerate() {
                let gi = g.data()[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            }
            if !p.is_finite() {
                return Err(Error::NonFinite(format!("parameter {name} after update")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_once(p: &mut Tensor2, g: &Tensor2, state: &mut AdamState, lr: f64) -> Result<()> {
        state.step(&mut [("p".to_string(), p)], std::slice::from_ref(g), lr)
    }

    #[test]
    fn zero_gradient_is_identity() {
        let mut p = Tensor2::from_rows(&[[1.5, -2.0], [0.0, 3.0]]);
        let orig = p.clone();
        let mut st = AdamState::new(&[(2, 2)], AdamConfig::default());
        for _ in 0..50 {
            step_once(&mut p, &Tensor2::zeros(2, 2), &mut st, 0.1).unwrap();
        }
        assert_eq!(p, orig);
        assert_eq!(st.step_count(), 50);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m_hat = 1, v_hat = 1 after bias correction, so the update is lr / (1 + eps).
        let mut p = Tensor2::filled(1, 1, 1.0);
        let mut st = AdamState::new(&[(1, 1)], AdamConfig::default());
        step_once(&mut p, &Tensor2::filled(1, 1, 1.0), &mut st, 0.1).unwrap();
        assert!((p.get(0, 0) - 0.9).abs() < 1e-8);
    }

    #[test]
    fn identical_params_stay_identical() {
        let mut p = Tensor2::filled(1, 2, 0.3);
        let mut st = AdamState::new(&[(1, 2)], AdamConfig::default());
        for k in 0..20 {
            let g = Tensor2::filled(1, 2, (k as f64).sin());
            step_once(&mut p, &g, &mut st, 0.01).unwrap();
            assert_eq!(p.get(0, 0), p.get(0, 1));
        }
    }

    #[test]
    fn nan_gradient_names_tensor() {
        let mut a = Tensor2::zeros(1, 1);
        let mut b = Tensor2::zeros(1, 2);
        let mut st = AdamState::new(&[(1, 1), (1, 2)], AdamConfig::default());
        let grads = [Tensor2::zeros(1, 1), Tensor2::row(&[0.0, f64::NAN])];
        let err = st
            .step(
                &mut [("alpha".into(), &mut a), ("beta".into(), &mut b)],
                &grads,
                0.1,
            )
            .unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        assert_eq!(st.step_count(), 0);
    }

    #[test]
    fn lr_must_be_finite_and_non_negative() {
        let mut p = Tensor2::filled(1, 1, 2.0);
        let mut st = AdamState::new(&[(1, 1)], AdamConfig::default());
        let g = Tensor2::filled(1, 1, 1.0);
        assert!(step_once(&mut p, &g, &mut st, -1e-3).is_err());
        assert!(step_once(&mut p, &g, &mut st, f64::NAN).is_err());
        assert_eq!(st.step_count(), 0);
        step_once(&mut p, &g, &mut st, 0.0).unwrap();
        assert_eq!(p.get(0, 0), 2.0);
        assert_eq!(st.step_count(), 1);
    }
}
