//! Central finite-difference verification of tape gradients.

use serde::Serialize;

use super::tape::{Tape, Var};
use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// Denominator floor so that entries whose true gradient is ~0 are judged
/// on absolute error instead of blowing up the ratio.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct TensorCheck {
    pub name: String,
    pub entries: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradCheckReport {
    pub step: f64,
    pub tolerance: f64,
    pub tensors: Vec<TensorCheck>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.tensors.iter().all(|t| t.passed)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.tensors.iter().map(|t| t.max_rel_error).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TensorCheck> {
        self.tensors.iter().filter(|t| !t.passed)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Checks the tape gradient of a scalar function against central differences.
///
/// `f` receives the parameters bound as trainable leaves in the order given
/// and must return a `1 × 1` node.
pub fn grad_check<F>(
    params: &[(String, Tensor2)],
    f: F,
    h: f64,
    tol: f64,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|(_, t)| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    tape.backward(out)?;
    let analytic: Vec<Tensor2> = vars.iter().map(|v| tape.grad(*v)).collect();

    let value = |values: &[Tensor2]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|t| tape.param(t.clone())).collect();
        let out = f(&mut tape, &vars)?;
        Ok(tape.value(out).get(0, 0))
    };
    compare_gradients(params, &analytic, value, h, tol)
}

/// Compares supplied analytic gradients against central differences of `value`.
pub fn compare_gradients<F>(
    params: &[(String, Tensor2)],
    analytic: &[Tensor2],
    value: F,
    h: f64,
    tol: f64,
) -> Result<GradCheckReport>
where
    F: Fn(&[Tensor2]) -> Result<f64>,
{
    if analytic.len() != params.len() {
        return Err(Error::dim(
            "compare_gradients",
            format!("{} params", params.len()),
            format!("{} gradients", analytic.len()),
        ));
    }
    let mut values: Vec<Tensor2> = params.iter().map(|(_, t)| t.clone()).collect();
    let mut tensors = Vec::with_capacity(params.len());
    for (k, (name, _)) in params.iter().enumerate() {
        if analytic[k].shape() != values[k].shape() {
            return Err(Error::dim(
                "compare_gradients",
                values[k].shape_str(),
                analytic[k].shape_str(),
            ));
        }
        let mut max_rel: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for i in 0..values[k].len() {
            let orig = values[k].data()[i];
            values[k].data_mut()[i] = orig + h;
            let plus = finite(value(&values)?, name)?;
            values[k].data_mut()[i] = orig - h;
            let minus = finite(value(&values)?, name)?;
            values[k].data_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[k].data()[i];
            max_rel = max_rel.max(relative_error(a, numeric));
            max_abs = max_abs.max((a - numeric).abs());
        }
        tensors.push(TensorCheck {
            name: name.clone(),
            entries: values[k].len(),
            max_rel_error: max_rel,
            max_abs_error: max_abs,
            passed: max_rel < tol,
        });
    }
    Ok(GradCheckReport {
        step: h,
        tolerance: tol,
        tensors,
    })
}

fn finite(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("objective while perturbing {name}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(name: &str, t: Tensor2) -> (String, Tensor2) {
        (name.to_string(), t)
    }

    #[test]
    fn square_passes() {
        let params = vec![named("x", Tensor2::filled(1, 1, 3.0))];
        let report = grad_check(&params, |t, v| t.sum_squares(v[0]), 1e-5, 1e-4).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn doubled_gradient_fails_on_that_tensor() {
        let params = vec![
            named("ok", Tensor2::filled(1, 1, 3.0)),
            named("bad", Tensor2::filled(1, 1, -2.0)),
        ];
        let analytic = vec![Tensor2::filled(1, 1, 6.0), Tensor2::filled(1, 1, -8.0)];
        let value = |v: &[Tensor2]| Ok(v[0].norm_sq() + v[1].norm_sq());
        let report = compare_gradients(&params, &analytic, value, 1e-5, 1e-4).unwrap();
        assert!(!report.passed());
        let failed: Vec<_> = report.failures().map(|t| t.name.as_str()).collect();
        assert_eq!(failed, ["bad"]);
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let params = vec![named("x", Tensor2::filled(1, 1, 1.0))];
        let analytic = vec![Tensor2::filled(1, 1, 0.0)];
        let r = compare_gradients(&params, &analytic, |_| Ok(f64::NAN), 1e-5, 1e-4);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
