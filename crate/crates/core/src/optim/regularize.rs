use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{Tape, Tensor2, Var};

/// Which part of the model a parameter tensor belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamGroup {
    Rgat,
    Head,
}

/// L2 penalty `λ·Σ‖W‖²` over the tensors whose group is listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub lambda: f64,
    pub groups: Vec<ParamGroup>,
}

impl RegularizerSpec {
    pub fn rgat_only(lambda: f64) -> Self {
        RegularizerSpec {
            lambda,
            groups: vec![ParamGroup::Rgat],
        }
    }

    pub fn none() -> Self {
        RegularizerSpec {
            lambda: 0.0,
            groups: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn applies_to(&self, group: ParamGroup) -> bool {
        self.lambda > 0.0 && self.groups.contains(&group)
    }

    /// Penalty node on the tape, or `None` when nothing is penalized.
    pub fn penalty(&self, tape: &mut Tape, params: &[(ParamGroup, Var)]) -> Result<Option<Var>> {
        let mut terms = Vec::new();
        for &(group, v) in params {
            if self.applies_to(group) {
                terms.push(tape.sum_squares(v)?);
            }
        }
        if terms.is_empty() {
            return Ok(None);
        }
        let total = tape.sum(&terms)?;
        Ok(Some(tape.scale(total, self.lambda)?))
    }

    pub fn penalty_value<'a>(&self, params: impl IntoIterator<Item = (ParamGroup, &'a Tensor2)>) -> f64 {
        params
            .into_iter()
            .filter(|(g, _)| self.applies_to(*g))
            .map(|(_, t)| self.lambda * t.norm_sq())
            .sum()
    }
}
