use serde::Serialize;

use super::Prf;
use crate::corefhead::Label;
use crate::error::{Error, Result};

/// Per-class true positives, false positives and false negatives.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: [u64; 3],
    pub fp: [u64; 3],
    pub fn_: [u64; 3],
}

impl ConfusionCounts {
    pub fn from_labels(gold: &[Label], pred: &[Label]) -> Result<Self> {
        if gold.len() != pred.len() {
            return Err(Error::Usage(format!(
                "{} gold labels but {} predictions",
                gold.len(),
                pred.len()
            )));
        }
        let mut c = ConfusionCounts::default();
        for (g, p) in gold.iter().zip(pred) {
            if g == p {
                c.tp[g.index()] += 1;
            } else {
                c.fp[p.index()] += 1;
                c.fn_[g.index()] += 1;
            }
        }
        Ok(c)
    }

    /// Pooled precision, recall and F1 over the three classes.
    pub fn micro(&self) -> Prf {
        let tp: u64 = self.tp.iter().sum();
        let fp: u64 = self.fp.iter().sum();
        let fn_: u64 = self.fn_.iter().sum();
        Prf::from_ratios(tp as f64, (tp + fp) as f64, tp as f64, (tp + fn_) as f64)
    }
}

pub fn micro_f1(gold: &[Label], pred: &[Label]) -> Result<Prf> {
    Ok(ConfusionCounts::from_labels(gold, pred)?.micro())
}
