//! Evaluation: micro-F1 for the three-way task and the MUC, B³ and CEAF-φ4
//! cluster metrics. A ratio with a zero denominator scores 0.

mod assignment;
mod classification;
mod clusters;
mod io;

use serde::Serialize;

pub use assignment::max_weight_assignment;
pub use classification::{micro_f1, ConfusionCounts};
pub use clusters::{
    avg_f1, b_cubed, b_cubed_counts, ceaf_alignment, ceaf_counts, ceaf_phi4, muc, muc_counts, Clustering,
    MetricMode, RatioCounts,
};
pub use io::{parse_cluster_file, score_documents, ClusterDoc, ClusterReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl Prf {
    pub fn from_ratios(p_num: f64, p_den: f64, r_num: f64, r_den: f64) -> Prf {
        Prf::new(ratio(p_num, p_den), ratio(r_num, r_den))
    }

    pub fn new(precision: f64, recall: f64) -> Prf {
        // the harmonic mean of equal values is that value; the general form
        // can land one ulp away
        let f1 = if precision == recall {
            precision
        } else {
            ratio(2.0 * precision * recall, precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}
