use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::assignment::max_weight_assignment;
use super::Prf;
use crate::error::{Error, Result};

/// Which reading of the B³ precision and CEAF normalizers to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricMode {
    /// B³ precision averages over response clusters; CEAF divides by
    /// cluster counts.
    #[default]
    Standard,
    /// B³ precision reuses the recall numerator over the response size;
    /// CEAF divides by mention counts.
    #[serde(rename = "paper")]
    PaperLiteral,
}

/// Disjoint, non-empty mention clusters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering<M> {
    clusters: Vec<BTreeSet<M>>,
}

impl<M: Ord + Clone + std::fmt::Debug> Clustering<M> {
    pub fn new(clusters: Vec<Vec<M>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(clusters.len());
        for (k, c) in clusters.into_iter().enumerate() {
            if c.is_empty() {
                return Err(Error::Consistency(format!("cluster {k} is empty")));
            }
            let mut set = BTreeSet::new();
            for m in c {
                if !seen.insert(m.clone()) || !set.insert(m.clone()) {
                    return Err(Error::Consistency(format!("mention {m:?} appears in more than one cluster")));
                }
            }
            out.push(set);
        }
        Ok(Clustering { clusters: out })
    }

    pub fn empty() -> Self {
        Clustering { clusters: Vec::new() }
    }

    pub fn clusters(&self) -> &[BTreeSet<M>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn mentions(&self) -> usize {
        self.clusters.iter().map(BTreeSet::len).sum()
    }

    fn owner(&self) -> BTreeMap<&M, usize> {
        let mut map = BTreeMap::new();
        for (k, c) in self.clusters.iter().enumerate() {
            for m in c {
                map.insert(m, k);
            }
        }
        map
    }
}

/// Numerators and denominators of a P/R pair; summing these across
/// documents and dividing once gives the corpus-level score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RatioCounts {
    pub p_num: f64,
    pub p_den: f64,
    pub r_num: f64,
    pub r_den: f64,
}

impl RatioCounts {
    pub fn prf(&self) -> Prf {
        Prf::from_ratios(self.p_num, self.p_den, self.r_num, self.r_den)
    }

    pub fn add(&mut self, o: &RatioCounts) {
        self.p_num += o.p_num;
        self.p_den += o.p_den;
        self.r_num += o.r_num;
        self.r_den += o.r_den;
    }
}

/// `Σ (|K| − |p(K)|)` and `Σ (|K| − 1)` over `key`, partitioning by `other`.
fn muc_side<M: Ord + Clone + std::fmt::Debug>(key: &Clustering<M>, other: &Clustering<M>) -> (f64, f64) {
    let owner = other.owner();
    let mut num = 0usize;
    let mut den = 0usize;
    for k in key.clusters() {
        let mut parts = BTreeSet::new();
        let mut loose = 0usize;
        for m in k {
            match owner.get(m) {
                Some(&c) => {
                    parts.insert(c);
                }
                None => loose += 1,
            }
        }
        num += k.len() - (parts.len() + loose);
        den += k.len() - 1;
    }
    (num as f64, den as f64)
}

pub fn muc_counts<M: Ord + Clone + std::fmt::Debug>(key: &Clustering<M>, response: &Clustering<M>) -> RatioCounts {
    let (r_num, r_den) = muc_side(key, response);
    let (p_num, p_den) = muc_side(response, key);
    RatioCounts { p_num, p_den, r_num, r_den }
}

pub fn muc<M: Ord + Clone + std::fmt::Debug>(key: &Clustering<M>, response: &Clustering<M>) -> Prf {
    muc_counts(key, response).prf()
}

fn overlaps<M: Ord + Clone + std::fmt::Debug>(key: &Clustering<M>, response: &Clustering<M>) -> Vec<Vec<usize>> {
    let owner = response.owner();
    key.clusters()
        .iter()
        .map(|k| {
            let mut row = vec![0usize; response.len()];
            for m in k {
                if let Some(&c) = owner.get(m) {
                    row[c] += 1;
                }
            }
            row
        })
        .collect()
}

pub fn b_cubed_counts<M: Ord + Clone + std::fmt::Debug>(
    key: &Clustering<M>,
    response: &Clustering<M>,
    mode: MetricMode,
) -> RatioCounts {
    let ov = overlaps(key, response);
    let mut r_num = 0.0;
    let mut p_num = 0.0;
    for (i, k) in key.clusters().iter().enumerate() {
        for (j, r) in response.clusters().iter().enumerate() {
            let n = ov[i][j] as f64;
            if n == 0.0 {
                continue;
            }
            r_num += n * n / k.len() as f64;
            p_num += n * n / r.len() as f64;
        }
    }
    if mode == MetricMode::PaperLiteral {
        p_num = r_num;
    }
    RatioCounts {
        p_num,
        p_den: response.mentions() as f64,
        r_num,
        r_den: key.mentions() as f64,
    }
}

pub fn b_cubed<M: Ord + Clone + std::fmt::Debug>(key: &Clustering<M>, response: &Clustering<M>, mode: MetricMode) -> Prf {
    b_cubed_counts(key, response, mode).prf()
}

/// Optimal one-to-one alignment of key to response clusters under φ4,
/// returned as `(key index, response index, φ4)` triples.
pub fn ceaf_alignment<M: Ord + Clone + std::fmt::Debug>(
    key: &Clustering<M>,
    response: &Clustering<M>,
) -> Vec<(usize, usize, f64)> {
    let ov = overlaps(key, response);
    let phi: Vec<Vec<f64>> = key
        .clusters()
        .iter()
        .enumerate()
        .map(|(i, k)| {
            response
                .clusters()
                .iter()
                .enumerate()
                .map(|(j, r)| 2.0 * ov[i][j] as f64 / (k.len() + r.len()) as f64)
                .collect()
        })
        .collect();
    max_weight_assignment(&phi)
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j, phi[i][j])))
        .collect()
}

pub fn ceaf_counts<M: Ord + Clone + std::fmt::Debug>(
    key: &Clustering<M>,
    response: &Clustering<M>,
    mode: MetricMode,
) -> RatioCounts {
    let total: f64 = ceaf_alignment(key, response).iter().map(|t| t.2).sum();
    let (p_den, r_den) = match mode {
        MetricMode::Standard => (response.len() as f64, key.len() as f64),
        MetricMode::PaperLiteral => (response.mentions() as f64, key.mentions() as f64),
    };
    RatioCounts {
        p_num: total,
        p_den,
        r_num: total,
        r_den,
    }
}

pub fn ceaf_phi4<M: Ord + Clone + std::fmt::Debug>(key: &Clustering<M>, response: &Clustering<M>, mode: MetricMode) -> Prf {
    ceaf_counts(key, response, mode).prf()
}

pub fn avg_f1(muc_f1: f64, b3_f1: f64, ceaf_f1: f64) -> f64 {
    (muc_f1 + b3_f1 + ceaf_f1) / 3.0
}
