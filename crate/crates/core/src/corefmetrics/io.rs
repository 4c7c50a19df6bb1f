//! Cluster files and the scorer report.
//!
//! A file holds one `{"doc": ..., "clusters": [[m, ...], ...]}` object, a
//! JSON array of them, or one object per line. Mention ids may be strings
//! or integers; both are compared as strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use super::clusters::{b_cubed_counts, ceaf_counts, muc_counts, Clustering, MetricMode, RatioCounts};
use super::{avg_f1, Prf};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterDoc {
    pub doc: String,
    pub clusters: Clustering<String>,
}

fn mention_id(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Format(format!("mention id must be a string or number, got {other}"))),
    }
}

fn parse_doc(v: &Value) -> Result<ClusterDoc> {
    let obj = v.as_object().ok_or_else(|| Error::Format("cluster record is not an object".into()))?;
    let doc = match obj.get("doc") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => return Err(Error::Format("cluster record lacks a \"doc\" id".into())),
    };
    let clusters = obj
        .get("clusters")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format(format!("doc {doc}: \"clusters\" must be an array")))?;
    let clusters = clusters
        .iter()
        .map(|c| {
            c.as_array()
                .ok_or_else(|| Error::Format(format!("doc {doc}: cluster is not an array")))?
                .iter()
                .map(mention_id)
                .collect::<Result<Vec<String>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let clusters =
        Clustering::new(clusters).map_err(|e| Error::Consistency(format!("doc {doc}: {e}")))?;
    Ok(ClusterDoc { doc, clusters })
}

pub fn parse_cluster_file(text: &str) -> Result<Vec<ClusterDoc>> {
    let docs = match serde_json::from_str::<Value>(text) {
        Ok(Value::Array(items)) => items.iter().map(parse_doc).collect::<Result<Vec<_>>>()?,
        Ok(v) => vec![parse_doc(&v)?],
        Err(_) => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(k, l)| {
                let v: Value = serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: k + 1,
                    msg: e.to_string(),
                })?;
                parse_doc(&v)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let mut seen = std::collections::BTreeSet::new();
    for d in &docs {
        if !seen.insert(d.doc.clone()) {
            return Err(Error::Duplicate(format!("doc {} appears twice", d.doc)));
        }
    }
    Ok(docs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub mode: MetricMode,
    pub muc: Prf,
    pub b_cubed: Prf,
    pub ceaf_phi4: Prf,
    pub avg_f1: f64,
}

impl ClusterReport {
    /// Fixed-width table of P/R/F1 (percent) per metric plus the average.
    pub fn table(&self) -> String {
        let mut s = format!("{:<10} {:>8} {:>8} {:>8}\n", "Metric", "P", "R", "F1");
        for (name, p) in [("MUC", &self.muc), ("B3", &self.b_cubed), ("CEAF-phi4", &self.ceaf_phi4)] {
            let _ = writeln!(
                s,
                "{name:<10} {:>8.2} {:>8.2} {:>8.2}",
                100.0 * p.precision,
                100.0 * p.recall,
                100.0 * p.f1
            );
        }
        let _ = writeln!(s, "{:<10} {:>8} {:>8} {:>8.2}", "Avg F1", "", "", 100.0 * self.avg_f1);
        s
    }
}

/// Scores response documents against key documents, pooling counts over
/// documents. A document missing on one side is scored against an empty
/// clustering.
pub fn score_documents(key: &[ClusterDoc], response: &[ClusterDoc], mode: MetricMode) -> ClusterReport {
    let empty = Clustering::empty();
    let mut by_doc: BTreeMap<&str, (&Clustering<String>, &Clustering<String>)> = BTreeMap::new();
    for k in key {
        by_doc.insert(&k.doc, (&k.clusters, &empty));
    }
    for r in response {
        by_doc.entry(&r.doc).or_insert((&empty, &empty)).1 = &r.clusters;
    }
    let (mut m, mut b, mut c) = (RatioCounts::default(), RatioCounts::default(), RatioCounts::default());
    for (k, r) in by_doc.values() {
        m.add(&muc_counts(k, r));
        b.add(&b_cubed_counts(k, r, mode));
        c.add(&ceaf_counts(k, r, mode));
    }
    let (muc, b_cubed, ceaf_phi4) = (m.prf(), b.prf(), c.prf());
    ClusterReport {
        mode,
        avg_f1: avg_f1(muc.f1, b_cubed.f1, ceaf_phi4.f1),
        muc,
        b_cubed,
        ceaf_phi4,
    }
}
