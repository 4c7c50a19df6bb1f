use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::gap::read_gap_tsv;
use crate::corefhead::{locate_mentions, GapInstance, Label, MentionTokens};
use crate::depgraph::{parse_conllu, DependencyGraph, Token};
use crate::embedstore::{load_table, TokenEmbeddingTable};
use crate::error::{Error, Result};

/// Instances with their graphs and embeddings, cross-checked: every
/// instance has a graph anchored to its text, mentions resolve to tokens,
/// and every token of a used graph has an embedding.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub instances: Vec<GapInstance>,
    pub graphs: BTreeMap<String, DependencyGraph>,
    pub embeddings: TokenEmbeddingTable,
    mentions: Vec<MentionTokens>,
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    doc_id: String,
    text: String,
    tokens: Vec<Token>,
}

fn listing(ids: &[String]) -> String {
    const SHOW: usize = 10;
    let mut s = ids.iter().take(SHOW).cloned().collect::<Vec<_>>().join(", ");
    if ids.len() > SHOW {
        s.push_str(&format!(" and {} more", ids.len() - SHOW));
    }
    s
}

impl Dataset {
    pub fn assemble(
        instances: Vec<GapInstance>,
        graphs: Vec<DependencyGraph>,
        embeddings: TokenEmbeddingTable,
    ) -> Result<Self> {
        let mut pool: BTreeMap<String, DependencyGraph> = BTreeMap::new();
        for g in graphs {
            if pool.contains_key(&g.doc_id) {
                return Err(Error::Duplicate(format!("two graphs for doc {}", g.doc_id)));
            }
            pool.insert(g.doc_id.clone(), g);
        }
        let missing: Vec<String> = instances
            .iter()
            .filter(|i| !pool.contains_key(&i.doc_id))
            .map(|i| i.doc_id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Coverage(format!("no dependency graph for {}", listing(&missing))));
        }

        let mut graphs = BTreeMap::new();
        for inst in &instances {
            inst.validate()?;
            if let Some(g) = graphs.get(&inst.doc_id) {
                let g: &DependencyGraph = g;
                if g.text != inst.text {
                    return Err(Error::Consistency(format!("rows for doc {} disagree on text", inst.doc_id)));
                }
                continue;
            }
            let mut g = pool.remove(&inst.doc_id).expect("checked above");
            g.anchor_to(&inst.text)?;
            graphs.insert(inst.doc_id.clone(), g);
        }

        let mut uncovered = Vec::new();
        for g in graphs.values() {
            if let Some(t) = (0..g.len()).find(|&t| !embeddings.contains(&g.doc_id, t)) {
                uncovered.push(format!("{} (token {t})", g.doc_id));
            }
        }
        if !uncovered.is_empty() {
            return Err(Error::Coverage(format!("missing embeddings for {}", listing(&uncovered))));
        }

        let mentions = instances
            .iter()
            .map(|i| locate_mentions(i, &graphs[&i.doc_id]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            instances,
            graphs,
            embeddings,
            mentions,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn graph(&self, i: usize) -> &DependencyGraph {
        &self.graphs[&self.instances[i].doc_id]
    }

    pub fn mentions(&self, i: usize) -> &MentionTokens {
        &self.mentions[i]
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn d_bert(&self) -> usize {
        self.embeddings.dim()
    }

    /// Writes `instances.json`, `graphs.json` and `embeddings.rgeb` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("instances.json"))?);
        serde_json::to_writer_pretty(&mut w, &self.instances)?;
        w.flush()?;
        let records: Vec<GraphRecord> = self
            .graphs
            .values()
            .map(|g| GraphRecord {
                doc_id: g.doc_id.clone(),
                text: g.text.clone(),
                tokens: g.tokens().to_vec(),
            })
            .collect();
        let mut w = BufWriter::new(File::create(dir.join("graphs.json"))?);
        serde_json::to_writer(&mut w, &records)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("embeddings.rgeb"))?);
        self.embeddings.write_rgeb(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let open = |name: &str| -> Result<BufReader<File>> {
            let p = dir.join(name);
            File::open(&p)
                .map(BufReader::new)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))
        };
        let instances: Vec<GapInstance> = serde_json::from_reader(open("instances.json")?)?;
        let records: Vec<GraphRecord> = serde_json::from_reader(open("graphs.json")?)?;
        let graphs = records
            .into_iter()
            .map(|r| DependencyGraph::new(r.doc_id, r.text, r.tokens))
            .collect::<Result<Vec<_>>>()?;
        let embeddings = TokenEmbeddingTable::read_rgeb(open("embeddings.rgeb")?)?;
        Dataset::assemble(instances, graphs, embeddings)
    }
}

/// Reads a GAP TSV, its CoNLL-U parses and token embeddings into a dataset.
pub fn ingest_gap(tsv: &Path, conllu: &Path, embeddings: &Path) -> Result<Dataset> {
    let instances = read_gap_tsv(BufReader::new(File::open(tsv)?))?;
    let graphs = parse_conllu(&fs::read_to_string(conllu)?)?;
    let table = load_table(embeddings)?;
    Dataset::assemble(instances, graphs, table)
}
