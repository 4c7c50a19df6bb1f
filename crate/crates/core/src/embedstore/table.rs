use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use indexmap::IndexMap;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RGEB";
const VERSION: u16 = 1;

/// Frozen per-token embeddings keyed by `(doc_id, token_index)`. Insertion
/// order is kept so a table writes back byte-for-byte as it was read.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenEmbeddingTable {
    dim: usize,
    entries: IndexMap<(String, u32), Vec<f32>>,
}

impl TokenEmbeddingTable {
    pub fn new(dim: usize) -> Self {
        TokenEmbeddingTable {
            dim,
            entries: IndexMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, doc_id: &str, token: u32, values: Vec<f32>) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::Consistency(format!(
                "record ({doc_id}, {token}) has dim {}, table dim is {}",
                values.len(),
                self.dim
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Consistency(format!(
                "record ({doc_id}, {token}) has non-finite value at {pos}"
            )));
        }
        match self.entries.entry((doc_id.to_string(), token)) {
            indexmap::map::Entry::Occupied(_) => Err(Error::Duplicate(format!(
                "embedding for ({doc_id}, {token}) appears twice"
            ))),
            indexmap::map::Entry::Vacant(v) => {
                v.insert(values);
                Ok(())
            }
        }
    }

    pub fn lookup(&self, doc_id: &str, token: usize) -> Result<&[f32]> {
        let miss = || Error::Lookup {
            doc_id: doc_id.to_string(),
            token: token as u32,
        };
        let key = (doc_id.to_string(), u32::try_from(token).map_err(|_| miss())?);
        self.entries.get(&key).map(Vec::as_slice).ok_or_else(miss)
    }

    pub fn contains(&self, doc_id: &str, token: usize) -> bool {
        self.lookup(doc_id, token).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32, &[f32])> {
        self.entries.iter().map(|((d, t), v)| (d.as_str(), *t, v.as_slice()))
    }

    pub fn write_rgeb<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        w.write_u64::<LittleEndian>(self.entries.len() as u64)?;
        for ((doc, tok), vals) in &self.entries {
            let id = doc.as_bytes();
            let len = u16::try_from(id.len())
                .map_err(|_| Error::Format(format!("doc id of {} bytes is too long", id.len())))?;
            w.write_u16::<LittleEndian>(len)?;
            w.write_all(id)?;
            w.write_u32::<LittleEndian>(*tok)?;
            for v in vals {
                w.write_f32::<LittleEndian>(*v)?;
            }
        }
        Ok(())
    }

    pub fn read_rgeb<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| Error::Format("file too short for RGEB header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}, expected RGEB")));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported RGEB version {version}")));
        }
        let dim = r.read_u32::<LittleEndian>()? as usize;
        let count = r.read_u64::<LittleEndian>()?;
        let mut table = TokenEmbeddingTable::new(dim);
        for k in 0..count {
            let truncated = |_| Error::Format(format!("record {k} truncated"));
            let len = r.read_u16::<LittleEndian>().map_err(truncated)? as usize;
            let mut id = vec![0u8; len];
            r.read_exact(&mut id).map_err(truncated)?;
            let id = String::from_utf8(id).map_err(|_| Error::Format(format!("record {k}: doc id is not UTF-8")))?;
            let tok = r.read_u32::<LittleEndian>().map_err(truncated)?;
            let mut vals = vec![0f32; dim];
            r.read_f32_into::<LittleEndian>(&mut vals).map_err(truncated)?;
            table.insert(&id, tok, vals)?;
        }
        Ok(table)
    }

    /// Text form: `doc_id<TAB>token_index<TAB>v1 v2 ...` per line. The
    /// width is taken from the first record.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut table: Option<TokenEmbeddingTable> = None;
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: k + 1, msg };
            let mut cols = line.split('\t');
            let (Some(doc), Some(tok), Some(vals), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(parse_err("expected doc_id, token_index and values separated by tabs".into()));
            };
            let tok: u32 = tok.trim().parse().map_err(|_| parse_err(format!("bad token index {tok:?}")))?;
            let vals = vals
                .split_whitespace()
                .map(|v| v.parse::<f32>().map_err(|_| parse_err(format!("bad value {v:?}"))))
                .collect::<Result<Vec<f32>>>()?;
            table
                .get_or_insert_with(|| TokenEmbeddingTable::new(vals.len()))
                .insert(doc, tok, vals)?;
        }
        Ok(table.unwrap_or_else(|| TokenEmbeddingTable::new(0)))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for (doc, tok, vals) in self.iter() {
            let vals: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{doc}\t{tok}\t{}", vals.join(" "))?;
        }
        Ok(())
    }
}

fn is_text_path(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("txt" | "tsv"))
}

/// Loads a table, reading `.txt`/`.tsv` files as text and anything else as RGEB.
pub fn load_table(path: &Path) -> Result<TokenEmbeddingTable> {
    let file = BufReader::new(File::open(path)?);
    if is_text_path(path) {
        TokenEmbeddingTable::read_text(file)
    } else {
        TokenEmbeddingTable::read_rgeb(file)
    }
}

pub fn write_table(table: &TokenEmbeddingTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if is_text_path(path) {
        table.write_text(&mut w)?;
    } else {
        table.write_rgeb(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn lookup<'a>(table: &'a TokenEmbeddingTable, doc_id: &str, token: usize) -> Result<&'a [f32]> {
    table.lookup(doc_id, token)
}
