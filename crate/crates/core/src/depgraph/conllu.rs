//! CoNLL-U reader.
//!
//! Sentences that follow a `# newdoc` comment are merged into one document
//! graph with one root per sentence. Without any `# newdoc` markers every
//! sentence is its own document, named after its `# sent_id`.

use super::graph::{locate_surfaces, DependencyGraph, Token};
use crate::error::{Error, Result};

struct RawToken {
    surface: String,
    head: usize,
    deprel: String,
    line: usize,
}

#[derive(Default)]
struct Sentence {
    text: Option<String>,
    sent_id: Option<String>,
    tokens: Vec<RawToken>,
    first_line: usize,
}

struct Doc {
    id: Option<String>,
    sentences: Vec<Sentence>,
}

/// Parses CoNLL-U text into one graph per document.
pub fn parse_conllu(text: &str) -> Result<Vec<DependencyGraph>> {
    let mut docs: Vec<Doc> = Vec::new();
    let mut explicit_docs = false;
    let mut current = Sentence::default();

    let flush = |docs: &mut Vec<Doc>, sent: &mut Sentence, explicit: bool| {
        if sent.tokens.is_empty() {
            *sent = Sentence::default();
            return;
        }
        let sent = std::mem::take(sent);
        if !explicit || docs.is_empty() {
            docs.push(Doc {
                id: None,
                sentences: Vec::new(),
            });
        }
        docs.last_mut().expect("pushed").sentences.push(sent);
    };

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut docs, &mut current, explicit_docs);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("newdoc") {
                flush(&mut docs, &mut current, explicit_docs);
                explicit_docs = true;
                let id = rest
                    .trim()
                    .strip_prefix("id")
                    .and_then(|r| r.trim().strip_prefix('='))
                    .map(|r| r.trim().to_string());
                docs.push(Doc {
                    id,
                    sentences: Vec::new(),
                });
            } else if let Some(v) = key_value(comment, "text") {
                current.text = Some(v.to_string());
            } else if let Some(v) = key_value(comment, "sent_id") {
                current.sent_id = Some(v.to_string());
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            // multiword token range or empty node
            continue;
        }
        let id: usize = id.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("non-integer ID {id:?}"),
        })?;
        if id != current.tokens.len() + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected token ID {}, found {id}", current.tokens.len() + 1),
            });
        }
        let head: usize = cols[6].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("non-integer HEAD {:?}", cols[6]),
        })?;
        if current.tokens.is_empty() {
            current.first_line = line_no;
        }
        current.tokens.push(RawToken {
            surface: cols[1].to_string(),
            head,
            deprel: cols[7].to_string(),
            line: line_no,
        });
    }
    flush(&mut docs, &mut current, explicit_docs);

    let mut graphs = Vec::with_capacity(docs.len());
    for (d, doc) in docs.into_iter().enumerate() {
        if doc.sentences.is_empty() {
            continue;
        }
        let doc_id = doc
            .id
            .or_else(|| doc.sentences[0].sent_id.clone())
            .unwrap_or_else(|| format!("doc-{d}"));
        graphs.push(assemble(doc_id, doc.sentences)?);
    }
    Ok(graphs)
}

fn key_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let rest = comment.strip_prefix(key)?.trim_start();
    Some(rest.strip_prefix('=')?.trim())
}

fn assemble(doc_id: String, sentences: Vec<Sentence>) -> Result<DependencyGraph> {
    let mut text = String::new();
    let mut text_chars = 0usize;
    let mut tokens = Vec::new();
    for sent in sentences {
        let n = sent.tokens.len();
        for t in &sent.tokens {
            if t.head > n {
                return Err(Error::Structure(format!(
                    "line {}: HEAD {} outside sentence of {n} tokens",
                    t.line, t.head
                )));
            }
        }
        let surfaces: Vec<&str> = sent.tokens.iter().map(|t| t.surface.as_str()).collect();
        let sent_text = sent.text.clone().unwrap_or_else(|| surfaces.join(" "));
        let spans = locate_surfaces(&sent_text, &surfaces).map_err(|i| Error::Parse {
            line: sent.tokens[i].line,
            msg: format!("form {:?} not found in '# text' of sentence at line {}", surfaces[i], sent.first_line),
        })?;
        if !text.is_empty() {
            text.push(' ');
            text_chars += 1;
        }
        let base = tokens.len();
        for (t, (s, e)) in sent.tokens.into_iter().zip(spans) {
            tokens.push(Token {
                index: tokens.len(),
                surface: t.surface,
                char_start: text_chars + s,
                char_end: text_chars + e,
                head: (t.head > 0).then(|| base + t.head - 1),
                deprel: t.deprel,
            });
        }
        text_chars += sent_text.chars().count();
        text.push_str(&sent_text);
    }
    DependencyGraph::new(doc_id, text, tokens)
}
