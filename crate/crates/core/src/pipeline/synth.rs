//! Templated GAP-style corpora with planted, learnable label signal.
//!
//! Each document is one sentence built from a small set of templates with
//! hand-written dependency trees. Labels are drawn uniformly; the label is
//! visible only through the embeddings, where [`signal_for`] raises one
//! coordinate on the tokens of the correct mention.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::dataset::Dataset;
use crate::corefhead::{locate_mentions, GapInstance, Label};
use crate::depgraph::{parse_conllu, DependencyGraph};
use crate::embedstore::{synth_embeddings, SignalMark, SignalSpec};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

const NAMES: [&str; 14] = [
    "Alice", "Bill", "Carol", "David", "Mary Ann", "Jean Paul", "Eve", "Frank", "Grace", "Henry", "Ivy", "Jack",
    "Anna Lee", "Omar",
];
const PRONOUNS: [&str; 2] = ["she", "he"];

enum Piece {
    A,
    B,
    P,
    Word(&'static str),
}

struct Template {
    pieces: &'static [Piece],
    /// Head piece of each piece; `None` marks the root.
    heads: &'static [Option<usize>],
    rels: &'static [&'static str],
}

use Piece::{Word as W, A, B, P};

const TEMPLATES: [Template; 3] = [
    // A told B that P was late .
    Template {
        pieces: &[A, W("told"), B, W("that"), P, W("was"), W("late"), W(".")],
        heads: &[Some(1), None, Some(1), Some(6), Some(6), Some(6), Some(1), Some(1)],
        rels: &["nsubj", "root", "obj", "mark", "nsubj", "cop", "ccomp", "punct"],
    },
    // After A called B , P left .
    Template {
        pieces: &[W("After"), A, W("called"), B, W(","), P, W("left"), W(".")],
        heads: &[Some(2), Some(2), Some(6), Some(2), Some(6), Some(6), None, Some(6)],
        rels: &["mark", "nsubj", "advcl", "obj", "punct", "nsubj", "root", "punct"],
    },
    // A saw B when P arrived .
    Template {
        pieces: &[A, W("saw"), B, W("when"), P, W("arrived"), W(".")],
        heads: &[Some(1), None, Some(1), Some(5), Some(5), Some(1), Some(1)],
        rels: &["nsubj", "root", "obj", "advmod", "nsubj", "advcl", "punct"],
    },
];

/// A generated corpus: GAP rows and the matching CoNLL-U text.
#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub instances: Vec<GapInstance>,
    pub conllu: String,
}

/// Builds `n` single-sentence documents named `{prefix}-{k}`.
pub fn synth_corpus(n: usize, seed: u64, prefix: &str) -> SynthCorpus {
    let mut rng = seeded(derive_seed(seed, &[0x0073_796e_7468]));
    let mut instances = Vec::with_capacity(n);
    let mut conllu = String::new();
    for k in 0..n {
        let doc_id = format!("{prefix}-{k}");
        let t = &TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
        let pair: Vec<&str> = NAMES.choose_multiple(&mut rng, 2).copied().collect();
        let pronoun = PRONOUNS[rng.gen_range(0..PRONOUNS.len())];
        let label = Label::from_index(rng.gen_range(0..3)).expect("three labels");

        // tokens per piece, and the token index each piece's head word lands on
        let mut forms: Vec<&str> = Vec::new();
        let mut first_tok = Vec::with_capacity(t.pieces.len());
        let mut spans = Vec::with_capacity(t.pieces.len());
        for piece in t.pieces {
            let text = match piece {
                A => pair[0],
                B => pair[1],
                P => pronoun,
                W(w) => w,
            };
            first_tok.push(forms.len());
            let words: Vec<&str> = text.split(' ').collect();
            spans.push(words.len());
            forms.extend(words);
        }
        let mut lines = Vec::with_capacity(forms.len());
        let mut offsets = Vec::with_capacity(forms.len());
        let mut at = 0;
        for (p, piece_first) in first_tok.iter().enumerate() {
            for w in 0..spans[p] {
                let tok = piece_first + w;
                let (head, rel) = if w > 0 {
                    (piece_first + 1, "flat")
                } else {
                    match t.heads[p] {
                        Some(h) => (first_tok[h] + 1, t.rels[p]),
                        None => (0, "root"),
                    }
                };
                lines.push(format!("{}\t{}\t_\t_\t_\t_\t{head}\t{rel}\t_\t_", tok + 1, forms[tok]));
                offsets.push(at);
                at += forms[tok].chars().count() + 1;
            }
        }
        let text = forms.join(" ");
        let offset_of = |which: fn(&Piece) -> bool| -> usize {
            let p = t.pieces.iter().position(which).expect("template has every mention");
            offsets[first_tok[p]]
        };
        instances.push(GapInstance {
            doc_id: doc_id.clone(),
            text: text.clone(),
            pronoun: pronoun.to_string(),
            pronoun_offset: offset_of(|p| matches!(p, P)),
            a_text: pair[0].to_string(),
            a_offset: offset_of(|p| matches!(p, A)),
            b_text: pair[1].to_string(),
            b_offset: offset_of(|p| matches!(p, B)),
            label,
        });
        conllu.push_str(&format!("# newdoc id = {doc_id}\n# sent_id = {doc_id}-1\n# text = {text}\n"));
        conllu.push_str(&lines.join("\n"));
        conllu.push_str("\n\n");
    }
    SynthCorpus { instances, conllu }
}

/// Marks that make the label recoverable: coordinate 0 on the A tokens for
/// label A, coordinate 1 on the B tokens for label B, coordinate 2 on the
/// pronoun for NEITHER.
pub fn signal_for(instances: &[GapInstance], graphs: &[DependencyGraph], amplitude: f32) -> Result<SignalSpec> {
    let by_id: HashMap<&str, &DependencyGraph> = graphs.iter().map(|g| (g.doc_id.as_str(), g)).collect();
    let mut marks = Vec::with_capacity(instances.len());
    for inst in instances {
        let mut g = by_id
            .get(inst.doc_id.as_str())
            .map(|g| (*g).clone())
            .ok_or_else(|| Error::Coverage(format!("no dependency graph for {}", inst.doc_id)))?;
        g.anchor_to(&inst.text)?;
        let m = locate_mentions(inst, &g)?;
        let (tokens, coordinate) = match inst.label {
            Label::A => (m.a, 0),
            Label::B => (m.b, 1),
            Label::Neither => (m.p, 2),
        };
        marks.push(SignalMark {
            doc_id: inst.doc_id.clone(),
            tokens,
            coordinate,
        });
    }
    Ok(SignalSpec { amplitude, marks })
}

/// A ready dataset of `n` synthetic instances with planted signal.
pub fn synth_dataset(n: usize, seed: u64, prefix: &str, dim: usize, amplitude: f32) -> Result<Dataset> {
    let corpus = synth_corpus(n, seed, prefix);
    let graphs = parse_conllu(&corpus.conllu)?;
    let signal = signal_for(&corpus.instances, &graphs, amplitude)?;
    let table = synth_embeddings(&graphs, dim, derive_seed(seed, &[1]), Some(&signal))?;
    Dataset::assemble(corpus.instances, graphs, table)
}

/// Three five-token documents with one instance each and `dim`-wide
/// random embeddings; small enough for finite-difference checks.
pub fn tiny_dataset(dim: usize, seed: u64) -> Result<Dataset> {
    // heads are 1-based, 0 = root; mentions are tokens 0 (A), 2 (B), 3 (P)
    let docs = [
        ("tiny-0", "Alice told Bill she left", [2, 0, 2, 5, 2], Label::A),
        ("tiny-1", "Bill met Carol he smiled", [2, 0, 2, 5, 2], Label::Neither),
        ("tiny-2", "Eve saw Omar she waved", [2, 0, 2, 5, 2], Label::B),
    ];
    let mut conllu = String::new();
    let mut instances = Vec::new();
    for (id, text, heads, label) in docs {
        let words: Vec<&str> = text.split(' ').collect();
        let offset = |k: usize| words[..k].iter().map(|w| w.len() + 1).sum::<usize>();
        conllu.push_str(&format!("# newdoc id = {id}\n# text = {text}\n"));
        for (k, w) in words.iter().enumerate() {
            conllu.push_str(&format!("{}\t{w}\t_\t_\t_\t_\t{}\tdep\t_\t_\n", k + 1, heads[k]));
        }
        conllu.push('\n');
        instances.push(GapInstance {
            doc_id: id.to_string(),
            text: text.to_string(),
            pronoun: words[3].to_string(),
            pronoun_offset: offset(3),
            a_text: words[0].to_string(),
            a_offset: 0,
            b_text: words[2].to_string(),
            b_offset: offset(2),
            label,
        });
    }
    let graphs = parse_conllu(&conllu)?;
    let table = synth_embeddings(&graphs, dim, seed, None)?;
    Dataset::assemble(instances, graphs, table)
}
