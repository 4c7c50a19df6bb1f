use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::depgraph::DependencyGraph;
use crate::error::{Error, Result};

/// Referent of the pronoun. The discriminant is the class index used in
/// every tensor and file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    A = 0,
    B = 1,
    #[serde(rename = "NEITHER")]
    Neither = 2,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::A, Label::B, Label::Neither];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::A => "A",
            Label::B => "B",
            Label::Neither => "NEITHER",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        match s.trim() {
            "A" => Ok(Label::A),
            "B" => Ok(Label::B),
            "NEITHER" | "N" | "Neither" => Ok(Label::Neither),
            other => Err(Error::Label {
                id: String::new(),
                msg: format!("unknown label {other:?}"),
            }),
        }
    }
}

/// One GAP row. Offsets count characters, not bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInstance {
    pub doc_id: String,
    pub text: String,
    pub pronoun: String,
    pub pronoun_offset: usize,
    pub a_text: String,
    pub a_offset: usize,
    pub b_text: String,
    pub b_offset: usize,
    pub label: Label,
}

impl GapInstance {
    /// Checks that every mention lies inside the text and that the text at
    /// each offset is the mention string.
    pub fn validate(&self) -> Result<()> {
        let chars: Vec<char> = self.text.chars().collect();
        for (what, offset, mention) in [
            ("pronoun", self.pronoun_offset, &self.pronoun),
            ("A", self.a_offset, &self.a_text),
            ("B", self.b_offset, &self.b_text),
        ] {
            let len = mention.chars().count();
            if len == 0 || offset + len > chars.len() {
                return Err(Error::Label {
                    id: self.doc_id.clone(),
                    msg: format!("{what} {mention:?} at {offset} falls outside text of {} chars", chars.len()),
                });
            }
            let found: String = chars[offset..offset + len].iter().collect();
            if &found != mention {
                return Err(Error::Label {
                    id: self.doc_id.clone(),
                    msg: format!("{what} offset {offset} reads {found:?}, expected {mention:?}"),
                });
            }
        }
        Ok(())
    }
}

/// Token indices of the three mentions in one graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionTokens {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub p: Vec<usize>,
}

impl MentionTokens {
    /// All mention tokens, sorted and deduplicated.
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.a.iter().chain(&self.b).chain(&self.p).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

fn containing(g: &DependencyGraph, offset: usize) -> Option<usize> {
    g.tokens()
        .iter()
        .position(|t| t.char_start <= offset && offset < t.char_end)
}

fn span_tokens(g: &DependencyGraph, what: &str, offset: usize, len: usize) -> Result<Vec<usize>> {
    let start = containing(g, offset).ok_or_else(|| {
        Error::Alignment(format!("doc {}: {what} offset {offset} is not inside any token", g.doc_id))
    })?;
    let end = offset + len.max(1);
    let run: Vec<usize> = (start..g.len())
        .take_while(|&i| g.tokens()[i].char_start < end)
        .collect();
    Ok(run)
}

/// Maps the pronoun to the token containing its offset and each candidate
/// to the contiguous run of tokens overlapping its character span.
pub fn locate_mentions(inst: &GapInstance, g: &DependencyGraph) -> Result<MentionTokens> {
    let p = containing(g, inst.pronoun_offset).ok_or_else(|| {
        Error::Alignment(format!(
            "doc {}: pronoun offset {} is not inside any token",
            g.doc_id, inst.pronoun_offset
        ))
    })?;
    Ok(MentionTokens {
        a: span_tokens(g, "A", inst.a_offset, inst.a_text.chars().count())?,
        b: span_tokens(g, "B", inst.b_offset, inst.b_text.chars().count())?,
        p: vec![p],
    })
}
