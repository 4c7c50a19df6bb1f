use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three information flows of a dependency graph. The discriminant is
/// the relation index used for per-relation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// Flow from a token's head into the token.
    HeadToDep = 0,
    /// Flow from a token's dependents up into the token.
    DepToHead = 1,
    SelfLoop = 2,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::HeadToDep, Relation::DepToHead, Relation::SelfLoop];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    /// Character (not byte) offsets into the document text, end exclusive.
    pub char_start: usize,
    pub char_end: usize,
    pub head: Option<usize>,
    #[serde(default)]
    pub deprel: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub doc_id: String,
    pub text: String,
    tokens: Vec<Token>,
    /// `neighbors[r][i]` is N_{i,r}, sorted ascending.
    neighbors: [Vec<Vec<usize>>; 3],
}

impl DependencyGraph {
    /// Validates tokens and derives the three neighbor relations.
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>, tokens: Vec<Token>) -> Result<Self> {
        let doc_id = doc_id.into();
        let n = tokens.len();
        for (i, t) in tokens.iter().enumerate() {
            if t.index != i {
                return Err(Error::Structure(format!(
                    "doc {doc_id}: token {i} carries index {}",
                    t.index
                )));
            }
            if t.char_start >= t.char_end {
                return Err(Error::Structure(format!(
                    "doc {doc_id}: token {i} has empty span {}..{}",
                    t.char_start, t.char_end
                )));
            }
            match t.head {
                Some(h) if h == i => {
                    return Err(Error::Structure(format!("doc {doc_id}: token {i} is its own head")))
                }
                Some(h) if h >= n => {
                    return Err(Error::Structure(format!(
                        "doc {doc_id}: token {i} has head {h} outside {n} tokens"
                    )))
                }
                _ => {}
            }
        }
        let mut head_to_dep = vec![Vec::new(); n];
        let mut dep_to_head = vec![Vec::new(); n];
        for (i, t) in tokens.iter().enumerate() {
            if let Some(h) = t.head {
                head_to_dep[i].push(h);
                dep_to_head[h].push(i);
            }
        }
        let self_loop = (0..n).map(|i| vec![i]).collect();
        Ok(DependencyGraph {
            doc_id,
            text: text.into(),
            tokens,
            neighbors: [head_to_dep, dep_to_head, self_loop],
        })
    }

    /// Graph from a head array alone; surfaces are `t0 t1 ...` joined by spaces.
    pub fn from_heads(doc_id: impl Into<String>, heads: &[Option<usize>]) -> Result<Self> {
        let mut text = String::new();
        let mut tokens = Vec::with_capacity(heads.len());
        for (i, &head) in heads.iter().enumerate() {
            if i > 0 {
                text.push(' ');
            }
            let surface = format!("t{i}");
            let start = text.chars().count();
            text.push_str(&surface);
            tokens.push(Token {
                index: i,
                char_start: start,
                char_end: start + surface.chars().count(),
                surface,
                head,
                deprel: String::new(),
            });
        }
        DependencyGraph::new(doc_id, text, tokens)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn neighbors(&self, node: usize, rel: Relation) -> &[usize] {
        &self.neighbors[rel.index()][node]
    }

    /// All `(node, neighbor)` pairs of one relation.
    pub fn edges(&self, rel: Relation) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors[rel.index()]
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().map(move |&j| (i, j)))
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.tokens.iter().filter(|t| t.head.is_none()).map(|t| t.index)
    }

    /// Re-derives token character offsets against `text` by locating each
    /// surface in order. Fails if a surface cannot be found.
    pub fn anchor_to(&mut self, text: &str) -> Result<()> {
        let surfaces: Vec<&str> = self.tokens.iter().map(|t| t.surface.as_str()).collect();
        let spans = locate_surfaces(text, &surfaces).map_err(|i| {
            Error::Alignment(format!(
                "doc {}: token {i} {:?} not found in text",
                self.doc_id, surfaces[i]
            ))
        })?;
        for (t, (s, e)) in self.tokens.iter_mut().zip(spans) {
            t.char_start = s;
            t.char_end = e;
        }
        self.text = text.to_string();
        Ok(())
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(self)
    }
}

/// Finds each surface in `text` in order, returning char spans. On failure
/// returns the index of the first surface that could not be placed.
pub(crate) fn locate_surfaces(text: &str, surfaces: &[&str]) -> std::result::Result<Vec<(usize, usize)>, usize> {
    let chars: Vec<char> = text.chars().collect();
    let mut cursor = 0;
    let mut spans = Vec::with_capacity(surfaces.len());
    for (i, s) in surfaces.iter().enumerate() {
        let needle: Vec<char> = s.chars().collect();
        if needle.is_empty() {
            return Err(i);
        }
        let found = (cursor..=chars.len().saturating_sub(needle.len()))
            .find(|&p| chars[p..p + needle.len()] == needle[..])
            .ok_or(i)?;
        spans.push((found, found + needle.len()));
        cursor = found + needle.len();
    }
    Ok(spans)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub doc_id: String,
    pub tokens: usize,
    pub roots: usize,
    /// Largest number of dependents of a single token.
    pub max_out_degree: usize,
    /// Largest number of distinct directional neighbors of a single token.
    pub max_neighbors: usize,
    pub head_to_dep_edges: usize,
    pub dep_to_head_edges: usize,
    pub self_loop_edges: usize,
}

pub fn graph_stats(g: &DependencyGraph) -> GraphStats {
    let count = |r: Relation| g.edges(r).count();
    GraphStats {
        doc_id: g.doc_id.clone(),
        tokens: g.len(),
        roots: g.roots().count(),
        max_out_degree: (0..g.len())
            .map(|i| g.neighbors(i, Relation::DepToHead).len())
            .max()
            .unwrap_or(0),
        max_neighbors: (0..g.len())
            .map(|i| g.neighbors(i, Relation::DepToHead).len() + g.neighbors(i, Relation::HeadToDep).len())
            .max()
            .unwrap_or(0),
        head_to_dep_edges: count(Relation::HeadToDep),
        dep_to_head_edges: count(Relation::DepToHead),
        self_loop_edges: count(Relation::SelfLoop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_token_stats() {
        let g = DependencyGraph::from_heads("d", &[None]).unwrap();
        let s = graph_stats(&g);
        assert_eq!((s.tokens, s.roots, s.head_to_dep_edges, s.dep_to_head_edges), (1, 1, 0, 0));
        assert_eq!(g.neighbors(0, Relation::SelfLoop), &[0]);
    }

    #[test]
    fn chain_of_three() {
        // token 0 heads token 1, token 1 heads token 2
        let g = DependencyGraph::from_heads("d", &[None, Some(0), Some(1)]).unwrap();
        assert_eq!(graph_stats(&g).dep_to_head_edges, 2);
    }

    #[test]
    fn star_center_degree() {
        let g = DependencyGraph::from_heads("d", &[None, Some(0), Some(0), Some(0), Some(0)]).unwrap();
        assert_eq!(g.neighbors(0, Relation::DepToHead).len(), 4);
        assert_eq!(graph_stats(&g).max_out_degree, 4);
    }

    #[test]
    fn rejects_self_head_and_out_of_range() {
        assert!(DependencyGraph::from_heads("d", &[Some(0)]).is_err());
        assert!(DependencyGraph::from_heads("d", &[None, Some(5)]).is_err());
    }

    #[test]
    fn anchor_realigns_offsets() {
        let mut g = DependencyGraph::from_heads("d", &[None, Some(0)]).unwrap();
        g.anchor_to("  t0,   t1!").unwrap();
        assert_eq!((g.tokens()[0].char_start, g.tokens()[1].char_start), (2, 8));
        assert!(g.anchor_to("t1 t0").is_err());
    }

    fn random_forest() -> impl Strategy<Value = Vec<Option<usize>>> {
        (1usize..25).prop_flat_map(|n| {
            proptest::collection::vec((any::<bool>(), any::<proptest::sample::Index>()), n).prop_map(
                |picks| {
                    picks
                        .iter()
                        .enumerate()
                        .map(|(i, (root, idx))| if i == 0 || *root { None } else { Some(idx.index(i)) })
                        .collect()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn edge_counts_and_transpose(heads in random_forest()) {
            let g = DependencyGraph::from_heads("p", &heads).unwrap();
            let t = heads.len();
            let roots = heads.iter().filter(|h| h.is_none()).count();
            prop_assert_eq!(g.edges(Relation::SelfLoop).count(), t);
            prop_assert_eq!(g.edges(Relation::HeadToDep).count(), t - roots);
            prop_assert_eq!(g.edges(Relation::DepToHead).count(), t - roots);
            let mut a: Vec<_> = g.edges(Relation::HeadToDep).collect();
            let mut b: Vec<_> = g.edges(Relation::DepToHead).map(|(i, j)| (j, i)).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            for i in 0..t {
                prop_assert_eq!(g.neighbors(i, Relation::SelfLoop), &[i]);
                let h2d = g.neighbors(i, Relation::HeadToDep);
                prop_assert!(h2d.len() <= 1);
                prop_assert_eq!(h2d.is_empty(), heads[i].is_none());
            }
        }
    }
}
