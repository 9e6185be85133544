use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a tree came from.
#[derive(Clone, Copy, Debug, Deserialize, Eq, Hash, Ord, PartialEq, PartialOrd, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeSource {
    DepParser,
    LeftChain,
    RightChain,
    Induced,
    FtInduced,
}

impl TreeSource {
    pub const ALL: [TreeSource; 5] = [
        TreeSource::DepParser,
        TreeSource::LeftChain,
        TreeSource::RightChain,
        TreeSource::Induced,
        TreeSource::FtInduced,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TreeSource::DepParser => "dep_parser",
            TreeSource::LeftChain => "left_chain",
            TreeSource::RightChain => "right_chain",
            TreeSource::Induced => "induced",
            TreeSource::FtInduced => "ft_induced",
        }
    }
}

impl fmt::Display for TreeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TreeSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TreeSource::ALL
            .into_iter()
            .find(|src| src.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown tree source {s:?}")))
    }
}

/// Checks that `heads` describes a single-rooted tree: one `None`, all
/// heads in range, no self-attachment, and every word reaches the root.
pub fn validate_heads(heads: &[Option<usize>]) -> std::result::Result<(), String> {
    let n = heads.len();
    if n == 0 {
        return Err("tree has no words".into());
    }
    let roots = heads.iter().filter(|h| h.is_none()).count();
    if roots != 1 {
        return Err(format!("expected exactly one root, found {roots}"));
    }
    for (d, h) in heads.iter().enumerate() {
        if let Some(h) = *h {
            if h >= n {
                return Err(format!("head {h} of word {d} out of range"));
            }
            if h == d {
                return Err(format!("word {d} heads itself"));
            }
        }
    }
    // 0 = unvisited, 1 = on the current path, 2 = reaches the root.
    let mut state = vec![0u8; n];
    for start in 0..n {
        let mut path = Vec::new();
        let mut node = start;
        loop {
            match state[node] {
                2 => break,
                1 => return Err(format!("cycle through word {node}")),
                _ => {}
            }
            state[node] = 1;
            path.push(node);
            match heads[node] {
                Some(h) => node = h,
                None => break,
            }
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}

/// Rooted single-head dependency tree over `n` words. `heads[i] = None`
/// marks the root word.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct DepTree {
    heads: Vec<Option<usize>>,
    source: TreeSource,
    relations: Option<Vec<String>>,
}

impl DepTree {
    pub fn new(heads: Vec<Option<usize>>, source: TreeSource) -> Result<Self> {
        validate_heads(&heads).map_err(|reason| Error::InvalidTree {
            sentence: format!("{source} tree"),
            reason,
        })?;
        Ok(DepTree {
            heads,
            source,
            relations: None,
        })
    }

    /// Attach dependency relation labels, one per word.
    pub fn with_relations(mut self, relations: Vec<String>) -> Result<Self> {
        if relations.len() != self.heads.len() {
            return Err(Error::LengthMismatch(format!(
                "{} relations for {} words",
                relations.len(),
                self.heads.len()
            )));
        }
        self.relations = Some(relations);
        Ok(self)
    }

    pub fn with_source(mut self, source: TreeSource) -> Self {
        self.source = source;
        self
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    /// Always false: trees have at least one word.
    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn heads(&self) -> &[Option<usize>] {
        &self.heads
    }

    pub fn head(&self, i: usize) -> Option<usize> {
        self.heads[i]
    }

    pub fn source(&self) -> TreeSource {
        self.source
    }

    pub fn relations(&self) -> Option<&[String]> {
        self.relations.as_deref()
    }

    pub fn root(&self) -> usize {
        self.heads
            .iter()
            .position(Option::is_none)
            .expect("validated tree has a root")
    }

    /// Non-root arcs as `(head, dependent)`, in dependent order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.heads
            .iter()
            .enumerate()
            .filter_map(|(d, h)| h.map(|h| (h, d)))
    }

    /// Undirected neighbor lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for (h, d) in self.arcs() {
            adj[h].push(d);
            adj[d].push(h);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Undirected path lengths (in edges) from the nearest of `sources`.
    pub fn distances_from(&self, sources: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let adj = self.neighbors();
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Sum of `scores[[head, dependent]]` over all non-root arcs, in
    /// dependent order.
    pub fn weight(&self, scores: &ndarray::Array2<f64>) -> f64 {
        self.arcs().map(|(h, d)| scores[[h, d]]).sum()
    }

    /// True when no two arcs cross, counting the root attachment as an arc
    /// from a virtual position left of the sentence.
    pub fn is_projective(&self) -> bool {
        crossing_arcs(&self.heads) == 0
    }
}

/// Number of crossing arc pairs, with the root arc drawn from position -1.
pub fn crossing_arcs(heads: &[Option<usize>]) -> usize {
    let spans: Vec<(i64, i64)> = heads
        .iter()
        .enumerate()
        .map(|(d, h)| {
            let h = h.map_or(-1, |h| h as i64);
            let d = d as i64;
            (h.min(d), h.max(d))
        })
        .collect();
    let mut count = 0;
    for (k, &(a, b)) in spans.iter().enumerate() {
        for &(c, e) in &spans[k + 1..] {
            if (a < c && c < b && b < e) || (c < a && a < e && e < b) {
                count += 1;
            }
        }
    }
    count
}
