//! Structural inputs of tree-based ALSC models: a self-looped undirected
//! adjacency matrix (graph convolution models), per-word tree distances to
//! the aspect (proximity-weighted models), and the aspect-rooted reshaped
//! tree with relation tags (relational graph attention models).

use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::AspectSpan;
use crate::decode::{DepTree, TreeSource};
use crate::error::Result;

/// Relation tag given to distance-1 words when the tree has no labels.
pub const VIRTUAL_TAG: &str = "1:dep";
pub const ROOT_TAG: &str = "ROOT";

/// Symmetric 0/1 matrix with ones on the diagonal and on every tree edge.
pub fn adjacency(tree: &DepTree) -> Array2<u8> {
    let n = tree.len();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        a[[i, i]] = 1;
    }
    for (h, d) in tree.arcs() {
        a[[h, d]] = 1;
        a[[d, h]] = 1;
    }
    a
}

/// Undirected tree distance of every word to its nearest aspect word.
pub fn proximity(tree: &DepTree, aspect: AspectSpan) -> Result<Vec<usize>> {
    aspect.validate(tree.len())?;
    Ok(tree.distances_from(aspect.range()))
}

/// Aspect-rooted tree: aspect words attach to ROOT, every other word
/// attaches directly to its nearest aspect word (lowest index on ties).
#[derive(Clone, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct ReshapedTree {
    /// `None` for aspect words (attached to ROOT).
    pub heads: Vec<Option<usize>>,
    pub tags: Vec<String>,
}

impl ReshapedTree {
    /// Distance encoded in a tag (`"3:con"` -> 3, `"1:dep"` or a syntactic
    /// label -> 1, `"ROOT"` -> 0).
    pub fn tag_distance(tag: &str) -> usize {
        if tag == ROOT_TAG {
            return 0;
        }
        tag.strip_suffix(":con")
            .and_then(|d| d.parse().ok())
            .unwrap_or(1)
    }
}

/// Reshape `tree` around `aspect`.
///
/// Distance-1 words get the syntactic relation of the connecting edge when
/// the tree comes from a parser and carries labels, otherwise the uniform
/// virtual tag `1:dep`. Words at distance `d >= 2` get `"{d}:con"`.
pub fn reshape_aspect_oriented(tree: &DepTree, aspect: AspectSpan) -> Result<ReshapedTree> {
    aspect.validate(tree.len())?;
    let per_aspect: Vec<Vec<usize>> = aspect.range().map(|a| tree.distances_from([a])).collect();
    let labels = match tree.source() {
        TreeSource::DepParser => tree.relations(),
        _ => None,
    };

    let mut heads = Vec::with_capacity(tree.len());
    let mut tags = Vec::with_capacity(tree.len());
    for i in 0..tree.len() {
        if aspect.contains(i) {
            heads.push(None);
            tags.push(ROOT_TAG.to_owned());
            continue;
        }
        let (offset, dist) = per_aspect
            .iter()
            .map(|d| d[i])
            .enumerate()
            .min_by_key(|&(k, d)| (d, k))
            .expect("aspect is non-empty");
        let anchor = aspect.start + offset;
        heads.push(Some(anchor));
        let tag = if dist == 1 {
            match labels {
                Some(rels) if tree.head(i) == Some(anchor) => rels[i].clone(),
                Some(rels) => rels[anchor].clone(),
                None => VIRTUAL_TAG.to_owned(),
            }
        } else {
            format!("{dist}:con")
        };
        tags.push(tag);
    }
    Ok(ReshapedTree { heads, tags })
}

/// The three encodings of one sample, as exported to model trainers.
#[derive(Clone, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct TreeFeatures {
    pub id: String,
    pub source: TreeSource,
    pub n: usize,
    /// Row-major adjacency bits.
    pub adjacency: Vec<u8>,
    pub proximity: Vec<usize>,
    pub reshaped: ReshapedTree,
}

impl TreeFeatures {
    pub fn compute(id: &str, tree: &DepTree, aspect: AspectSpan) -> Result<Self> {
        Ok(TreeFeatures {
            id: id.to_owned(),
            source: tree.source(),
            n: tree.len(),
            adjacency: adjacency(tree).iter().copied().collect(),
            proximity: proximity(tree, aspect)?,
            reshaped: reshape_aspect_oriented(tree, aspect)?,
        })
    }
}

pub fn write_features<'a, W, I>(mut out: W, features: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TreeFeatures>,
{
    for f in features {
        serde_json::to_writer(&mut out, f)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
