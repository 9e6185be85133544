//! Tree decoding from impact matrices, chain baselines and CoNLL-U I/O.
//!
//! Arc scores come from an impact matrix `M` (row = affected word):
//! with [`Direction::ImpactOnDependent`] the arc `h -> d` scores `M[d][h]`,
//! i.e. how much the head perturbs the dependent. [`Direction::Symmetric`]
//! uses `(M[d][h] + M[h][d]) / 2`. Decoders maximize the total arc score
//! unless `minimize` is set, in which case scores are negated.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturb::ImpactMatrix;

mod cle;
pub use self::cle::max_arborescence;

mod conllu;
pub use self::conllu::{import_conllu, write_conllu, ConlluSentence};

mod eisner;
pub use self::eisner::projective_heads;

mod tree;
pub use self::tree::{crossing_arcs, validate_heads, DepTree, TreeSource};

#[derive(Clone, Copy, Debug, Default, Deserialize, Eq, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    ImpactOnDependent,
    Symmetric,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "impact_on_dependent" | "impact-on-dependent" => Ok(Direction::ImpactOnDependent),
            "symmetric" => Ok(Direction::Symmetric),
            other => Err(Error::Config(format!("unknown direction {other:?}"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::ImpactOnDependent => "impact_on_dependent",
            Direction::Symmetric => "symmetric",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Eq, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    #[default]
    ChuLiuEdmonds,
    Eisner,
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cle" | "chu_liu_edmonds" => Ok(Decoder::ChuLiuEdmonds),
            "eisner" => Ok(Decoder::Eisner),
            other => Err(Error::Config(format!("unknown decoder {other:?}"))),
        }
    }
}

/// How impact values turn into arc scores.
#[derive(Clone, Copy, Debug, Default, Deserialize, Eq, PartialEq, Serialize)]
pub struct Scoring {
    pub direction: Direction,
    pub minimize: bool,
}

impl Scoring {
    /// Dense arc scores, `scores[[h, d]]` for arc `h -> d`. The diagonal is 0.
    pub fn arc_scores(&self, m: &ImpactMatrix) -> Array2<f64> {
        let v = &m.values;
        let n = m.len();
        let sign = if self.minimize { -1.0 } else { 1.0 };
        Array2::from_shape_fn((n, n), |(h, d)| {
            if h == d {
                return 0.0;
            }
            let raw = match self.direction {
                Direction::ImpactOnDependent => v[[d, h]],
                Direction::Symmetric => (v[[d, h]] + v[[h, d]]) / 2.0,
            };
            sign * raw
        })
    }
}

/// Full decoding configuration.
#[derive(Clone, Copy, Debug, Default, Deserialize, Eq, PartialEq, Serialize)]
pub struct DecodeOptions {
    pub decoder: Decoder,
    pub scoring: Scoring,
    /// Fixed root for Chu-Liu/Edmonds; `None` searches every root.
    pub root: Option<usize>,
}

fn check_nonempty(m: &ImpactMatrix) -> Result<()> {
    if m.is_empty() {
        return Err(Error::EmptyInput(format!(
            "matrix {} has no words",
            m.sample_id
        )));
    }
    Ok(())
}

/// Maximum spanning arborescence rooted at `root`.
pub fn chu_liu_edmonds(m: &ImpactMatrix, root: usize, scoring: Scoring) -> Result<DepTree> {
    check_nonempty(m)?;
    if root >= m.len() {
        return Err(Error::IndexOutOfRange {
            index: root,
            len: m.len(),
        });
    }
    let heads = max_arborescence(&scoring.arc_scores(m), root);
    DepTree::new(heads, TreeSource::Induced)
}

/// Chu-Liu/Edmonds under every candidate root; the highest total weight
/// wins, ties going to the lowest root.
pub fn best_root_tree(m: &ImpactMatrix, scoring: Scoring) -> Result<DepTree> {
    check_nonempty(m)?;
    let scores = scoring.arc_scores(m);
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    for root in 0..m.len() {
        let heads = max_arborescence(&scores, root);
        let weight: f64 = heads
            .iter()
            .enumerate()
            .filter_map(|(d, h)| h.map(|h| scores[[h, d]]))
            .sum();
        if best.as_ref().is_none_or(|(w, _)| weight > *w) {
            best = Some((weight, heads));
        }
    }
    DepTree::new(best.expect("at least one root").1, TreeSource::Induced)
}

/// Best projective tree.
pub fn eisner(m: &ImpactMatrix, scoring: Scoring) -> Result<DepTree> {
    check_nonempty(m)?;
    DepTree::new(
        projective_heads(&scoring.arc_scores(m)),
        TreeSource::Induced,
    )
}

/// Decode with the configured decoder and root policy.
pub fn decode(m: &ImpactMatrix, opts: &DecodeOptions) -> Result<DepTree> {
    match (opts.decoder, opts.root) {
        (Decoder::ChuLiuEdmonds, Some(root)) => chu_liu_edmonds(m, root, opts.scoring),
        (Decoder::ChuLiuEdmonds, None) => best_root_tree(m, opts.scoring),
        (Decoder::Eisner, Some(_)) => Err(Error::Config(
            "a fixed root is only supported by the Chu-Liu/Edmonds decoder".into(),
        )),
        (Decoder::Eisner, None) => eisner(m, opts.scoring),
    }
}

/// Every word's head is the next word; the last word is the root.
pub fn left_chain(n: usize) -> Result<DepTree> {
    let heads = (0..n)
        .map(|i| if i + 1 < n { Some(i + 1) } else { None })
        .collect();
    DepTree::new(heads, TreeSource::LeftChain)
}

/// Every word's head is the previous word; the first word is the root.
pub fn right_chain(n: usize) -> Result<DepTree> {
    let heads = (0..n).map(|i| i.checked_sub(1)).collect();
    DepTree::new(heads, TreeSource::RightChain)
}
