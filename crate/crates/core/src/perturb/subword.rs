//! Subword-to-word aggregation of impact matrices.

use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use super::ImpactMatrix;
use crate::error::{Error, Result};

/// Per-word subword ranges of one sample, as emitted next to real-model
/// matrix dumps: `{"id":str,"word_ranges":[[s,e],...]}`.
///
/// Ranges are half-open, non-empty and consecutive. Subword positions
/// outside the covered block (e.g. `[CLS]`, `[SEP]`, `<s>`) are special
/// tokens and get dropped.
#[derive(Clone, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct SubwordAlignment {
    pub id: String,
    pub word_ranges: Vec<[usize; 2]>,
}

impl SubwordAlignment {
    /// One subword per word over `n` positions.
    pub fn identity(id: impl Into<String>, n: usize) -> Self {
        SubwordAlignment {
            id: id.into(),
            word_ranges: (0..n).map(|i| [i, i + 1]).collect(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let fail = |m: String| Error::SubwordAlignment(format!("{}: {m}", self.id));
        if self.word_ranges.is_empty() {
            return Err(fail("no word ranges".into()));
        }
        for (k, &[start, end]) in self.word_ranges.iter().enumerate() {
            if start >= end {
                return Err(fail(format!("word {k} has empty range [{start},{end})")));
            }
            if end > dim {
                return Err(fail(format!(
                    "word {k} range [{start},{end}) exceeds {dim} subword positions"
                )));
            }
            if k > 0 {
                let prev_end = self.word_ranges[k - 1][1];
                if start != prev_end {
                    return Err(fail(format!(
                        "word {k} starts at {start} but word {} ends at {prev_end}",
                        k - 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Pooling of a subword block into one word-level value.
#[derive(Clone, Copy, Debug, Default, Deserialize, Eq, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Max,
    /// Value at the first subword of each word.
    First,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            "first" => Ok(Aggregation::First),
            other => Err(Error::Config(format!("unknown aggregation {other:?}"))),
        }
    }
}

/// Strip the usual word-piece markers (`##`, `\u{120}`, `\u{2581}`).
fn piece_text(piece: &str) -> &str {
    piece
        .strip_prefix("##")
        .or_else(|| piece.strip_prefix('\u{120}'))
        .or_else(|| piece.strip_prefix('\u{2581}'))
        .unwrap_or(piece)
}

/// Aggregate a subword-level matrix to word level.
///
/// Word labels are the concatenated subword pieces with word-piece markers
/// removed. The word-level diagonal is zero.
pub fn aggregate_subwords(
    m: &ImpactMatrix,
    alignment: &SubwordAlignment,
    method: Aggregation,
) -> Result<ImpactMatrix> {
    alignment.validate(m.len())?;
    let ranges = &alignment.word_ranges;
    let n = ranges.len();
    let mut values = Array2::zeros((n, n));
    for (a, &[ra, ea]) in ranges.iter().enumerate() {
        for (b, &[rb, eb]) in ranges.iter().enumerate() {
            if a == b {
                continue;
            }
            let block = m.values.slice(s![ra..ea, rb..eb]);
            values[[a, b]] = match method {
                Aggregation::Mean => block.sum() / block.len() as f64,
                Aggregation::Max => block.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                Aggregation::First => block[[0, 0]],
            };
        }
    }
    let words = ranges
        .iter()
        .map(|&[start, end]| m.words[start..end].iter().map(|p| piece_text(p)).collect())
        .collect();
    Ok(ImpactMatrix {
        sample_id: m.sample_id.clone(),
        layer: m.layer,
        words,
        values,
    })
}

pub fn write_alignments<'a, W, I>(mut out: W, alignments: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a SubwordAlignment>,
{
    for a in alignments {
        serde_json::to_writer(&mut out, a)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_alignments<R: BufRead>(input: R) -> Result<Vec<SubwordAlignment>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let a: SubwordAlignment = serde_json::from_str(&line)
            .map_err(|e| Error::format(format!("alignment line {}", lineno + 1), e.to_string()))?;
        out.push(a);
    }
    Ok(out)
}
