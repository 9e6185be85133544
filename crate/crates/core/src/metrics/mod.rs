//! Structural metrics over tree collections.
//!
//! * neighboring-connection proportion: share of arcs linking adjacent words;
//! * aspect-sentiment distance (AsD): per sample,
//!   `sum_{w in aspect} sum_{c in matched} dist(c, w) / (|aspect| * |matched|)`
//!   where `matched` are the positions of lexicon words, averaged over the
//!   samples that contain at least one lexicon word;
//! * paired AsD (pAsD): the same restricted to annotated (aspect, opinion)
//!   pairs;
//! * attachment agreement: share of words with the same undirected
//!   neighbor set in two trees.
//!
//! Distances are undirected path lengths in edges; ROOT is not a node.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AspectSpan, Sample};
use crate::decode::{DepTree, TreeSource};
use crate::error::{Error, Result};

mod lexicon;
pub use self::lexicon::SentimentLexicon;

/// How per-sentence neighboring counts combine into a corpus value.
#[derive(Clone, Copy, Debug, Default, Deserialize, Eq, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    /// Neighboring arcs over all arcs, corpus-wide.
    #[default]
    Pooled,
    /// Mean of per-sentence proportions (sentences without arcs skipped).
    PerSentence,
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(Pooling::Pooled),
            "per-sentence" | "per_sentence" => Ok(Pooling::PerSentence),
            other => Err(Error::Config(format!("unknown pooling {other:?}"))),
        }
    }
}

fn neighboring_counts(tree: &DepTree) -> (usize, usize) {
    let arcs = tree.len() - 1;
    let adjacent = tree.arcs().filter(|&(h, d)| h.abs_diff(d) == 1).count();
    (adjacent, arcs)
}

/// Proportion of non-root arcs with `|dependent - head| = 1`.
pub fn neighboring_proportion(trees: &[DepTree], pooling: Pooling) -> Result<f64> {
    if trees.is_empty() {
        return Err(Error::EmptyInput("no trees to measure".into()));
    }
    let counts: Vec<(usize, usize)> = trees.iter().map(neighboring_counts).collect();
    let total_arcs: usize = counts.iter().map(|c| c.1).sum();
    if total_arcs == 0 {
        return Err(Error::EmptyInput(
            "trees have no arcs (single-word sentences only)".into(),
        ));
    }
    Ok(match pooling {
        Pooling::Pooled => counts.iter().map(|c| c.0).sum::<usize>() as f64 / total_arcs as f64,
        Pooling::PerSentence => {
            let with_arcs: Vec<f64> = counts
                .iter()
                .filter(|c| c.1 > 0)
                .map(|&(a, n)| a as f64 / n as f64)
                .collect();
            with_arcs.iter().sum::<f64>() / with_arcs.len() as f64
        }
    })
}

/// Corpus-level mean distance and the number of samples contributing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceSummary {
    /// `None` when no sample contributes.
    pub value: Option<f64>,
    pub coverage: usize,
}

impl DistanceSummary {
    fn from_per_sample(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut sum = 0.0;
        let mut coverage = 0;
        for v in values.into_iter().flatten() {
            sum += v;
            coverage += 1;
        }
        DistanceSummary {
            value: (coverage > 0).then(|| sum / coverage as f64),
            coverage,
        }
    }
}

fn check_aligned(samples: &[Sample], trees: &[DepTree]) -> Result<()> {
    if samples.len() != trees.len() {
        return Err(Error::LengthMismatch(format!(
            "{} samples but {} trees",
            samples.len(),
            trees.len()
        )));
    }
    for (s, t) in samples.iter().zip(trees) {
        if s.tokens.len() != t.len() {
            return Err(Error::LengthMismatch(format!(
                "sample {} has {} tokens but its tree has {} words",
                s.id,
                s.tokens.len(),
                t.len()
            )));
        }
    }
    Ok(())
}

/// Per-sample AsD; `None` when no lexicon word occurs in the sentence.
pub fn sample_asd(sample: &Sample, tree: &DepTree, lex: &SentimentLexicon) -> Option<f64> {
    let matched = lex.matches(&sample.tokens);
    if matched.is_empty() {
        return None;
    }
    let aspect = sample.aspect;
    let mut total = 0usize;
    for w in aspect.range() {
        let dist = tree.distances_from([w]);
        total += matched.iter().map(|&c| dist[c]).sum::<usize>();
    }
    Some(total as f64 / (aspect.len() * matched.len()) as f64)
}

/// Aspect-sentiment distance over a corpus.
pub fn asd(
    samples: &[Sample],
    trees: &[DepTree],
    lex: &SentimentLexicon,
) -> Result<DistanceSummary> {
    check_aligned(samples, trees)?;
    Ok(DistanceSummary::from_per_sample(
        samples
            .iter()
            .zip(trees)
            .map(|(s, t)| sample_asd(s, t, lex)),
    ))
}

/// One annotated aspect/opinion pair.
#[derive(Clone, Copy, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct OpinionPair {
    pub aspect: AspectSpan,
    pub opinion: usize,
}

/// Per-sample pairs: `{"id":str,"pairs":[{"aspect":[s,e],"opinion":i},...]}`.
#[derive(Clone, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct AspectOpinionPairs {
    pub id: String,
    pub pairs: Vec<OpinionPair>,
}

pub fn read_pairs<R: BufRead>(input: R) -> Result<Vec<AspectOpinionPairs>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::format(format!("pairs line {}", lineno + 1), e.to_string()))?,
        );
    }
    Ok(out)
}

/// Per-sample pAsD; `None` without pairs.
pub fn sample_pasd(sample_id: &str, tree: &DepTree, pairs: &[OpinionPair]) -> Result<Option<f64>> {
    if pairs.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for pair in pairs {
        pair.aspect
            .validate(tree.len())
            .map_err(|e| Error::format(format!("pairs of {sample_id}"), e.to_string()))?;
        if pair.opinion >= tree.len() {
            return Err(Error::IndexOutOfRange {
                index: pair.opinion,
                len: tree.len(),
            });
        }
        let dist = tree.distances_from([pair.opinion]);
        let sum: usize = pair.aspect.range().map(|w| dist[w]).sum();
        total += sum as f64 / pair.aspect.len() as f64;
    }
    Ok(Some(total / pairs.len() as f64))
}

/// Paired aspect-sentiment distance. `pairs[k]` belongs to `samples[k]`.
pub fn pasd(
    samples: &[Sample],
    trees: &[DepTree],
    pairs: &[Vec<OpinionPair>],
) -> Result<DistanceSummary> {
    check_aligned(samples, trees)?;
    if pairs.len() != samples.len() {
        return Err(Error::LengthMismatch(format!(
            "{} pair lists for {} samples",
            pairs.len(),
            samples.len()
        )));
    }
    let per_sample = samples
        .iter()
        .zip(trees)
        .zip(pairs)
        .map(|((s, t), p)| sample_pasd(&s.id, t, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceSummary::from_per_sample(per_sample))
}

/// Share of words whose undirected neighbor set is identical in both trees,
/// pooled over all aligned tree pairs.
pub fn attachment_agreement(a: &[DepTree], b: &[DepTree]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "{} trees vs {} trees",
            a.len(),
            b.len()
        )));
    }
    let mut shared = 0usize;
    let mut total = 0usize;
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(format!(
                "tree pair {k}: {} vs {} words",
                x.len(),
                y.len()
            )));
        }
        let (nx, ny) = (x.neighbors(), y.neighbors());
        shared += nx.iter().zip(&ny).filter(|(p, q)| p == q).count();
        total += x.len();
    }
    if total == 0 {
        return Err(Error::EmptyInput("no trees to compare".into()));
    }
    Ok(shared as f64 / total as f64)
}

/// Metrics of one tree source over a corpus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceMetrics {
    pub source: TreeSource,
    pub neighboring: f64,
    pub asd: Option<f64>,
    pub pasd: Option<f64>,
    /// Samples contributing to AsD.
    pub coverage: usize,
    pub samples: usize,
}

/// Attachment agreement between two tree sources.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub a: TreeSource,
    pub b: TreeSource,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    pub pooling: Pooling,
    pub sources: Vec<SourceMetrics>,
    pub agreement: Vec<Agreement>,
}

impl MetricsReport {
    /// Measure one tree source. `pairs`, when given, must align with `samples`.
    pub fn measure(
        source: TreeSource,
        samples: &[Sample],
        trees: &[DepTree],
        lex: &SentimentLexicon,
        pairs: Option<&[Vec<OpinionPair>]>,
        pooling: Pooling,
    ) -> Result<SourceMetrics> {
        let asd = asd(samples, trees, lex)?;
        let pasd = pairs.map(|p| pasd(samples, trees, p)).transpose()?;
        Ok(SourceMetrics {
            source,
            neighboring: neighboring_proportion(trees, pooling)?,
            asd: asd.value,
            pasd: pasd.and_then(|p| p.value),
            coverage: asd.coverage,
            samples: samples.len(),
        })
    }

    /// CSV with header `source,neighboring,asd,pasd,coverage`; missing
    /// values are empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "source,neighboring,asd,pasd,coverage")?;
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        for row in &self.sources {
            writeln!(
                out,
                "{},{:.6},{},{},{}",
                row.source,
                row.neighboring,
                fmt(row.asd),
                fmt(row.pasd),
                row.coverage
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for MetricsReport {
    /// Plain-text table, one row per source.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>11} {:>9} {:>9} {:>8}",
            "source", "neighboring", "AsD", "pAsD", "coverage"
        )?;
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"));
        for r in &self.sources {
            writeln!(
                f,
                "{:<12} {:>11.3} {:>9} {:>9} {:>8}",
                r.source.as_str(),
                r.neighboring,
                cell(r.asd),
                cell(r.pasd),
                r.coverage
            )?;
        }
        Ok(())
    }
}
