//! ABSA dataset ingestion and normalization.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod semeval;
pub use self::semeval::{parse_semeval_xml, AlignOptions};

pub mod tokenize;

mod twitter;
pub use self::twitter::parse_twitter;

/// Sentiment polarity of an aspect.
#[derive(Clone, Copy, Debug, Deserialize, Eq, Hash, Ord, PartialEq, PartialOrd, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Positive, Polarity::Negative, Polarity::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Polarity::Positive),
            "negative" => Ok(Polarity::Negative),
            "neutral" => Ok(Polarity::Neutral),
            other => Err(Error::format(
                "polarity",
                format!("unknown polarity {other:?}"),
            )),
        }
    }
}

/// Half-open token range of an aspect term. Serialized as `[start, end]`.
#[derive(Clone, Copy, Debug, Deserialize, Eq, Hash, PartialEq, Serialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct AspectSpan {
    pub start: usize,
    pub end: usize,
}

impl AspectSpan {
    pub fn new(start: usize, end: usize) -> Self {
        AspectSpan { start, end }
    }

    pub fn range(self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn contains(self, index: usize) -> bool {
        self.range().contains(&index)
    }

    /// Checks `0 <= start < end <= n`.
    pub fn validate(self, n: usize) -> Result<()> {
        if self.start >= self.end {
            return Err(Error::format("aspect", format!("empty aspect span {self}")));
        }
        if self.end > n {
            return Err(Error::IndexOutOfRange {
                index: self.end - 1,
                len: n,
            });
        }
        Ok(())
    }
}

impl From<[usize; 2]> for AspectSpan {
    fn from([start, end]: [usize; 2]) -> Self {
        AspectSpan { start, end }
    }
}

impl From<AspectSpan> for [usize; 2] {
    fn from(span: AspectSpan) -> Self {
        [span.start, span.end]
    }
}

impl From<Range<usize>> for AspectSpan {
    fn from(r: Range<usize>) -> Self {
        AspectSpan::new(r.start, r.end)
    }
}

impl fmt::Display for AspectSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// One (sentence, aspect, polarity) unit.
#[derive(Clone, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct Sample {
    pub id: String,
    pub tokens: Vec<String>,
    pub aspect: AspectSpan,
    pub polarity: Polarity,
    pub language: String,
}

impl Sample {
    pub fn validate(&self) -> Result<()> {
        let ctx = || format!("sample {}", self.id);
        if self.tokens.is_empty() {
            return Err(Error::format(ctx(), "no tokens"));
        }
        if let Some(pos) = self.tokens.iter().position(|t| t.is_empty()) {
            return Err(Error::format(
                ctx(),
                format!("empty token at position {pos}"),
            ));
        }
        self.aspect
            .validate(self.tokens.len())
            .map_err(|e| Error::format(ctx(), e.to_string()))
    }

    pub fn aspect_tokens(&self) -> &[String] {
        &self.tokens[self.aspect.range()]
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Eq, Hash, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub split: Split,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, split: Split) -> Self {
        Dataset {
            name: name.into(),
            split,
            samples: Vec::new(),
        }
    }

    /// Validates every sample and the uniqueness of sample ids.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for sample in &self.samples {
            sample.validate()?;
            if !seen.insert(sample.id.as_str()) {
                return Err(Error::format(
                    format!("dataset {}/{}", self.name, self.split),
                    format!("duplicate sample id {}", sample.id),
                ));
            }
        }
        Ok(())
    }

    pub fn stats(&self) -> PolarityCounts {
        stats(self)
    }

    /// Deterministic train/dev partition. `dev_fraction` of the samples
    /// (rounded down) are drawn into the dev set after a seeded shuffle;
    /// both parts keep the original sample order.
    pub fn split_dev(&self, dev_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
            return Err(Error::Config(format!(
                "dev fraction must lie in (0, 1), got {dev_fraction}"
            )));
        }
        let n = self.samples.len();
        let n_dev = (n as f64 * dev_fraction).floor() as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut Xoshiro256PlusPlus::seed_from_u64(seed));
        let mut is_dev = vec![false; n];
        for &i in &order[..n_dev] {
            is_dev[i] = true;
        }

        let mut train = Dataset::new(self.name.clone(), Split::Train);
        let mut dev = Dataset::new(format!("{}-dev", self.name), Split::Train);
        for (sample, dev_member) in self.samples.iter().zip(is_dev) {
            if dev_member {
                dev.samples.push(sample.clone());
            } else {
                train.samples.push(sample.clone());
            }
        }
        Ok((train, dev))
    }
}

/// Sample counts per polarity.
#[derive(Clone, Copy, Debug, Default, Eq, PartialEq, Serialize)]
pub struct PolarityCounts {
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
}

impl PolarityCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative + self.neutral
    }

    pub fn add(&mut self, polarity: Polarity) {
        match polarity {
            Polarity::Positive => self.positive += 1,
            Polarity::Negative => self.negative += 1,
            Polarity::Neutral => self.neutral += 1,
        }
    }
}

pub fn stats(dataset: &Dataset) -> PolarityCounts {
    let mut counts = PolarityCounts::default();
    for sample in &dataset.samples {
        counts.add(sample.polarity);
    }
    counts
}

/// Writes split statistics as CSV with header `split,positive,negative,neutral`.
pub fn write_stats_csv<W: Write>(mut out: W, rows: &[(Split, PolarityCounts)]) -> Result<()> {
    writeln!(out, "split,positive,negative,neutral")?;
    for (split, c) in rows {
        writeln!(out, "{},{},{},{}", split, c.positive, c.negative, c.neutral)?;
    }
    Ok(())
}

/// Writes samples as canonical JSON Lines.
pub fn write_jsonl<'a, W, I>(mut out: W, samples: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Sample>,
{
    for sample in samples {
        serde_json::to_writer(&mut out, sample)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads canonical JSON Lines. Blank lines are skipped; every sample is
/// validated and ids must be unique.
pub fn read_jsonl<R: BufRead>(input: R, name: &str, split: Split) -> Result<Dataset> {
    let mut dataset = Dataset::new(name, split);
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: Sample = serde_json::from_str(&line)
            .map_err(|e| Error::format(format!("{name} line {}", lineno + 1), e.to_string()))?;
        dataset.samples.push(sample);
    }
    dataset.validate()?;
    Ok(dataset)
}
