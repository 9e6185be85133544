use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const POSITIVE: [&str; 25] = [
    "great",
    "good",
    "like",
    "just",
    "will",
    "well",
    "even",
    "love",
    "best",
    "better",
    "back",
    "want",
    "recommend",
    "worth",
    "easy",
    "sound",
    "right",
    "excellent",
    "nice",
    "real",
    "fun",
    "sure",
    "pretty",
    "interesting",
    "stars",
];

const NEGATIVE: [&str; 21] = [
    "too",
    "little",
    "bad",
    "game",
    "down",
    "long",
    "hard",
    "waste",
    "disappointed",
    "problem",
    "try",
    "poor",
    "less",
    "boring",
    "worst",
    "trying",
    "wrong",
    "least",
    "although",
    "problems",
    "cheap",
];

/// Lowercase sentiment words split into positive and negative sets.
///
/// The default lexicon holds 25 positive and 21 negative frequent review
/// sentiment words. Custom lexicons load from
/// `{"positive":[...],"negative":[...]}`.
#[derive(Clone, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct SentimentLexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        SentimentLexicon::new(POSITIVE, NEGATIVE).expect("bundled lexicon is valid")
    }
}

impl SentimentLexicon {
    pub fn new<P, N, S>(positive: P, negative: N) -> Result<Self>
    where
        P: IntoIterator<Item = S>,
        N: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let lex = SentimentLexicon {
            positive: positive
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
            negative: negative
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        };
        lex.validate()?;
        Ok(lex)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: SentimentLexicon =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("lexicon: {e}")))?;
        SentimentLexicon::new(&raw.positive, &raw.negative)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positive.is_empty() && self.negative.is_empty() {
            return Err(Error::Config("sentiment lexicon is empty".into()));
        }
        if let Some(w) = self.positive.intersection(&self.negative).next() {
            return Err(Error::Config(format!(
                "{w:?} is both positive and negative"
            )));
        }
        Ok(())
    }

    pub fn positive(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<String> {
        &self.negative
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lowercase exact match against either set.
    pub fn contains(&self, token: &str) -> bool {
        let lower = token.to_lowercase();
        self.positive.contains(&lower) || self.negative.contains(&lower)
    }

    /// Positions of `tokens` that are sentiment words.
    pub fn matches<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| self.contains(t.as_ref()))
            .map(|(i, _)| i)
            .collect()
    }
}
