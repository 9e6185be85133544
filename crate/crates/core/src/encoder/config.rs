use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAD: &str = "[PAD]";
pub const MASK: &str = "[MASK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const UNK: &str = "[UNK]";

/// Special vocabulary entries, in the order they open a generated vocabulary.
pub const SPECIALS: [&str; 5] = [PAD, MASK, CLS, SEP, UNK];

pub const CONFIG_VERSION: u32 = 1;

fn config_version() -> u32 {
    CONFIG_VERSION
}

/// Hyper-parameters and vocabulary of the toy encoder.
///
/// Serialized as a versioned JSON document:
///
/// ```json
/// {"version":1,"num_layers":4,"hidden_dim":64,"num_heads":4,"ffn_dim":128,
///  "vocab":["[PAD]","[MASK]","[CLS]","[SEP]","[UNK]","food"],
///  "max_positions":512,"seed":42}
/// ```
#[derive(Clone, Debug, Deserialize, Eq, PartialEq, Serialize)]
pub struct EncoderConfig {
    #[serde(default = "config_version")]
    pub version: u32,
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub num_heads: usize,
    pub ffn_dim: usize,
    pub vocab: Vec<String>,
    pub max_positions: usize,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            version: CONFIG_VERSION,
            num_layers: 4,
            hidden_dim: 64,
            num_heads: 4,
            ffn_dim: 128,
            vocab: SPECIALS.iter().map(|s| s.to_string()).collect(),
            max_positions: 512,
            seed: 0,
        }
    }
}

impl EncoderConfig {
    /// Default hyper-parameters with a vocabulary made of the special
    /// entries followed by the distinct `words` in sorted order.
    pub fn with_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let distinct: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().to_owned())
            .filter(|w| !SPECIALS.contains(&w.as_str()))
            .collect();
        let mut cfg = EncoderConfig::default();
        cfg.vocab.extend(distinct);
        cfg
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_dim / self.num_heads
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "encoder config version {} unsupported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.num_layers == 0 {
            return Err(Error::Config("num_layers must be at least 1".into()));
        }
        if self.num_heads == 0
            || self.hidden_dim == 0
            || !self.hidden_dim.is_multiple_of(self.num_heads)
        {
            return Err(Error::Config(format!(
                "hidden_dim {} must be a positive multiple of num_heads {}",
                self.hidden_dim, self.num_heads
            )));
        }
        if self.ffn_dim == 0 || self.max_positions == 0 {
            return Err(Error::Config(
                "ffn_dim and max_positions must be positive".into(),
            ));
        }
        for special in SPECIALS {
            let count = self.vocab.iter().filter(|w| *w == special).count();
            if count != 1 {
                return Err(Error::Config(format!(
                    "special token {special} must appear exactly once in the vocabulary, found {count}"
                )));
            }
        }
        let distinct: BTreeSet<&String> = self.vocab.iter().collect();
        if distinct.len() != self.vocab.len() {
            return Err(Error::Config(
                "vocabulary contains duplicate entries".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: EncoderConfig = serde_json::from_str(json)
            .map_err(|e| Error::Config(format!("encoder config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
