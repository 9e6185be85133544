//! Pipeline run configuration.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::decode::{DecodeOptions, Decoder, TreeSource};
use crate::error::{Error, Result};
use crate::perturb::DEFAULT_LAYER;

/// Where induced-tree matrices come from.
#[derive(Clone, Copy, Debug, Default, Deserialize, Eq, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderChoice {
    /// Built-in seeded encoder.
    #[default]
    Toy,
    /// Precomputed matrix files.
    MatrixFile,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct RunConfig {
    pub datasets: Vec<PathBuf>,
    pub sources: Vec<TreeSource>,
    pub provider: ProviderChoice,
    pub layer: usize,
    pub decode: DecodeOptions,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            datasets: Vec::new(),
            sources: vec![TreeSource::Induced],
            provider: ProviderChoice::Toy,
            layer: DEFAULT_LAYER,
            decode: DecodeOptions::default(),
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Config("at least one tree source is required".into()));
        }
        let distinct: BTreeSet<_> = self.sources.iter().collect();
        if distinct.len() != self.sources.len() {
            return Err(Error::Config("tree sources listed more than once".into()));
        }
        if self.decode.decoder == Decoder::Eisner && self.decode.root.is_some() {
            return Err(Error::Config("--root requires the cle decoder".into()));
        }
        Ok(())
    }

    /// Canonical JSON used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
