//! Dependency tree induction from token-impact matrices.
//!
//! The crate covers the whole analysis path for tree-based aspect-level
//! sentiment classification studies:
//!
//! * [`corpus`]: ABSA dataset ingestion (SemEval-2014 XML, the three-line
//!   Twitter format, canonical JSON Lines) and split statistics.
//! * [`encoder`]: a small seeded transformer encoder used as the built-in
//!   representation provider.
//! * [`perturb`]: Perturbed Masking impact matrices, subword aggregation and
//!   the matrix file format.
//! * [`decode`]: Chu-Liu/Edmonds and Eisner decoding, chain baselines and
//!   CoNLL-U import/export.
//! * [`treefeat`]: adjacency, proximity and aspect-oriented reshaping of trees.
//! * [`metrics`]: neighboring-connection proportion, aspect-sentiment
//!   distances and attachment agreement.

pub mod config;
pub mod corpus;
pub mod decode;
pub mod encoder;
mod error;
pub mod metrics;
pub mod perturb;
pub mod treefeat;

pub use crate::corpus::{Dataset, Polarity, Sample, Split};
pub use crate::decode::{DepTree, Direction, TreeSource};
pub use crate::encoder::{Encoder, EncoderConfig};
pub use crate::error::{Error, ErrorKind, Result};
pub use crate::metrics::{MetricsReport, SentimentLexicon};
pub use crate::perturb::{ImpactMatrix, RepresentationProvider, SubwordAlignment};
