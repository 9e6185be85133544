//! Perturbed Masking impact matrices.
//!
//! For a sentence `x` and a layer `l`, the impact of token `j` on token `i`
//! is the Euclidean distance between the layer-`l` representation of `i`
//! with `i` masked and the representation of `i` with both `i` and `j`
//! masked. The matrix holds these values with row = affected token `i` and
//! column = perturbing token `j`.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};

mod io;
pub use self::io::{
    read_matrices, write_matrices, MatrixReader, MatrixWriter, MATRIX_FORMAT_VERSION,
};

mod subword;
pub use self::subword::{
    aggregate_subwords, read_alignments, write_alignments, Aggregation, SubwordAlignment,
};

/// Layer used when none is requested: representations after the 11th
/// transformer layer, counting `h^0` (the embeddings) as layer 0.
pub const DEFAULT_LAYER: usize = 11;

/// Source of contextual representations for (partially masked) sentences.
pub trait RepresentationProvider: Sync {
    /// Highest valid layer index; layer 0 is the embedding layer.
    fn depth(&self) -> usize;

    /// Layer-`layer` representations (`T x d`) of `tokens` with the
    /// positions in `masked` replaced by the mask token.
    fn provide(&self, tokens: &[String], masked: &[usize], layer: usize) -> Result<Array2<f64>>;
}

impl<P: RepresentationProvider + ?Sized> RepresentationProvider for &P {
    fn depth(&self) -> usize {
        (**self).depth()
    }

    fn provide(&self, tokens: &[String], masked: &[usize], layer: usize) -> Result<Array2<f64>> {
        (**self).provide(tokens, masked, layer)
    }
}

/// Word-level impact matrix of one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpactMatrix {
    pub sample_id: String,
    pub layer: usize,
    pub words: Vec<String>,
    /// `values[[i, j]]`: impact of word `j` on word `i`.
    pub values: Array2<f64>,
}

impl ImpactMatrix {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Checks shape, finiteness, non-negativity and the zero diagonal.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::InvalidMatrix {
            id: self.sample_id.clone(),
            message,
        };
        let n = self.words.len();
        if self.values.dim() != (n, n) {
            return Err(fail(format!(
                "shape {:?} does not match {n} words",
                self.values.dim()
            )));
        }
        for ((i, j), &v) in self.values.indexed_iter() {
            if !v.is_finite() {
                return Err(fail(format!("non-finite entry at ({i},{j})")));
            }
            if v < 0.0 {
                return Err(fail(format!("negative entry {v} at ({i},{j})")));
            }
            if i == j && v != 0.0 {
                return Err(fail(format!("non-zero diagonal entry {v} at ({i},{i})")));
            }
        }
        Ok(())
    }

    /// `(M + M^T) / 2`, elementwise.
    pub fn symmetrized(&self) -> ImpactMatrix {
        let values = (&self.values + &self.values.t()) / 2.0;
        ImpactMatrix {
            values,
            ..self.clone()
        }
    }
}

fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_layer<P: RepresentationProvider + ?Sized>(provider: &P, layer: usize) -> Result<()> {
    if layer > provider.depth() {
        return Err(Error::LayerOutOfRange {
            layer,
            depth: provider.depth(),
        });
    }
    Ok(())
}

fn provide_row<P: RepresentationProvider + ?Sized>(
    provider: &P,
    tokens: &[String],
    masked: &[usize],
    row: usize,
    layer: usize,
) -> Result<ndarray::Array1<f64>> {
    let reps = provider
        .provide(tokens, masked, layer)
        .map_err(|source| Error::Provider {
            context: format!("sentence {:?}", tokens.join(" ")),
            masked: masked.to_vec(),
            source: Box::new(source),
        })?;
    if reps.nrows() != tokens.len() {
        return Err(Error::LengthMismatch(format!(
            "provider returned {} rows for {} tokens",
            reps.nrows(),
            tokens.len()
        )));
    }
    Ok(reps.row(row).to_owned())
}

/// Impact of token `j` on token `i` at `layer`.
pub fn impact<P: RepresentationProvider + ?Sized>(
    provider: &P,
    tokens: &[String],
    i: usize,
    j: usize,
    layer: usize,
) -> Result<f64> {
    for index in [i, j] {
        if index >= tokens.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: tokens.len(),
            });
        }
    }
    check_layer(provider, layer)?;
    let single = provide_row(provider, tokens, &[i], i, layer)?;
    let double = provide_row(provider, tokens, &[i, j], i, layer)?;
    Ok(euclidean(single.view(), double.view()))
}

/// Full impact matrix. The single-masked representation of each row is
/// computed once, so a sentence of `T` tokens costs `T^2` provider calls.
/// Rows are computed in parallel on the current rayon pool.
pub fn impact_matrix<P: RepresentationProvider + ?Sized>(
    provider: &P,
    sample_id: &str,
    tokens: &[String],
    layer: usize,
) -> Result<ImpactMatrix> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput(format!(
            "sample {sample_id} has no tokens"
        )));
    }
    check_layer(provider, layer)?;
    let n = tokens.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let single = provide_row(provider, tokens, &[i], i, layer)?;
            (0..n)
                .map(|j| {
                    if j == i {
                        return Ok(0.0);
                    }
                    let double = provide_row(provider, tokens, &[i, j], i, layer)?;
                    Ok(euclidean(single.view(), double.view()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let values = Array2::from_shape_vec((n, n), rows.concat()).expect("n*n entries");
    Ok(ImpactMatrix {
        sample_id: sample_id.to_owned(),
        layer,
        words: tokens.to_vec(),
        values,
    })
}

/// Anything that can hand out the impact matrix of a sentence.
pub trait ImpactSource: Sync {
    fn matrix_for(&self, sample_id: &str, words: &[String]) -> Result<ImpactMatrix>;
}

/// Computes matrices on demand from a representation provider.
pub struct PerturbedMasking<P> {
    pub provider: P,
    pub layer: usize,
}

impl<P: RepresentationProvider> ImpactSource for PerturbedMasking<P> {
    fn matrix_for(&self, sample_id: &str, words: &[String]) -> Result<ImpactMatrix> {
        impact_matrix(&self.provider, sample_id, words, self.layer)
    }
}

/// Serves matrices read from a matrix file, e.g. ones dumped from a
/// pre-trained model.
#[derive(Debug, Default)]
pub struct MatrixFileSource {
    matrices: HashMap<String, ImpactMatrix>,
}

impl MatrixFileSource {
    pub fn new<I: IntoIterator<Item = ImpactMatrix>>(matrices: I) -> Self {
        MatrixFileSource {
            matrices: matrices
                .into_iter()
                .map(|m| (m.sample_id.clone(), m))
                .collect(),
        }
    }

    pub fn open(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(MatrixFileSource::new(
            read_matrices(path)?.collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

impl ImpactSource for MatrixFileSource {
    fn matrix_for(&self, sample_id: &str, words: &[String]) -> Result<ImpactMatrix> {
        let m = self.matrices.get(sample_id).ok_or_else(|| {
            Error::format("matrix file", format!("no matrix for sample {sample_id}"))
        })?;
        if m.words != words {
            return Err(Error::LengthMismatch(format!(
                "matrix words for {sample_id} do not match the sample tokens"
            )));
        }
        Ok(m.clone())
    }
}
