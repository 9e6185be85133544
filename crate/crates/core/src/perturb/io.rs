//! Matrix file format: JSON Lines, one object per sample,
//! `{"v":1,"id":str,"layer":int,"words":[str],"matrix":[[float,...],...]}`,
//! rows = affected tokens. Floats are written in shortest round-trip form,
//! which reproduces every `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ImpactMatrix;
use crate::error::{Error, Result};

pub const MATRIX_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct RecordRef<'a> {
    v: u32,
    id: &'a str,
    layer: usize,
    words: &'a [String],
    matrix: Vec<&'a [f64]>,
}

#[derive(Deserialize)]
struct Record {
    v: u32,
    id: String,
    layer: usize,
    words: Vec<String>,
    // `null` is what non-finite floats become in JSON.
    matrix: Vec<Vec<Option<f64>>>,
}

#[derive(Deserialize)]
struct VersionProbe {
    v: u32,
}

/// Single-writer, append-ordered matrix stream.
pub struct MatrixWriter<W: Write> {
    out: W,
}

impl<W: Write> MatrixWriter<W> {
    pub fn new(out: W) -> Self {
        MatrixWriter { out }
    }

    /// Validates and appends one matrix.
    pub fn write(&mut self, m: &ImpactMatrix) -> Result<()> {
        m.validate()?;
        let standard = m.values.as_standard_layout();
        let rows: Vec<&[f64]> = standard
            .as_slice()
            .expect("standard layout")
            .chunks(m.len().max(1))
            .take(m.len())
            .collect();
        let record = RecordRef {
            v: MATRIX_FORMAT_VERSION,
            id: &m.sample_id,
            layer: m.layer,
            words: &m.words,
            matrix: rows,
        };
        serde_json::to_writer(&mut self.out, &record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Lazily decodes a matrix stream, one line at a time.
pub struct MatrixReader<R> {
    input: R,
    line: usize,
    buf: String,
    done: bool,
}

impl<R: BufRead> MatrixReader<R> {
    pub fn new(input: R) -> Self {
        MatrixReader {
            input,
            line: 0,
            buf: String::new(),
            done: false,
        }
    }

    fn decode(&self, text: &str, terminated: bool) -> Result<ImpactMatrix> {
        let err = |message: String| Error::MatrixFile {
            line: self.line,
            message,
        };
        let record: Record = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => {
                if let Ok(probe) = serde_json::from_str::<VersionProbe>(text) {
                    if probe.v != MATRIX_FORMAT_VERSION {
                        return Err(err(format!(
                            "format version {} unsupported (expected {MATRIX_FORMAT_VERSION})",
                            probe.v
                        )));
                    }
                }
                if !terminated || e.is_eof() {
                    return Err(err(format!("truncated record: {e}")));
                }
                return Err(err(format!("malformed record: {e}")));
            }
        };
        if record.v != MATRIX_FORMAT_VERSION {
            return Err(err(format!(
                "format version {} unsupported (expected {MATRIX_FORMAT_VERSION})",
                record.v
            )));
        }
        let n = record.words.len();
        if record.matrix.len() != n || record.matrix.iter().any(|row| row.len() != n) {
            return Err(err(format!("matrix is not {n}x{n}")));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in record.matrix.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                match v {
                    Some(v) => flat.push(v),
                    None => return Err(err(format!("NaN or non-numeric entry at ({i},{j})"))),
                }
            }
        }
        let m = ImpactMatrix {
            sample_id: record.id,
            layer: record.layer,
            words: record.words,
            values: Array2::from_shape_vec((n, n), flat).expect("n*n entries"),
        };
        m.validate().map_err(|e| err(e.to_string()))?;
        Ok(m)
    }
}

impl<R: BufRead> Iterator for MatrixReader<R> {
    type Item = Result<ImpactMatrix>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line += 1;
                    let terminated = self.buf.ends_with('\n');
                    let text = self.buf.trim();
                    if text.is_empty() {
                        continue;
                    }
                    let result = self.decode(text, terminated);
                    if result.is_err() {
                        self.done = true;
                    }
                    return Some(result);
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
        }
        None
    }
}

/// Writes all matrices to `path`, returning how many were written.
pub fn write_matrices<'a, I>(path: impl AsRef<Path>, matrices: I) -> Result<usize>
where
    I: IntoIterator<Item = &'a ImpactMatrix>,
{
    let mut writer = MatrixWriter::new(BufWriter::new(File::create(path)?));
    let mut count = 0;
    for m in matrices {
        writer.write(m)?;
        count += 1;
    }
    writer.finish()?;
    Ok(count)
}

pub fn read_matrices(path: impl AsRef<Path>) -> Result<MatrixReader<BufReader<File>>> {
    Ok(MatrixReader::new(BufReader::new(File::open(path)?)))
}
