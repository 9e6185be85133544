//! CoNLL-U import and export of dependency trees.
//!
//! Export writes all ten columns: ID, FORM, HEAD and DEPREL are filled,
//! the rest are `_`. Induced and chain trees carry the relation `dep`
//! (`root` for the root word). A `# sent_id` and a `# source` comment
//! precede every sentence.

use std::io::Write;

use super::tree::{validate_heads, DepTree, TreeSource};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ConlluSentence {
    pub id: Option<String>,
    pub tokens: Vec<String>,
    pub tree: DepTree,
}

/// Write sentences and return the byte offset at which each one starts.
pub fn write_conllu<'a, W, I>(mut out: W, sentences: I) -> Result<Vec<u64>>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a [String], &'a DepTree)>,
{
    let mut offsets = Vec::new();
    let mut written = 0u64;
    for (id, tokens, tree) in sentences {
        if tokens.len() != tree.len() {
            return Err(Error::LengthMismatch(format!(
                "sentence {id}: {} tokens but {} tree nodes",
                tokens.len(),
                tree.len()
            )));
        }
        offsets.push(written);
        let mut block = format!("# sent_id = {id}\n# source = {}\n", tree.source());
        for (i, token) in tokens.iter().enumerate() {
            let head = tree.head(i).map_or(0, |h| h + 1);
            let rel = match tree.relations() {
                Some(rels) => rels[i].as_str(),
                None if tree.head(i).is_none() => "root",
                None => "dep",
            };
            block.push_str(&format!(
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_\n",
                i + 1,
                token,
                head,
                rel
            ));
        }
        block.push('\n');
        out.write_all(block.as_bytes())?;
        written += block.len() as u64;
    }
    Ok(offsets)
}

struct Pending {
    id: Option<String>,
    source: Option<TreeSource>,
    tokens: Vec<String>,
    heads: Vec<Option<usize>>,
    relations: Vec<String>,
    raw_heads: Vec<usize>,
}

impl Pending {
    fn new() -> Self {
        Pending {
            id: None,
            source: None,
            tokens: Vec::new(),
            heads: Vec::new(),
            relations: Vec::new(),
            raw_heads: Vec::new(),
        }
    }

    fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn finish(self, index: usize) -> Result<ConlluSentence> {
        let name = self.id.clone().unwrap_or_else(|| format!("#{index}"));
        let n = self.tokens.len();
        let mut heads = self.heads;
        for (d, &raw) in self.raw_heads.iter().enumerate() {
            if raw > n {
                return Err(Error::format(
                    format!("CoNLL-U sentence {name}"),
                    format!("HEAD {raw} of token {} exceeds sentence length {n}", d + 1),
                ));
            }
            heads[d] = raw.checked_sub(1);
        }
        validate_heads(&heads)
            .map_err(|reason| Error::format(format!("CoNLL-U sentence {name}"), reason))?;
        let tree = DepTree::new(heads, self.source.unwrap_or(TreeSource::DepParser))?
            .with_relations(self.relations)?;
        Ok(ConlluSentence {
            id: self.id,
            tokens: self.tokens,
            tree,
        })
    }
}

/// Parse CoNLL-U text. Multiword-token ranges (`3-4`) and empty nodes
/// (`5.1`) are skipped. `HEAD = 0` marks the root.
pub fn import_conllu(text: &str) -> Result<Vec<ConlluSentence>> {
    let mut out = Vec::new();
    let mut pending = Pending::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        let ctx = || format!("CoNLL-U line {}", lineno + 1);
        if line.trim().is_empty() {
            if !pending.is_empty() {
                let done = std::mem::replace(&mut pending, Pending::new());
                out.push(done.finish(out.len())?);
            } else {
                pending = Pending::new();
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => pending.id = Some(value.trim().to_owned()),
                    "source" => pending.source = value.trim().parse().ok(),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::format(
                ctx(),
                format!("expected 10 columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| Error::format(ctx(), format!("bad ID {:?}", cols[0])))?;
        if id != pending.tokens.len() + 1 {
            return Err(Error::format(
                ctx(),
                format!(
                    "ID {id} out of sequence (expected {})",
                    pending.tokens.len() + 1
                ),
            ));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::format(ctx(), format!("bad HEAD {:?}", cols[6])))?;
        pending.tokens.push(cols[1].to_owned());
        pending.raw_heads.push(head);
        pending.heads.push(None);
        pending.relations.push(cols[7].to_owned());
    }
    if !pending.is_empty() {
        out.push(pending.finish(out.len())?);
    }
    Ok(out)
}
