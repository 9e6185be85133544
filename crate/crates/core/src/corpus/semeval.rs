//! SemEval-2014 task 4 XML reader.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::tokenize::{tokenize_spanned, SpannedToken};
use super::{AspectSpan, Dataset, Polarity, Sample, Split};
use crate::error::{Error, Result};

/// Options for mapping character offsets onto tokens.
#[derive(Clone, Debug)]
pub struct AlignOptions {
    /// Snap aspects that start or end inside a token outward to the
    /// enclosing tokens (with a warning) instead of failing.
    pub lenient: bool,
    /// Language tag stored in every sample.
    pub language: String,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            lenient: false,
            language: "en".to_owned(),
        }
    }
}

struct RawAspect {
    index: usize,
    term: String,
    polarity: String,
    from: Option<usize>,
    to: Option<usize>,
}

#[derive(Default)]
struct RawSentence {
    id: String,
    text: String,
    aspects: Vec<RawAspect>,
}

/// Parse a SemEval-2014 task 4 XML document into one sample per aspect term.
///
/// Aspect terms with polarity `conflict` or term `NULL` are dropped. Both
/// `<aspectTerm term=..>` and `<Opinion target=..>` annotations are read.
pub fn parse_semeval_xml(
    raw: &[u8],
    name: &str,
    split: Split,
    opts: &AlignOptions,
) -> Result<Dataset> {
    let text = std::str::from_utf8(raw).map_err(|e| {
        let (line, column) = line_column(raw, e.valid_up_to());
        Error::Xml {
            line,
            column,
            message: format!("invalid UTF-8: {e}"),
        }
    })?;

    let mut reader = Reader::from_str(text);
    let mut dataset = Dataset::new(name, split);
    let mut current: Option<RawSentence> = None;
    let mut in_text = false;

    loop {
        let event = reader.read_event().map_err(|e| {
            let (line, column) = line_column(raw, reader.error_position() as usize);
            Error::Xml {
                line,
                column,
                message: e.to_string(),
            }
        })?;
        let position = reader.buffer_position() as usize;
        let xml_err = |message: String| {
            let (line, column) = line_column(raw, position);
            Error::Xml {
                line,
                column,
                message,
            }
        };

        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                match e.local_name().as_ref() {
                    "sentence" => {
                        let id = attribute(e, "id").map_err(&xml_err)?.unwrap_or_default();
                        current = Some(RawSentence {
                            id,
                            ..Default::default()
                        });
                    }
                    "text" if !is_empty => in_text = true,
                    "aspectTerm" | "Opinion" => {
                        let sentence = current
                            .as_mut()
                            .ok_or_else(|| xml_err("aspect outside of a sentence".to_owned()))?;
                        let term_attr = if e.local_name().as_ref() == "Opinion" {
                            "target"
                        } else {
                            "term"
                        };
                        let term = attribute(e, term_attr)
                            .map_err(&xml_err)?
                            .unwrap_or_default();
                        let polarity = attribute(e, "polarity")
                            .map_err(&xml_err)?
                            .unwrap_or_default();
                        let from = offset_attribute(e, "from").map_err(&xml_err)?;
                        let to = offset_attribute(e, "to").map_err(&xml_err)?;
                        let index = sentence.aspects.len();
                        sentence.aspects.push(RawAspect {
                            index,
                            term,
                            polarity,
                            from,
                            to,
                        });
                    }
                    _ => {}
                }
            }
            Event::Text(ref t) if in_text => {
                if let Some(s) = current.as_mut() {
                    s.text.push_str(&t.xml10_content());
                }
            }
            Event::CData(ref t) if in_text => {
                if let Some(s) = current.as_mut() {
                    s.text.push_str(t);
                }
            }
            Event::GeneralRef(ref r) if in_text => {
                let entity = format!("&{};", &**r);
                let resolved = quick_xml::escape::unescape(&entity)
                    .map_err(|e| xml_err(format!("unknown entity {entity}: {e}")))?;
                if let Some(s) = current.as_mut() {
                    s.text.push_str(&resolved);
                }
            }
            Event::End(ref e) => match e.local_name().as_ref() {
                "text" => in_text = false,
                "sentence" => {
                    if let Some(sentence) = current.take() {
                        convert_sentence(sentence, opts, &mut dataset.samples)?;
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    dataset.validate()?;
    Ok(dataset)
}

fn convert_sentence(
    sentence: RawSentence,
    opts: &AlignOptions,
    out: &mut Vec<Sample>,
) -> Result<()> {
    let tokens = tokenize_spanned(&sentence.text);
    let chars: Vec<char> = sentence.text.chars().collect();
    for aspect in sentence.aspects {
        if aspect.polarity == "conflict" || aspect.term == "NULL" {
            continue;
        }
        let polarity: Polarity = aspect.polarity.parse().map_err(|_| Error::Format {
            context: format!("sentence {}", sentence.id),
            message: format!(
                "unknown polarity {:?} for aspect {:?}",
                aspect.polarity, aspect.term
            ),
        })?;
        let (from, to) = match (aspect.from, aspect.to) {
            (Some(f), Some(t)) => (f, t),
            _ => {
                return Err(Error::Alignment {
                    sentence_id: sentence.id.clone(),
                    message: format!("aspect {:?} lacks from/to offsets", aspect.term),
                })
            }
        };
        let span = align(
            &sentence.id,
            &chars,
            &tokens,
            from,
            to,
            &aspect.term,
            opts.lenient,
        )?;
        out.push(Sample {
            id: format!("{}#{}", sentence.id, aspect.index),
            tokens: tokens.iter().map(|t| t.text.clone()).collect(),
            aspect: span,
            polarity,
            language: opts.language.clone(),
        });
    }
    Ok(())
}

/// Map a character span onto the token span that covers it.
pub(crate) fn align(
    sentence_id: &str,
    chars: &[char],
    tokens: &[SpannedToken],
    from: usize,
    to: usize,
    term: &str,
    lenient: bool,
) -> Result<AspectSpan> {
    let fail = |message: String| Error::Alignment {
        sentence_id: sentence_id.to_owned(),
        message,
    };
    if from >= to || to > chars.len() {
        return Err(fail(format!(
            "offsets {from}..{to} of {term:?} invalid for a text of {} characters",
            chars.len()
        )));
    }

    // Annotations occasionally include surrounding blanks.
    let (mut from, mut to) = (from, to);
    while from < to && chars[from].is_whitespace() {
        from += 1;
    }
    while to > from && chars[to - 1].is_whitespace() {
        to -= 1;
    }

    let start = tokens.iter().position(|t| t.end > from && t.start < to);
    let end = tokens.iter().rposition(|t| t.end > from && t.start < to);
    let (start, end) = match (start, end) {
        (Some(s), Some(e)) => (s, e + 1),
        _ => return Err(fail(format!("no token overlaps {term:?} at {from}..{to}"))),
    };

    if tokens[start].start != from || tokens[end - 1].end != to {
        let message = format!(
            "aspect {term:?} at {from}..{to} splits a token (enclosing tokens span {}..{})",
            tokens[start].start,
            tokens[end - 1].end
        );
        if !lenient {
            return Err(fail(message));
        }
        log::warn!("sentence {sentence_id}: {message}; snapped outward");
    }
    Ok(AspectSpan::new(start, end))
}

fn attribute(e: &BytesStart<'_>, key: &str) -> std::result::Result<Option<String>, String> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| err.to_string())?;
        if attr.key.local_name().as_ref() == key {
            let value = attr
                .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                .map_err(|err| err.to_string())?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn offset_attribute(e: &BytesStart<'_>, key: &str) -> std::result::Result<Option<usize>, String> {
    match attribute(e, key)? {
        None => Ok(None),
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("attribute {key}={v:?} is not an offset")),
    }
}

fn line_column(raw: &[u8], offset: usize) -> (usize, usize) {
    let offset = offset.min(raw.len());
    let before = &raw[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = before
        .iter()
        .rposition(|&b| b == b'\n')
        .map_or(0, |p| p + 1);
    let column = String::from_utf8_lossy(&before[line_start..])
        .chars()
        .count()
        + 1;
    (line, column)
}
