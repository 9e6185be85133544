//! Three-lines-per-sample Twitter format: the sentence with a `$T$`
//! placeholder, the aspect string, and a polarity in {-1, 0, 1}.

use super::tokenize::tokenize;
use super::{AspectSpan, Dataset, Polarity, Sample, Split};
use crate::error::{Error, Result};

const PLACEHOLDER: &str = "$T$";

pub fn parse_twitter(raw: &str, name: &str, split: Split) -> Result<Dataset> {
    let mut lines: Vec<&str> = raw.lines().map(|l| l.trim_end_matches('\r')).collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if !lines.len().is_multiple_of(3) {
        return Err(Error::Format {
            context: format!("{name} sample {}", lines.len() / 3),
            message: format!(
                "{} dangling line(s) after the last complete sample",
                lines.len() % 3
            ),
        });
    }

    let mut dataset = Dataset::new(name, split);
    for (index, chunk) in lines.chunks(3).enumerate() {
        let ctx = || format!("{name} sample {index}");
        let (sentence, aspect, label) = (chunk[0], chunk[1].trim(), chunk[2].trim());
        let polarity = match label {
            "-1" => Polarity::Negative,
            "0" => Polarity::Neutral,
            "1" => Polarity::Positive,
            other => {
                return Err(Error::format(
                    ctx(),
                    format!("unknown polarity value {other:?}"),
                ))
            }
        };
        let (left, right) = sentence
            .split_once(PLACEHOLDER)
            .ok_or_else(|| Error::format(ctx(), "sentence lacks the $T$ placeholder"))?;

        let mut tokens = tokenize(left);
        let aspect_tokens = tokenize(aspect);
        if aspect_tokens.is_empty() {
            return Err(Error::format(ctx(), "empty aspect"));
        }
        let start = tokens.len();
        tokens.extend(aspect_tokens);
        let end = tokens.len();
        tokens.extend(tokenize(&right.replace(PLACEHOLDER, aspect)));

        dataset.samples.push(Sample {
            id: format!("{name}-{split}-{index}"),
            tokens,
            aspect: AspectSpan::new(start, end),
            polarity,
            language: "en".to_owned(),
        });
    }
    dataset.validate()?;
    Ok(dataset)
}
