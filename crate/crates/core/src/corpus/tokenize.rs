//! Whitespace tokenization with punctuation detaching.
//!
//! Text is split on whitespace; leading and trailing punctuation characters
//! of every chunk become single-character tokens of their own. Inner
//! punctuation (`don't`, `e-mail`, `3.5`) stays attached. Offsets are
//! counted in Unicode scalar values, which is how SemEval annotations count.

/// A token together with its character span `[start, end)` in the source.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct SpannedToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

const EXTRA_PUNCTUATION: &[char] = &[
    '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}', '\u{2013}', '\u{2014}', '\u{2026}', '\u{00AB}',
    '\u{00BB}', '\u{00A1}', '\u{00BF}',
];

pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || EXTRA_PUNCTUATION.contains(&c)
}

/// Tokenize `text`, keeping character offsets.
pub fn tokenize_spanned(text: &str) -> Vec<SpannedToken> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars, start, i, &mut tokens);
    }
    tokens
}

/// Tokenize `text`, returning only the token strings.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spanned(text).into_iter().map(|t| t.text).collect()
}

fn split_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<SpannedToken>) {
    let mut core_start = start;
    while core_start < end && is_punctuation(chars[core_start]) {
        core_start += 1;
    }
    let mut core_end = end;
    while core_end > core_start && is_punctuation(chars[core_end - 1]) {
        core_end -= 1;
    }

    let single = |pos: usize| SpannedToken {
        text: chars[pos].to_string(),
        start: pos,
        end: pos + 1,
    };

    out.extend((start..core_start).map(single));
    if core_start < core_end {
        out.push(SpannedToken {
            text: chars[core_start..core_end].iter().collect(),
            start: core_start,
            end: core_end,
        });
    }
    out.extend((core_end..end).map(single));
}
