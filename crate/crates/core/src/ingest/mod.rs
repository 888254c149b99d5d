//! Readers and writers for the two text formats: raw vessel graphs
//! (`.vess`) and binary component trees (`.dltree`).
//!
//! Both formats are line based, UTF-8, with `#` starting a comment line.
//! Numbers are plain decimals (optional leading `-`, digits, optional
//! fraction); exponents are not accepted.

mod dltree;
mod vess;

pub use dltree::{format_thickness, parse_dltree, serialize_dltree};
pub use vess::{parse_vess, serialize_vess};

use crate::error::{ParseError, ParseErrorKind};
use crate::tree::Region;

/// Whitespace-separated token with its 1-based column.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub column: usize,
}

pub(crate) fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut col = 0usize;
    let mut start_col = 0usize;
    for (i, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], column: start_col });
            }
        } else if start.is_none() {
            start = Some(i);
            start_col = col;
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], column: start_col });
    }
    out
}

pub(crate) fn is_skippable(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#')
}

pub(crate) fn syntax(line: usize, column: usize, msg: impl Into<String>) -> ParseError {
    ParseError::new(line, column, ParseErrorKind::Syntax(msg.into()))
}

/// Parses a plain decimal: `-?[0-9]+(\.[0-9]+)?`.
pub(crate) fn parse_decimal(text: &str) -> Option<f64> {
    let digits = text.strip_prefix('-').unwrap_or(text);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int) || frac.is_some_and(|f| !all_digits(f)) {
        return None;
    }
    text.parse().ok()
}

pub(crate) fn is_identifier(text: &str) -> bool {
    !text.is_empty()
        && text
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}

/// Parses `HEADER <subject_id> <B|L|R|F>` from a tokenized line.
pub(crate) fn parse_header(
    line_no: usize,
    tokens: &[Token<'_>],
) -> Result<(String, Region), ParseError> {
    match tokens {
        [kw, subject, region] if kw.text == "HEADER" => {
            if !is_identifier(subject.text) {
                return Err(syntax(line_no, subject.column, "invalid subject id"));
            }
            let region = region
                .text
                .parse::<Region>()
                .ok()
                .filter(|_| region.text.len() == 1)
                .ok_or_else(|| syntax(line_no, region.column, "region must be B, L, R or F"))?;
            Ok((subject.text.to_string(), region))
        }
        [kw, ..] if kw.text == "HEADER" => Err(syntax(
            line_no,
            kw.column,
            "HEADER takes exactly <subject_id> <region>",
        )),
        [first, ..] => Err(syntax(line_no, first.column, "expected HEADER record")),
        [] => Err(syntax(line_no, 0, "expected HEADER record")),
    }
}
