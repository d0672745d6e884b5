//! Shared helpers for the line-oriented text formats.

use std::str::FromStr;

use crate::error::{Error, Result};

/// A non-blank, non-comment line with its 1-based line number.
pub(crate) struct Line<'a> {
    pub number: usize,
    pub text: &'a str,
}

impl<'a> Line<'a> {
    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            line: self.number,
            msg: msg.into(),
        }
    }

    pub fn tokens(&self) -> std::str::SplitWhitespace<'a> {
        self.text.split_whitespace()
    }

    /// Splits `keyword rest...`, failing unless the keyword matches.
    pub fn keyword(&self, keyword: &str) -> Result<std::str::SplitWhitespace<'a>> {
        let mut toks = self.tokens();
        match toks.next() {
            Some(k) if k == keyword => Ok(toks),
            _ => Err(self.err(format!("expected `{keyword}`"))),
        }
    }

    pub fn parse_all<T: FromStr>(&self, toks: std::str::SplitWhitespace<'_>) -> Result<Vec<T>> {
        toks.map(|t| self.parse_one(t)).collect()
    }

    pub fn parse_one<T: FromStr>(&self, tok: &str) -> Result<T> {
        tok.parse()
            .map_err(|_| self.err(format!("cannot parse `{tok}`")))
    }
}

/// Strips comments and blank lines. A comment starts at `#` and runs to end of line.
pub(crate) fn lines(input: &str) -> impl Iterator<Item = Line<'_>> {
    input.lines().enumerate().filter_map(|(i, raw)| {
        let text = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        (!text.is_empty()).then_some(Line {
            number: i + 1,
            text,
        })
    })
}

/// Consumes the header line and checks it.
pub(crate) fn expect_header<'a>(
    iter: &mut impl Iterator<Item = Line<'a>>,
    header: &str,
) -> Result<()> {
    match iter.next() {
        Some(line) if line.text.split_whitespace().eq(header.split_whitespace()) => Ok(()),
        Some(line) => Err(line.err(format!("expected header `{header}`"))),
        None => Err(Error::Format {
            line: 0,
            msg: format!("empty input, expected header `{header}`"),
        }),
    }
}
