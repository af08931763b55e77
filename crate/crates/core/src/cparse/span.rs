use std::fmt;

use serde::{Deserialize, Serialize};

/// A region of the original (unstripped) source text.
///
/// Offsets are byte offsets; lines and columns are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub lo: u32,
    pub hi: u32,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    /// Smallest span covering both `self` and `other`.
    pub fn to(self, other: Span) -> Span {
        let (first, last) = if self.lo <= other.lo { (self, other) } else { (other, self) };
        let end = if self.hi >= other.hi { self } else { other };
        Span {
            lo: first.lo,
            hi: end.hi.max(last.hi),
            line: first.line,
            col: first.col,
            end_line: end.end_line,
            end_col: end.end_col,
        }
    }

    /// The empty span at the end of `self`.
    pub fn end(self) -> Span {
        Span {
            lo: self.hi,
            hi: self.hi,
            line: self.end_line,
            col: self.end_col,
            end_line: self.end_line,
            end_col: self.end_col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Maps byte offsets of a text to line/column positions.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<u32>,
    len: u32,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(
            text.bytes()
                .enumerate()
                .filter(|(_, b)| *b == b'\n')
                .map(|(i, _)| i as u32 + 1),
        );
        LineIndex { starts, len: text.len() as u32 }
    }

    pub fn position(&self, offset: u32) -> (u32, u32) {
        let offset = offset.min(self.len);
        let line = match self.starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (line as u32 + 1, offset - self.starts[line] + 1)
    }

    pub fn span(&self, lo: u32, hi: u32) -> Span {
        let (line, col) = self.position(lo);
        let (end_line, end_col) = self.position(hi);
        Span { lo, hi, line, col, end_line, end_col }
    }
}
