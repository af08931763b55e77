//! Preprocessor-directive and comment removal.
//!
//! Stripping shortens the text, so every retained byte remembers its offset
//! in the original source. Spans reported by the lexer and parser are always
//! expressed against the original text.

use super::span::{LineIndex, Span};
use super::ParseError;

/// Raw submission text plus an identifier (path or submission id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub id: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        SourceUnit { id: id.into(), text: text.into() }
    }
}

/// Source with directives and comments removed.
#[derive(Debug, Clone)]
pub struct Stripped {
    pub id: String,
    pub text: String,
    /// `origin[i]` is the original offset of stripped byte `i`; one extra
    /// trailing entry maps the end of text.
    origin: Vec<u32>,
    lines: LineIndex,
}

impl Stripped {
    /// Span in the original text for the stripped byte range `lo..hi`.
    pub fn span(&self, lo: usize, hi: usize) -> Span {
        let olo = self.origin[lo.min(self.origin.len() - 1)];
        let ohi = if hi > lo {
            self.origin[(hi - 1).min(self.origin.len() - 1)] + 1
        } else {
            olo
        };
        self.lines.span(olo, ohi.max(olo))
    }

    pub fn line_index(&self) -> &LineIndex {
        &self.lines
    }
}

/// Removes `#` directive lines (with `\` continuations) and replaces every
/// comment by a single space.
pub fn strip_preprocessor(source: &SourceUnit) -> Result<Stripped, ParseError> {
    let src = source.text.as_str();
    let bytes = src.as_bytes();
    let lines = LineIndex::new(src);
    let mut text = String::with_capacity(src.len());
    let mut origin = Vec::with_capacity(src.len() + 1);

    let mut i = 0;
    let mut at_line_start = true;
    while i < bytes.len() {
        if at_line_start {
            let mut j = i;
            while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'#' {
                // Skip the directive and any continuation lines.
                while j < bytes.len() {
                    if bytes[j] == b'\n' {
                        let continued = j > 0 && bytes[j - 1] == b'\\';
                        j += 1;
                        if !continued {
                            break;
                        }
                    } else {
                        j += 1;
                    }
                }
                i = j;
                continue;
            }
            at_line_start = false;
        }

        match bytes[i] {
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                text.push(' ');
                origin.push(i as u32);
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let start = i;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(ParseError::UnterminatedComment {
                            span: lines.span(start as u32, start as u32 + 2),
                        });
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
                text.push(' ');
                origin.push(start as u32);
            }
            quote @ (b'"' | b'\'') => {
                // Copy literals verbatim so `//` inside strings survives.
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != quote && bytes[i] != b'\n' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == quote {
                    i += 1;
                }
                let end = i.min(bytes.len());
                text.push_str(&src[start..end]);
                origin.extend((start..end).map(|k| k as u32));
            }
            b'\n' => {
                text.push('\n');
                origin.push(i as u32);
                i += 1;
                at_line_start = true;
            }
            _ => {
                // Copy one UTF-8 scalar at a time.
                let ch = src[i..].chars().next().expect("in bounds");
                let n = ch.len_utf8();
                text.push(ch);
                origin.extend((i..i + n).map(|k| k as u32));
                i += n;
            }
        }
    }
    origin.push(bytes.len() as u32);

    Ok(Stripped { id: source.id.clone(), text, origin, lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(s: &str) -> Result<Stripped, ParseError> {
        strip_preprocessor(&SourceUnit::new("t", s))
    }

    #[test]
    fn removes_directives() {
        let out = strip("#include <stdio.h>\nint main(){}").unwrap();
        assert_eq!(out.text, "int main(){}");
        // `int` still reports line 2 of the original.
        let span = out.span(0, 3);
        assert_eq!((span.line, span.col), (2, 1));
    }

    #[test]
    fn erases_line_comment() {
        assert_eq!(strip("int x; // note").unwrap().text, "int x;  ");
        assert_eq!(strip("int x; // note\n").unwrap().text, "int x;  \n");
    }

    #[test]
    fn erases_block_comment_across_lines() {
        let out = strip("int /* a\n b */ x;").unwrap();
        assert_eq!(out.text, "int   x;");
        let x = out.text.find('x').unwrap();
        assert_eq!(out.span(x, x + 1).line, 2);
    }

    #[test]
    fn unterminated_comment_reports_opening() {
        match strip("/* a") {
            Err(ParseError::UnterminatedComment { span }) => {
                assert_eq!((span.line, span.col), (1, 1))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comment_markers_inside_strings_are_kept() {
        let out = strip("printf(\"a // b /* c\");").unwrap();
        assert_eq!(out.text, "printf(\"a // b /* c\");");
    }

    #[test]
    fn directive_continuations() {
        let out = strip("#define X \\\n  1\nint y;").unwrap();
        assert_eq!(out.text, "int y;");
    }
}
