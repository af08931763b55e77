use super::span::Span;
use super::strip::Stripped;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Int(String),
    Float(String),
    Char(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Tok {
    pub kind: TokKind,
    pub span: Span,
}

impl Tok {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokKind::Ident(s) | TokKind::Int(s) | TokKind::Float(s) => format!("`{s}`"),
            TokKind::Char(s) | TokKind::Str(s) => s.clone(),
            TokKind::Punct(p) => format!("`{p}`"),
            TokKind::Eof => "end of input".to_string(),
        }
    }
}

// Longest first.
const PUNCTS: &[&str] = &[
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "(", ")", "{", "}", "[", "]", ";", ",", "=", "+",
    "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "?", ":", ".",
];

pub fn tokenize(src: &Stripped) -> Result<Vec<Tok>, ParseError> {
    let text = src.text.as_str();
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;

    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokKind::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            lex_number(text, &mut i)
        } else if c == b'"' || c == b'\'' {
            i += 1;
            while i < bytes.len() && bytes[i] != c && bytes[i] != b'\n' {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != c {
                let what = if c == b'"' { "string" } else { "character" };
                return Err(ParseError::Syntax {
                    span: src.span(start, start + 1),
                    expected: format!("closing quote of {what} literal"),
                    found: "end of line".into(),
                });
            }
            i += 1;
            let lit = text[start..i].to_string();
            if c == b'"' {
                TokKind::Str(lit)
            } else {
                TokKind::Char(lit)
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| text[i..].starts_with(**p)) {
            i += p.len();
            TokKind::Punct(p)
        } else {
            let ch = text[i..].chars().next().expect("in bounds");
            return Err(ParseError::Syntax {
                span: src.span(start, start + ch.len_utf8()),
                expected: "a token".into(),
                found: format!("`{ch}`"),
            });
        };
        toks.push(Tok { kind, span: src.span(start, i) });
    }
    let end = src.span(bytes.len(), bytes.len());
    toks.push(Tok { kind: TokKind::Eof, span: end });
    Ok(toks)
}

fn lex_number(text: &str, i: &mut usize) -> TokKind {
    let bytes = text.as_bytes();
    let start = *i;
    let mut float = false;
    if bytes[*i] == b'0' && matches!(bytes.get(*i + 1), Some(b'x' | b'X')) {
        *i += 2;
        while *i < bytes.len() && bytes[*i].is_ascii_hexdigit() {
            *i += 1;
        }
    } else {
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        if *i < bytes.len() && bytes[*i] == b'.' {
            float = true;
            *i += 1;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
        }
        if *i < bytes.len() && matches!(bytes[*i], b'e' | b'E') {
            let mut j = *i + 1;
            if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                float = true;
                *i = j;
                while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                    *i += 1;
                }
            }
        }
    }
    // Suffixes (u, l, f).
    while *i < bytes.len() && matches!(bytes[*i], b'u' | b'U' | b'l' | b'L' | b'f' | b'F') {
        if matches!(bytes[*i], b'f' | b'F') {
            float = true;
        }
        *i += 1;
    }
    let lit = text[start..*i].to_string();
    if float {
        TokKind::Float(lit)
    } else {
        TokKind::Int(lit)
    }
}
