//! Parser for the introductory C subset accepted by the engine.
//!
//! Covers scalar and array declarations of the arithmetic types, pointer
//! declarators, the usual operators, `if`/`else`, the three loop forms,
//! `break`/`continue`/`return`, and function definitions and calls.
//! `switch`, `goto`, aggregates, `typedef` and varargs are rejected with an
//! [`ParseError::UnsupportedConstruct`] pointing at the offending token.

mod ast;
mod dump;
mod lexer;
mod parser;
mod span;
mod strip;

use thiserror::Error;

pub use ast::*;
pub use dump::{dump, pretty_print};
#[cfg(test)]
pub(crate) use dump::expr_src;
pub use span::{LineIndex, Span};
pub use strip::{strip_preprocessor, SourceUnit, Stripped};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: unterminated comment")]
    UnterminatedComment { span: Span },
    #[error("{span}: unsupported construct `{name}`")]
    UnsupportedConstruct { span: Span, name: String },
    #[error("{span}: expected {expected}, found {found}")]
    Syntax { span: Span, expected: String, found: String },
    #[error("source is empty after preprocessing")]
    Empty,
}

impl ParseError {
    pub fn span(&self) -> Option<Span> {
        match self {
            ParseError::UnterminatedComment { span }
            | ParseError::UnsupportedConstruct { span, .. }
            | ParseError::Syntax { span, .. } => Some(*span),
            ParseError::Empty => None,
        }
    }
}

/// Parses already-stripped source.
pub fn parse_stripped(src: &Stripped) -> Result<Ast, ParseError> {
    if src.text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lexer::tokenize(src)?;
    parser::Parser::new(toks).translation_unit()
}

/// Strips directives and comments, then parses.
pub fn parse(source: &SourceUnit) -> Result<Ast, ParseError> {
    parse_stripped(&strip_preprocessor(source)?)
}

/// Convenience wrapper for in-memory text.
pub fn parse_str(text: &str) -> Result<Ast, ParseError> {
    parse(&SourceUnit::new("<input>", text))
}
