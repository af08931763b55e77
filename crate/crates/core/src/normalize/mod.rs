//! Canonical linear representation of a parsed program.
//!
//! Each function becomes a flat token list (`FUNC`, `DECL`, `E:`, `IF`,
//! `ELSE`, `LOOP`, `RETURN`, block markers). Loops are lowered to a single
//! loop form, increments and compound assignments to plain assignments,
//! expressions to postfix with variables renamed by first use inside each
//! expression, and functions are ordered by a depth-first walk of calls from
//! `main`.
//!
//! The textual form produced by [`LinearProgram::to_text`] is the persisted
//! representation and must stay byte-stable.

mod constructs;
mod linearize;
mod order;
mod postfix;
mod token;

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constructs::normalize_constructs;
pub use linearize::linearize_stmt;
pub use order::{call_order, CallOrder};
pub use postfix::{rename_vars, to_postfix};
pub use token::{LinearToken, NormalizedExpr, PostfixAtom};

use crate::cparse::{self, Ast, FunctionDef, ParseError, SourceUnit, Span};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearFunction {
    pub name: String,
    pub tokens: Vec<LinearToken>,
    /// Source span per token; default spans when loaded from text.
    #[serde(skip)]
    pub spans: Vec<Span>,
}

/// Token equality; names and spans are not structural.
impl PartialEq for LinearFunction {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

impl LinearFunction {
    pub fn arity(&self) -> u32 {
        match self.tokens.first() {
            Some(LinearToken::FuncHeader { arity }) => *arity,
            _ => 0,
        }
    }

    pub fn span(&self, index: usize) -> Span {
        self.spans.get(index).copied().unwrap_or_default()
    }

    /// Running open-minus-close count never drops below zero and ends at zero.
    pub fn is_block_balanced(&self) -> bool {
        let mut depth = 0i64;
        for t in &self.tokens {
            match t {
                LinearToken::BlockOpen => depth += 1,
                LinearToken::BlockClose => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                _ => {}
            }
        }
        depth == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    /// In first-use order; the root comes first.
    pub functions: Vec<LinearFunction>,
    pub dropped: Vec<String>,
    pub no_main: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("line {line}: token outside of a function")]
    OrphanToken { line: usize },
    #[error("line {line}: malformed line `{text}`")]
    Malformed { line: usize, text: String },
}

impl LinearProgram {
    pub fn token_count(&self) -> usize {
        self.functions.iter().map(|f| f.tokens.len()).sum()
    }

    /// Canonical one-token-per-line text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.no_main {
            out.push_str("NO_MAIN\n");
        }
        for f in &self.functions {
            for t in &f.tokens {
                match t {
                    LinearToken::FuncHeader { arity } => {
                        let _ = writeln!(out, "FUNC {} {arity}", f.name);
                    }
                    other => {
                        let _ = writeln!(out, "{other}");
                    }
                }
            }
        }
        for d in &self.dropped {
            let _ = writeln!(out, "DROPPED {d}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<LinearProgram, TextError> {
        let mut prog = LinearProgram::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let malformed = || TextError::Malformed { line, text: raw.to_string() };
            if raw.is_empty() {
                continue;
            }
            if raw == "NO_MAIN" {
                prog.no_main = true;
                continue;
            }
            if let Some(name) = raw.strip_prefix("DROPPED ") {
                prog.dropped.push(name.to_string());
                continue;
            }
            if let Some(rest) = raw.strip_prefix("FUNC ") {
                let (name, arity) = rest.rsplit_once(' ').ok_or_else(malformed)?;
                let arity = arity.parse().map_err(|_| malformed())?;
                prog.functions.push(LinearFunction {
                    name: name.to_string(),
                    tokens: vec![LinearToken::FuncHeader { arity }],
                    spans: vec![Span::default()],
                });
                continue;
            }
            let token = match raw {
                "ELSE" => LinearToken::Else,
                "RETURN" => LinearToken::Return(None),
                "BLOCK_OPEN" => LinearToken::BlockOpen,
                "BLOCK_CLOSE" => LinearToken::BlockClose,
                _ => {
                    if let Some(e) = raw.strip_prefix("E: ") {
                        LinearToken::Expr(token::parse_expr(e))
                    } else if let Some(e) = raw.strip_prefix("IF E: ") {
                        LinearToken::If(token::parse_expr(e))
                    } else if let Some(e) = raw.strip_prefix("LOOP E: ") {
                        LinearToken::Loop(token::parse_expr(e))
                    } else if let Some(e) = raw.strip_prefix("RETURN E: ") {
                        LinearToken::Return(Some(token::parse_expr(e)))
                    } else if let Some(ty) = raw.strip_prefix("DECL ") {
                        LinearToken::Decl(ty.to_string())
                    } else {
                        return Err(malformed());
                    }
                }
            };
            let f = prog.functions.last_mut().ok_or(TextError::OrphanToken { line })?;
            f.tokens.push(token);
            f.spans.push(Span::default());
        }
        Ok(prog)
    }
}

/// Linear form of one function: header, then its lowered body.
pub fn linearize_function(f: &FunctionDef) -> LinearFunction {
    let mut pairs = vec![(LinearToken::FuncHeader { arity: f.params.len() as u32 }, f.span)];
    for s in normalize_constructs(&f.body) {
        pairs.extend(linearize_stmt(&s));
    }
    linearize::sort_decl_runs(&mut pairs);
    let (tokens, spans) = pairs.into_iter().unzip();
    LinearFunction { name: f.name.clone(), tokens, spans }
}

/// Linearizes every reachable function and emits them in first-use order.
pub fn reorder_functions(ast: &Ast) -> LinearProgram {
    let order = call_order(ast);
    let functions = order
        .order
        .iter()
        .filter_map(|name| ast.function(name))
        .map(linearize_function)
        .collect();
    LinearProgram { functions, dropped: order.dropped, no_main: order.no_main }
}

/// Full normalization of a parsed program.
pub fn normalize(ast: &Ast) -> LinearProgram {
    reorder_functions(ast)
}

/// Parses and normalizes source text.
pub fn normalize_source(source: &SourceUnit) -> Result<LinearProgram, ParseError> {
    Ok(normalize(&cparse::parse(source)?))
}

pub fn normalize_str(text: &str) -> Result<LinearProgram, ParseError> {
    normalize_source(&SourceUnit::new("<input>", text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_main() {
        let p = normalize_str("int main(){}").unwrap();
        assert_eq!(p.to_text(), "FUNC main 0\nBLOCK_OPEN\nBLOCK_CLOSE\n");
    }

    #[test]
    fn call_order_with_unused_function() {
        let src = "int h(){return 3;}\nint f(){return 1;}\nint g(){return f();}\nint main(){return g();}";
        let p = normalize_str(src).unwrap();
        let names: Vec<&str> = p.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["main", "g", "f"]);
        assert_eq!(p.dropped, ["h"]);
    }

    #[test]
    fn recursion_does_not_revisit() {
        let src = "int fact(int n){ if(n<2) return 1; return n*fact(n-1); }\nint main(){ return fact(5); }";
        let p = normalize_str(src).unwrap();
        assert_eq!(p.functions.len(), 2);
        assert_eq!(p.functions[1].arity(), 1);
    }

    #[test]
    fn no_main_fallback_uses_first_function() {
        let p = normalize_str("int a(){ return b(); }\nint b(){ return 0; }\nint c(){ return 1; }").unwrap();
        assert!(p.no_main);
        let names: Vec<&str> = p.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
        assert_eq!(p.dropped, ["c"]);
        assert!(p.to_text().starts_with("NO_MAIN\n"));
    }

    #[test]
    fn text_round_trip() {
        let src = "int f(int a, int b){ return a*b; }\nint g(){ return 1; }\nint main(){ int x; char c = 'a'; scanf(\"%d %d\", &x, &c); while(x > 0){ x--; if(x % 2 == 0) continue; printf(\"%d\\n\", f(x, 2)); } return 0; }";
        let p = normalize_str(src).unwrap();
        let text = p.to_text();
        let back = LinearProgram::from_text(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.dropped, ["g"]);
    }

    #[test]
    fn declaration_runs_are_order_insensitive() {
        let a = normalize_str("int main(){ int n; float f; n = 1; }").unwrap();
        let b = normalize_str("int main(){ float y; int x; x = 1; }").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spans_point_to_source_lines() {
        let p = normalize_str("int main()\n{\n  int x;\n  if (x > 1)\n    x = 2;\n}\n").unwrap();
        let f = &p.functions[0];
        let if_index = f.tokens.iter().position(|t| matches!(t, LinearToken::If(_))).unwrap();
        assert_eq!(f.span(if_index).line, 4);
        assert_eq!(f.span(if_index + 2).line, 5);
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(matches!(LinearProgram::from_text("BLOCK_OPEN\n"), Err(TextError::OrphanToken { line: 1 })));
        assert!(matches!(LinearProgram::from_text("FUNC main 0\nWHAT\n"), Err(TextError::Malformed { line: 2, .. })));
    }
}
