use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// One element of a postfix expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PostfixAtom {
    /// Variable renamed to its 1-based first-use rank within the expression.
    Var(u32),
    /// Identifier before renaming. Never present in a normalized program.
    Ident(String),
    /// Literal text, kept verbatim (numbers, chars, strings, `break`, ...).
    Literal(String),
    Call { name: String, argc: u32 },
    Operator { symbol: String, arity: u32 },
}

impl PostfixAtom {
    pub fn op(symbol: &str, arity: u32) -> Self {
        PostfixAtom::Operator { symbol: symbol.to_string(), arity }
    }

    pub fn lit(text: &str) -> Self {
        PostfixAtom::Literal(text.to_string())
    }

    /// Net stack effect: values pushed minus values popped.
    pub fn arity_in(&self) -> u32 {
        match self {
            PostfixAtom::Var(_) | PostfixAtom::Ident(_) | PostfixAtom::Literal(_) => 0,
            PostfixAtom::Call { argc, .. } => *argc,
            PostfixAtom::Operator { arity, .. } => *arity,
        }
    }
}

impl fmt::Display for PostfixAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostfixAtom::Var(k) => write!(f, "v{k}"),
            PostfixAtom::Ident(name) => write!(f, "${name}"),
            PostfixAtom::Literal(text) => f.write_str(text),
            PostfixAtom::Call { name, argc } => write!(f, "{name}/{argc}"),
            PostfixAtom::Operator { symbol, arity } if symbol == "{}" => write!(f, "{{}}/{arity}"),
            PostfixAtom::Operator { symbol, .. } => f.write_str(symbol),
        }
    }
}

/// An expression in postfix order. Clones share the atom list.
///
/// Each atom also gets a 64-bit fingerprint so distance computations can
/// reject unequal atoms with an integer comparison.
#[derive(Clone, Serialize, Deserialize)]
#[serde(from = "Vec<PostfixAtom>", into = "Vec<PostfixAtom>")]
pub struct NormalizedExpr(Arc<ExprData>);

struct ExprData {
    atoms: Box<[PostfixAtom]>,
    prints: Box<[u64]>,
}

fn fingerprint(a: &PostfixAtom) -> u64 {
    let mut h = DefaultHasher::new();
    a.hash(&mut h);
    h.finish()
}

impl PartialEq for NormalizedExpr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.prints == other.0.prints && self.0.atoms == other.0.atoms)
    }
}

impl Eq for NormalizedExpr {}

impl Hash for NormalizedExpr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.atoms.hash(state);
    }
}

impl fmt::Debug for NormalizedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("NormalizedExpr").field(&self.0.atoms).finish()
    }
}

impl Default for NormalizedExpr {
    fn default() -> Self {
        Vec::new().into()
    }
}

impl From<Vec<PostfixAtom>> for NormalizedExpr {
    fn from(atoms: Vec<PostfixAtom>) -> Self {
        let prints = atoms.iter().map(fingerprint).collect();
        NormalizedExpr(Arc::new(ExprData { atoms: atoms.into_boxed_slice(), prints }))
    }
}

impl From<NormalizedExpr> for Vec<PostfixAtom> {
    fn from(e: NormalizedExpr) -> Self {
        e.0.atoms.to_vec()
    }
}

impl NormalizedExpr {
    pub fn new(atoms: Vec<PostfixAtom>) -> Self {
        atoms.into()
    }

    pub fn atoms(&self) -> &[PostfixAtom] {
        &self.0.atoms
    }

    /// True when both share one atom list (clones of the same expression).
    pub fn same_atoms(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Per-atom fingerprints; equal atoms have equal fingerprints.
    pub fn fingerprints(&self) -> &[u64] {
        &self.0.prints
    }

    pub fn len(&self) -> usize {
        self.0.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.atoms.is_empty()
    }

    /// Stack simulation: never underflows and leaves exactly one value.
    pub fn is_valid_postfix(&self) -> bool {
        let mut depth: i64 = 0;
        for atom in self.atoms() {
            let pops = atom.arity_in() as i64;
            if depth < pops {
                return false;
            }
            depth = depth - pops + 1;
        }
        depth == 1
    }

    /// Operator symbols in order of appearance.
    pub fn operators(&self) -> impl Iterator<Item = &str> {
        self.atoms().iter().filter_map(|a| match a {
            PostfixAtom::Operator { symbol, .. } => Some(symbol.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for NormalizedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, atom) in self.atoms().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

/// A statement-level token of the linear form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinearToken {
    FuncHeader { arity: u32 },
    Decl(String),
    Expr(NormalizedExpr),
    If(NormalizedExpr),
    Else,
    Loop(NormalizedExpr),
    Return(Option<NormalizedExpr>),
    BlockOpen,
    BlockClose,
}

impl LinearToken {
    pub fn is_block(&self) -> bool {
        matches!(self, LinearToken::BlockOpen | LinearToken::BlockClose)
    }

    pub fn expr(&self) -> Option<&NormalizedExpr> {
        match self {
            LinearToken::Expr(e) | LinearToken::If(e) | LinearToken::Loop(e) => Some(e),
            LinearToken::Return(e) => e.as_ref(),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LinearToken::FuncHeader { .. } => "FUNC",
            LinearToken::Decl(_) => "DECL",
            LinearToken::Expr(_) => "EXPR",
            LinearToken::If(_) => "IF",
            LinearToken::Else => "ELSE",
            LinearToken::Loop(_) => "LOOP",
            LinearToken::Return(_) => "RETURN",
            LinearToken::BlockOpen => "BLOCK_OPEN",
            LinearToken::BlockClose => "BLOCK_CLOSE",
        }
    }
}

/// Renders the token in the canonical line format (function headers are
/// written by the program serializer, which knows the name).
impl fmt::Display for LinearToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearToken::FuncHeader { arity } => write!(f, "FUNC/{arity}"),
            LinearToken::Decl(ty) => write!(f, "DECL {ty}"),
            LinearToken::Expr(e) => write!(f, "E: {e}"),
            LinearToken::If(e) => write!(f, "IF E: {e}"),
            LinearToken::Else => f.write_str("ELSE"),
            LinearToken::Loop(e) => write!(f, "LOOP E: {e}"),
            LinearToken::Return(None) => f.write_str("RETURN"),
            LinearToken::Return(Some(e)) => write!(f, "RETURN E: {e}"),
            LinearToken::BlockOpen => f.write_str("BLOCK_OPEN"),
            LinearToken::BlockClose => f.write_str("BLOCK_CLOSE"),
        }
    }
}

/// Splits an atom list on spaces, keeping quoted literals intact.
pub(crate) fn split_atoms(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b' ' {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b' ' {
            if bytes[i] == b'"' || bytes[i] == b'\'' {
                let q = bytes[i];
                i += 1;
                while i < bytes.len() && bytes[i] != q {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
            }
            i += 1;
        }
        out.push(&s[start..i.min(bytes.len())]);
    }
    out
}

pub(crate) fn parse_atom(text: &str) -> PostfixAtom {
    let first = text.chars().next().unwrap_or(' ');
    if let Some(rank) = text.strip_prefix('v').and_then(|r| r.parse::<u32>().ok()) {
        return PostfixAtom::Var(rank);
    }
    if let Some(name) = text.strip_prefix('$') {
        return PostfixAtom::Ident(name.to_string());
    }
    if let Some(n) = text.strip_prefix("{}/").and_then(|n| n.parse().ok()) {
        return PostfixAtom::Operator { symbol: "{}".into(), arity: n };
    }
    if first.is_ascii_alphabetic() || first == '_' {
        if let Some((name, argc)) = text.rsplit_once('/') {
            if let Ok(argc) = argc.parse() {
                return PostfixAtom::Call { name: name.to_string(), argc };
            }
        }
    }
    if first.is_ascii_digit() || first == '"' || first == '\'' || first == '.' {
        return PostfixAtom::Literal(text.to_string());
    }
    if let Some(arity) = operator_arity(text) {
        return PostfixAtom::Operator { symbol: text.to_string(), arity };
    }
    PostfixAtom::Literal(text.to_string())
}

/// Arity for every operator symbol emitted by the postfix converter.
pub(crate) fn operator_arity(symbol: &str) -> Option<u32> {
    Some(match symbol {
        "neg" | "pos" | "!" | "~" | "addr" | "deref" | "sizeof" | "pre++" | "pre--" | "post++"
        | "post--" => 1,
        "?:" => 3,
        "*" | "/" | "%" | "+" | "-" | "<<" | ">>" | "<" | ">" | "<=" | ">=" | "==" | "!=" | "&"
        | "^" | "|" | "&&" | "||" | "," | "=" | "[]" | "*=" | "/=" | "%=" | "+=" | "-=" | "<<="
        | ">>=" | "&=" | "^=" | "|=" => 2,
        s if s.starts_with('(') && s.ends_with(')') => 1,
        _ => return None,
    })
}

pub(crate) fn parse_expr(text: &str) -> NormalizedExpr {
    NormalizedExpr::new(split_atoms(text).into_iter().map(parse_atom).collect())
}
