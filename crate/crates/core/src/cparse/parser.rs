//! Recursive-descent parser for the introductory C subset.

use super::ast::*;
use super::lexer::{Tok, TokKind};
use super::span::Span;
use super::ParseError;

const TYPE_WORDS: &[&str] =
    &["int", "char", "float", "double", "void", "short", "long", "signed", "unsigned"];
const QUALIFIERS: &[&str] =
    &["const", "volatile", "static", "extern", "register", "inline", "auto", "restrict"];
const UNSUPPORTED: &[&str] =
    &["switch", "case", "default", "goto", "struct", "union", "enum", "typedef"];
const KEYWORDS: &[&str] = &[
    "if", "else", "while", "do", "for", "return", "break", "continue", "sizeof",
];

type PResult<T> = Result<T, ParseError>;

pub struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    pub fn new(toks: Vec<Tok>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().kind, TokKind::Punct(q) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().kind, TokKind::Ident(s) if s == w)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.is_punct(p) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("`{p}`")))
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        ParseError::Syntax { span: tok.span, expected: expected.to_string(), found: tok.describe() }
    }

    fn unsupported_here(&self) -> Option<ParseError> {
        match &self.peek().kind {
            TokKind::Ident(w) if UNSUPPORTED.contains(&w.as_str()) => {
                Some(ParseError::UnsupportedConstruct { span: self.peek().span, name: w.clone() })
            }
            TokKind::Punct("...") => Some(ParseError::UnsupportedConstruct {
                span: self.peek().span,
                name: "varargs".into(),
            }),
            _ => None,
        }
    }

    fn starts_type(&self) -> bool {
        matches!(&self.peek().kind, TokKind::Ident(w)
            if TYPE_WORDS.contains(&w.as_str()) || QUALIFIERS.contains(&w.as_str()))
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Span)> {
        if let Some(e) = self.unsupported_here() {
            return Err(e);
        }
        match &self.peek().kind {
            TokKind::Ident(w)
                if !KEYWORDS.contains(&w.as_str())
                    && !TYPE_WORDS.contains(&w.as_str())
                    && !QUALIFIERS.contains(&w.as_str()) =>
            {
                let name = w.clone();
                let span = self.bump().span;
                Ok((name, span))
            }
            _ => Err(self.error(what)),
        }
    }

    // ---- types ------------------------------------------------------------

    /// Parses declaration specifiers into a canonical base type name.
    fn type_specifiers(&mut self) -> PResult<String> {
        let mut unsigned = false;
        let mut signed = false;
        let mut longs = 0;
        let mut short = false;
        let mut base: Option<String> = None;
        let start = self.peek().span;
        loop {
            if let Some(e) = self.unsupported_here() {
                return Err(e);
            }
            let TokKind::Ident(w) = &self.peek().kind else { break };
            match w.as_str() {
                "unsigned" => unsigned = true,
                "signed" => signed = true,
                "long" => longs += 1,
                "short" => short = true,
                "int" | "char" | "float" | "double" | "void" => {
                    if base.is_some() {
                        return Err(ParseError::Syntax {
                            span: self.peek().span,
                            expected: "a single base type".into(),
                            found: format!("`{w}`"),
                        });
                    }
                    base = Some(w.clone());
                }
                q if QUALIFIERS.contains(&q) => {}
                _ => break,
            }
            self.bump();
        }
        if !(unsigned || signed || longs > 0 || short || base.is_some()) {
            return Err(ParseError::Syntax {
                span: start,
                expected: "a type".into(),
                found: self.peek().describe(),
            });
        }
        let base = base.unwrap_or_else(|| "int".to_string());
        let mut parts: Vec<&str> = Vec::new();
        if unsigned {
            parts.push("unsigned");
        } else if signed && base == "char" {
            parts.push("signed");
        }
        if short {
            parts.push("short");
        }
        for _ in 0..longs {
            parts.push("long");
        }
        parts.push(&base);
        Ok(parts.join(" "))
    }

    fn type_name(&mut self) -> PResult<String> {
        let mut ty = self.type_specifiers()?;
        while self.eat_punct("*") {
            ty.push('*');
        }
        Ok(ty)
    }

    // ---- top level --------------------------------------------------------

    pub fn translation_unit(&mut self) -> PResult<Ast> {
        let mut functions: Vec<FunctionDef> = Vec::new();
        let mut globals = Vec::new();
        while self.peek().kind != TokKind::Eof {
            if self.eat_punct(";") {
                continue;
            }
            if let Some(e) = self.unsupported_here() {
                return Err(e);
            }
            let start = self.peek().span;
            // Old-style `main() { ... }` with implicit int.
            let implicit = matches!(&self.peek().kind, TokKind::Ident(w) if !self.starts_type()
                && !UNSUPPORTED.contains(&w.as_str()))
                && matches!(self.peek_at(1).kind, TokKind::Punct("("));
            let ty = if implicit { "int".to_string() } else { self.type_specifiers()? };
            let mut pointer = 0u8;
            while self.eat_punct("*") {
                pointer += 1;
            }
            let (name, name_span) = self.expect_ident("a declarator name")?;
            if self.is_punct("(") {
                let params = self.params()?;
                if self.eat_punct(";") {
                    continue; // prototype
                }
                if !self.is_punct("{") {
                    return Err(self.error("`{` or `;`"));
                }
                let Some(params) = params else {
                    return Err(ParseError::Syntax {
                        span: name_span,
                        expected: "named parameters in a function definition".into(),
                        found: "unnamed parameter".into(),
                    });
                };
                let body = self.block()?;
                let span = start.to(body.span);
                if functions.iter().any(|f| f.name == name) {
                    return Err(ParseError::Syntax {
                        span: name_span,
                        expected: "a unique function name".into(),
                        found: format!("redefinition of `{name}`"),
                    });
                }
                let ret = format!("{ty}{}", "*".repeat(pointer as usize));
                functions.push(FunctionDef { name, ret, params, body, span });
            } else {
                let first = self.declarator_rest(name, name_span, pointer)?;
                globals.push(self.declaration_rest(ty, start, first)?);
            }
        }
        let no_main = !functions.iter().any(|f| f.name == "main");
        Ok(Ast { functions, globals, no_main })
    }

    /// Parameter list. Returns `None` when some parameter is unnamed
    /// (allowed for prototypes only).
    fn params(&mut self) -> PResult<Option<Vec<Param>>> {
        self.expect_punct("(")?;
        let mut params: Vec<Param> = Vec::new();
        let mut unnamed = false;
        if self.is_word("void") && matches!(self.peek_at(1).kind, TokKind::Punct(")")) {
            self.bump();
        }
        if !self.eat_punct(")") {
            loop {
                if let Some(e) = self.unsupported_here() {
                    return Err(e);
                }
                let start = self.peek().span;
                let ty = self.type_specifiers()?;
                let mut pointer = 0u8;
                while self.eat_punct("*") {
                    pointer += 1;
                }
                if let TokKind::Ident(_) = self.peek().kind {
                    let (name, _) = self.expect_ident("a parameter name")?;
                    let mut array = false;
                    while self.eat_punct("[") {
                        if !self.is_punct("]") {
                            self.assignment()?;
                        }
                        self.expect_punct("]")?;
                        array = true;
                    }
                    let span = start.to(self.prev_span());
                    if params.iter().any(|p| p.name == name) {
                        return Err(ParseError::Syntax {
                            span,
                            expected: "a unique parameter name".into(),
                            found: format!("duplicate `{name}`"),
                        });
                    }
                    params.push(Param { ty, pointer, array, name, span });
                } else {
                    unnamed = true;
                    while self.eat_punct("[") {
                        self.expect_punct("]")?;
                    }
                }
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(if unnamed { None } else { Some(params) })
    }

    // ---- declarations -----------------------------------------------------

    fn declarator_rest(&mut self, name: String, name_span: Span, pointer: u8) -> PResult<Declarator> {
        let mut dims = Vec::new();
        while self.eat_punct("[") {
            if self.eat_punct("]") {
                dims.push(None);
            } else {
                dims.push(Some(self.assignment()?));
                self.expect_punct("]")?;
            }
        }
        let init = if self.eat_punct("=") { Some(self.initializer()?) } else { None };
        Ok(Declarator { name, pointer, dims, init, span: name_span.to(self.prev_span()) })
    }

    fn declarator(&mut self) -> PResult<Declarator> {
        let mut pointer = 0u8;
        while self.eat_punct("*") {
            pointer += 1;
        }
        let (name, span) = self.expect_ident("a declarator name")?;
        if self.is_punct("(") {
            return Err(self.error("`;`, `,` or `=`"));
        }
        self.declarator_rest(name, span, pointer)
    }

    fn declaration_rest(&mut self, ty: String, start: Span, first: Declarator) -> PResult<Declaration> {
        let mut declarators = vec![first];
        while self.eat_punct(",") {
            declarators.push(self.declarator()?);
        }
        let end = self.expect_punct(";")?;
        Ok(Declaration { ty, declarators, span: start.to(end) })
    }

    fn declaration(&mut self) -> PResult<Declaration> {
        let start = self.peek().span;
        let ty = self.type_specifiers()?;
        let first = self.declarator()?;
        self.declaration_rest(ty, start, first)
    }

    fn initializer(&mut self) -> PResult<Initializer> {
        if self.is_punct("{") {
            let open = self.bump().span;
            let mut items = Vec::new();
            while !self.is_punct("}") {
                items.push(self.initializer()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            let close = self.expect_punct("}")?;
            Ok(Initializer::List(items, open.to(close)))
        } else {
            Ok(Initializer::Expr(self.assignment()?))
        }
    }

    // ---- statements -------------------------------------------------------

    fn block(&mut self) -> PResult<Stmt> {
        let open = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.is_punct("}") {
                break;
            }
            if self.peek().kind == TokKind::Eof {
                return Err(self.error("`}`"));
            }
            if self.eat_punct(";") {
                continue;
            }
            stmts.push(self.statement()?);
        }
        let close = self.bump().span;
        Ok(Stmt { kind: StmtKind::Block(stmts), span: open.to(close) })
    }

    /// A statement used as a loop or branch body; a lone `;` becomes `{}`.
    fn body(&mut self) -> PResult<Stmt> {
        if self.is_punct(";") {
            let span = self.bump().span;
            return Ok(Stmt { kind: StmtKind::Block(Vec::new()), span });
        }
        self.statement()
    }

    pub fn statement(&mut self) -> PResult<Stmt> {
        if let Some(e) = self.unsupported_here() {
            return Err(e);
        }
        if self.is_punct("{") {
            return self.block();
        }
        let start = self.peek().span;
        if self.starts_type() {
            let decl = self.declaration()?;
            let span = decl.span;
            return Ok(Stmt { kind: StmtKind::Decl(decl), span });
        }
        let word = match &self.peek().kind {
            TokKind::Ident(w) => Some(w.clone()),
            _ => None,
        };
        let kind = match word.as_deref() {
            Some("if") => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then = Box::new(self.body()?);
                let els = if self.is_word("else") {
                    self.bump();
                    Some(Box::new(self.body()?))
                } else {
                    None
                };
                StmtKind::If { cond, then, els }
            }
            Some("while") => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                StmtKind::While { cond, body: Box::new(self.body()?) }
            }
            Some("do") => {
                self.bump();
                let body = Box::new(self.body()?);
                if !self.is_word("while") {
                    return Err(self.error("`while`"));
                }
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                StmtKind::DoWhile { body, cond }
            }
            Some("for") => {
                self.bump();
                self.expect_punct("(")?;
                let mut init = Vec::new();
                if self.starts_type() {
                    let decl = self.declaration()?;
                    let span = decl.span;
                    init.push(Stmt { kind: StmtKind::Decl(decl), span });
                } else {
                    if !self.is_punct(";") {
                        for e in self.expr_list()? {
                            let span = e.span;
                            init.push(Stmt { kind: StmtKind::Expr(e), span });
                        }
                    }
                    self.expect_punct(";")?;
                }
                let cond = if self.is_punct(";") { None } else { Some(self.expr()?) };
                self.expect_punct(";")?;
                let step = if self.is_punct(")") { Vec::new() } else { self.expr_list()? };
                self.expect_punct(")")?;
                StmtKind::For { init, cond, step, body: Box::new(self.body()?) }
            }
            Some("return") => {
                self.bump();
                let value = if self.is_punct(";") { None } else { Some(self.expr()?) };
                self.expect_punct(";")?;
                StmtKind::Return(value)
            }
            Some("break") => {
                self.bump();
                self.expect_punct(";")?;
                StmtKind::Break
            }
            Some("continue") => {
                self.bump();
                self.expect_punct(";")?;
                StmtKind::Continue
            }
            Some("else") => return Err(self.error("a statement")),
            Some(_) if matches!(self.peek_at(1).kind, TokKind::Punct(":")) => {
                return Err(ParseError::UnsupportedConstruct {
                    span: self.peek().span,
                    name: "label".into(),
                });
            }
            _ => {
                let e = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { kind, span: start.to(self.prev_span()) })
    }

    // ---- expressions ------------------------------------------------------

    /// Comma-separated expressions, kept apart (for-loop init and step).
    fn expr_list(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.assignment()?];
        while self.eat_punct(",") {
            out.push(self.assignment()?);
        }
        Ok(out)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.assignment()?;
        while self.eat_punct(",") {
            let rhs = self.assignment()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Binary(BinOp::Comma, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn assignment(&mut self) -> PResult<Expr> {
        let lhs = self.conditional()?;
        if let TokKind::Punct(p) = self.peek().kind {
            if let Some(op) = AssignOp::from_punct(p) {
                self.bump();
                let rhs = self.assignment()?;
                let span = lhs.span.to(rhs.span);
                return Ok(Expr { kind: ExprKind::Assign(op, Box::new(lhs), Box::new(rhs)), span });
            }
        }
        Ok(lhs)
    }

    fn conditional(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.eat_punct("?") {
            let then = self.expr()?;
            self.expect_punct(":")?;
            let els = self.conditional()?;
            let span = cond.span.to(els.span);
            return Ok(Expr {
                kind: ExprKind::Ternary(Box::new(cond), Box::new(then), Box::new(els)),
                span,
            });
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokKind::Punct(p) => match BinOp::from_punct(p) {
                    Some(op) if op.precedence() >= min_prec => op,
                    _ => break,
                },
                _ => break,
            };
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn is_cast(&self) -> bool {
        self.is_punct("(")
            && matches!(&self.peek_at(1).kind, TokKind::Ident(w)
                if TYPE_WORDS.contains(&w.as_str()) || QUALIFIERS.contains(&w.as_str()))
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        let op = match self.peek().kind {
            TokKind::Punct("-") => Some(UnaryOp::Neg),
            TokKind::Punct("+") => Some(UnaryOp::Plus),
            TokKind::Punct("!") => Some(UnaryOp::Not),
            TokKind::Punct("~") => Some(UnaryOp::BitNot),
            TokKind::Punct("&") => Some(UnaryOp::AddrOf),
            TokKind::Punct("*") => Some(UnaryOp::Deref),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.unary()?;
            let span = start.to(operand.span);
            return Ok(Expr { kind: ExprKind::Unary(op, Box::new(operand)), span });
        }
        if self.is_punct("++") || self.is_punct("--") {
            let op = if self.is_punct("++") { IncDec::Inc } else { IncDec::Dec };
            self.bump();
            let operand = self.unary()?;
            let span = start.to(operand.span);
            return Ok(Expr { kind: ExprKind::PreIncDec(op, Box::new(operand)), span });
        }
        if self.is_word("sizeof") {
            self.bump();
            if self.is_cast() {
                self.bump();
                let ty = self.type_name()?;
                let end = self.expect_punct(")")?;
                return Ok(Expr { kind: ExprKind::SizeofType(ty), span: start.to(end) });
            }
            let operand = self.unary()?;
            let span = start.to(operand.span);
            return Ok(Expr { kind: ExprKind::Unary(UnaryOp::Sizeof, Box::new(operand)), span });
        }
        if self.is_cast() {
            self.bump();
            let ty = self.type_name()?;
            self.expect_punct(")")?;
            let operand = self.unary()?;
            let span = start.to(operand.span);
            return Ok(Expr { kind: ExprKind::Unary(UnaryOp::Cast(ty), Box::new(operand)), span });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.is_punct("(") {
                let ExprKind::Ident(name) = &e.kind else {
                    return Err(self.error("an operator or `;`"));
                };
                let name = name.clone();
                self.bump();
                let mut args = Vec::new();
                if !self.is_punct(")") {
                    args = self.expr_list()?;
                }
                let end = self.expect_punct(")")?;
                e = Expr { kind: ExprKind::Call(name, args), span: e.span.to(end) };
            } else if self.eat_punct("[") {
                let index = self.expr()?;
                let end = self.expect_punct("]")?;
                let span = e.span.to(end);
                e = Expr { kind: ExprKind::Index(Box::new(e), Box::new(index)), span };
            } else if self.is_punct("++") || self.is_punct("--") {
                let op = if self.is_punct("++") { IncDec::Inc } else { IncDec::Dec };
                let end = self.bump().span;
                let span = e.span.to(end);
                e = Expr { kind: ExprKind::PostIncDec(op, Box::new(e)), span };
            } else if self.is_punct(".") || self.is_punct("->") {
                return Err(ParseError::UnsupportedConstruct {
                    span: self.peek().span,
                    name: "struct member access".into(),
                });
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        if let Some(e) = self.unsupported_here() {
            return Err(e);
        }
        let tok = self.peek().clone();
        let kind = match &tok.kind {
            TokKind::Int(s) => ExprKind::Int(s.clone()),
            TokKind::Float(s) => ExprKind::Float(s.clone()),
            TokKind::Char(s) => ExprKind::Char(s.clone()),
            TokKind::Str(s) => {
                // Adjacent literals concatenate.
                let mut text = s.clone();
                let mut span = tok.span;
                self.bump();
                while let TokKind::Str(more) = &self.peek().kind {
                    text.push_str(more);
                    span = span.to(self.peek().span);
                    self.bump();
                }
                return Ok(Expr { kind: ExprKind::Str(text), span });
            }
            TokKind::Ident(w)
                if !KEYWORDS.contains(&w.as_str())
                    && !TYPE_WORDS.contains(&w.as_str())
                    && !QUALIFIERS.contains(&w.as_str()) =>
            {
                ExprKind::Ident(w.clone())
            }
            TokKind::Punct("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(inner);
            }
            _ => return Err(self.error("an expression")),
        };
        self.bump();
        Ok(Expr { kind, span: tok.span })
    }
}
