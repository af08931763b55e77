//! Debug renderings of an [`Ast`]: an indented S-expression dump (one node per
//! line) and a C pretty-printer used for round-trip checks.

use std::fmt::Write;

use super::ast::*;

/// S-expression dump. With `spans`, each node line ends with `@line:col`.
pub fn dump(ast: &Ast, spans: bool) -> String {
    let mut d = Dumper { out: String::new(), spans };
    d.line(0, "(unit", None);
    for g in &ast.globals {
        d.decl(1, g);
    }
    for f in &ast.functions {
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| {
                format!("{}{} {}{}", p.ty, "*".repeat(p.pointer as usize), p.name, if p.array { "[]" } else { "" })
            })
            .collect();
        d.line(1, &format!("(function {} {} ({})", f.ret, f.name, params.join(", ")), Some(f.span));
        d.stmt(2, &f.body);
        d.close();
    }
    d.close();
    d.out
}

struct Dumper {
    out: String,
    spans: bool,
}

impl Dumper {
    fn line(&mut self, depth: usize, text: &str, span: Option<super::span::Span>) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        if let (true, Some(s)) = (self.spans, span) {
            let _ = write!(self.out, " @{}:{}", s.line, s.col);
        }
        self.out.push('\n');
    }

    fn close(&mut self) {
        // Closing parens attach to the previous line.
        if self.out.ends_with('\n') {
            self.out.pop();
        }
        self.out.push_str(")\n");
    }

    fn decl(&mut self, depth: usize, d: &Declaration) {
        self.line(depth, &format!("(decl {}", d.ty), Some(d.span));
        for v in &d.declarators {
            let mut head = format!("(var {}{}", "*".repeat(v.pointer as usize), v.name);
            for dim in &v.dims {
                match dim {
                    Some(e) => {
                        let _ = write!(head, "[{}]", expr_src(e));
                    }
                    None => head.push_str("[]"),
                }
            }
            self.line(depth + 1, &head, Some(v.span));
            if let Some(init) = &v.init {
                self.init(depth + 2, init);
            }
            self.close();
        }
        self.close();
    }

    fn init(&mut self, depth: usize, init: &Initializer) {
        match init {
            Initializer::Expr(e) => self.expr(depth, e),
            Initializer::List(items, span) => {
                self.line(depth, "(init-list", Some(*span));
                for i in items {
                    self.init(depth + 1, i);
                }
                self.close();
            }
        }
    }

    fn stmt(&mut self, depth: usize, s: &Stmt) {
        let span = Some(s.span);
        match &s.kind {
            StmtKind::Decl(d) => self.decl(depth, d),
            StmtKind::Expr(e) => {
                self.line(depth, "(expr", span);
                self.expr(depth + 1, e);
                self.close();
            }
            StmtKind::If { cond, then, els } => {
                self.line(depth, "(if", span);
                self.expr(depth + 1, cond);
                self.stmt(depth + 1, then);
                if let Some(e) = els {
                    self.line(depth + 1, "(else", None);
                    self.stmt(depth + 2, e);
                    self.close();
                }
                self.close();
            }
            StmtKind::While { cond, body } => {
                self.line(depth, "(while", span);
                self.expr(depth + 1, cond);
                self.stmt(depth + 1, body);
                self.close();
            }
            StmtKind::DoWhile { body, cond } => {
                self.line(depth, "(do-while", span);
                self.stmt(depth + 1, body);
                self.expr(depth + 1, cond);
                self.close();
            }
            StmtKind::For { init, cond, step, body } => {
                self.line(depth, "(for", span);
                self.line(depth + 1, "(init", None);
                for s in init {
                    self.stmt(depth + 2, s);
                }
                self.close();
                self.line(depth + 1, "(cond", None);
                if let Some(c) = cond {
                    self.expr(depth + 2, c);
                }
                self.close();
                self.line(depth + 1, "(step", None);
                for e in step {
                    self.expr(depth + 2, e);
                }
                self.close();
                self.stmt(depth + 1, body);
                self.close();
            }
            StmtKind::Return(v) => {
                self.line(depth, "(return", span);
                if let Some(e) = v {
                    self.expr(depth + 1, e);
                }
                self.close();
            }
            StmtKind::Block(stmts) => {
                self.line(depth, "(block", span);
                for s in stmts {
                    self.stmt(depth + 1, s);
                }
                self.close();
            }
            StmtKind::Break => self.line(depth, "(break)", span),
            StmtKind::Continue => self.line(depth, "(continue)", span),
        }
    }

    fn expr(&mut self, depth: usize, e: &Expr) {
        let span = Some(e.span);
        match &e.kind {
            ExprKind::Int(s) => self.line(depth, &format!("(int {s})"), span),
            ExprKind::Float(s) => self.line(depth, &format!("(float {s})"), span),
            ExprKind::Char(s) => self.line(depth, &format!("(char {s})"), span),
            ExprKind::Str(s) => self.line(depth, &format!("(str {s})"), span),
            ExprKind::Ident(s) => self.line(depth, &format!("(ident {s})"), span),
            ExprKind::SizeofType(t) => self.line(depth, &format!("(sizeof-type {t})"), span),
            ExprKind::Unary(op, x) => {
                self.line(depth, &format!("(unary {}", op.symbol()), span);
                self.expr(depth + 1, x);
                self.close();
            }
            ExprKind::Binary(op, l, r) => {
                self.line(depth, &format!("(binary {}", op.symbol()), span);
                self.expr(depth + 1, l);
                self.expr(depth + 1, r);
                self.close();
            }
            ExprKind::Assign(op, l, r) => {
                self.line(depth, &format!("(assign {}", op.symbol()), span);
                self.expr(depth + 1, l);
                self.expr(depth + 1, r);
                self.close();
            }
            ExprKind::Call(name, args) => {
                self.line(depth, &format!("(call {name}"), span);
                for a in args {
                    self.expr(depth + 1, a);
                }
                self.close();
            }
            ExprKind::Index(b, i) => {
                self.line(depth, "(index", span);
                self.expr(depth + 1, b);
                self.expr(depth + 1, i);
                self.close();
            }
            ExprKind::PostIncDec(op, x) => {
                self.line(depth, &format!("(post {}", op.symbol()), span);
                self.expr(depth + 1, x);
                self.close();
            }
            ExprKind::PreIncDec(op, x) => {
                self.line(depth, &format!("(pre {}", op.symbol()), span);
                self.expr(depth + 1, x);
                self.close();
            }
            ExprKind::Ternary(c, t, f) => {
                self.line(depth, "(ternary", span);
                self.expr(depth + 1, c);
                self.expr(depth + 1, t);
                self.expr(depth + 1, f);
                self.close();
            }
        }
    }
}

/// Renders the AST back to C source. Expressions are fully parenthesized.
pub fn pretty_print(ast: &Ast) -> String {
    let mut out = String::new();
    for g in &ast.globals {
        out.push_str(&decl_src(g));
        out.push('\n');
    }
    for f in &ast.functions {
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| {
                format!("{} {}{}{}", p.ty, "*".repeat(p.pointer as usize), p.name, if p.array { "[]" } else { "" })
            })
            .collect();
        let _ = writeln!(out, "{} {}({})", f.ret, f.name, params.join(", "));
        stmt_src(&mut out, &f.body, 0);
    }
    out
}

fn decl_src(d: &Declaration) -> String {
    let vars: Vec<String> = d
        .declarators
        .iter()
        .map(|v| {
            let mut s = format!("{}{}", "*".repeat(v.pointer as usize), v.name);
            for dim in &v.dims {
                match dim {
                    Some(e) => {
                        let _ = write!(s, "[{}]", expr_src(e));
                    }
                    None => s.push_str("[]"),
                }
            }
            if let Some(init) = &v.init {
                let _ = write!(s, " = {}", init_src(init));
            }
            s
        })
        .collect();
    format!("{} {};", d.ty, vars.join(", "))
}

fn init_src(init: &Initializer) -> String {
    match init {
        Initializer::Expr(e) => expr_src(e),
        Initializer::List(items, _) => {
            let parts: Vec<String> = items.iter().map(init_src).collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

fn stmt_src(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "    ".repeat(depth);
    match &s.kind {
        StmtKind::Decl(d) => {
            let _ = writeln!(out, "{pad}{}", decl_src(d));
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{pad}{};", expr_src(e));
        }
        StmtKind::If { cond, then, els } => {
            let _ = writeln!(out, "{pad}if ({})", expr_src(cond));
            stmt_src(out, then, depth + 1);
            if let Some(e) = els {
                let _ = writeln!(out, "{pad}else");
                stmt_src(out, e, depth + 1);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while ({})", expr_src(cond));
            stmt_src(out, body, depth + 1);
        }
        StmtKind::DoWhile { body, cond } => {
            let _ = writeln!(out, "{pad}do");
            stmt_src(out, body, depth + 1);
            let _ = writeln!(out, "{pad}while ({});", expr_src(cond));
        }
        StmtKind::For { init, cond, step, body } => {
            let init_part = match init.as_slice() {
                [Stmt { kind: StmtKind::Decl(d), .. }] => decl_src(d),
                items => {
                    let exprs: Vec<String> = items
                        .iter()
                        .filter_map(|s| match &s.kind {
                            StmtKind::Expr(e) => Some(expr_src(e)),
                            _ => None,
                        })
                        .collect();
                    format!("{};", exprs.join(", "))
                }
            };
            let cond = cond.as_ref().map(expr_src).unwrap_or_default();
            let step: Vec<String> = step.iter().map(expr_src).collect();
            let _ = writeln!(out, "{pad}for ({init_part} {cond}; {})", step.join(", "));
            stmt_src(out, body, depth + 1);
        }
        StmtKind::Return(v) => match v {
            Some(e) => {
                let _ = writeln!(out, "{pad}return {};", expr_src(e));
            }
            None => {
                let _ = writeln!(out, "{pad}return;");
            }
        },
        StmtKind::Block(stmts) => {
            let outer = "    ".repeat(depth.saturating_sub(1));
            let _ = writeln!(out, "{outer}{{");
            for s in stmts {
                stmt_src(out, s, depth.max(1));
            }
            let _ = writeln!(out, "{outer}}}");
        }
        StmtKind::Break => {
            let _ = writeln!(out, "{pad}break;");
        }
        StmtKind::Continue => {
            let _ = writeln!(out, "{pad}continue;");
        }
    }
}

pub(crate) fn expr_src(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(s) | ExprKind::Float(s) | ExprKind::Char(s) | ExprKind::Str(s) | ExprKind::Ident(s) => {
            s.clone()
        }
        ExprKind::SizeofType(t) => format!("sizeof({t})"),
        ExprKind::Unary(UnaryOp::Sizeof, x) => format!("sizeof ({})", expr_src(x)),
        ExprKind::Unary(op, x) => format!("({}{})", op.symbol(), expr_src(x)),
        ExprKind::Binary(op, l, r) => format!("({} {} {})", expr_src(l), op.symbol(), expr_src(r)),
        ExprKind::Assign(op, l, r) => format!("({} {} {})", expr_src(l), op.symbol(), expr_src(r)),
        ExprKind::Call(name, args) => {
            let args: Vec<String> = args.iter().map(expr_src).collect();
            format!("{name}({})", args.join(", "))
        }
        ExprKind::Index(b, i) => format!("{}[{}]", expr_src(b), expr_src(i)),
        ExprKind::PostIncDec(op, x) => format!("({}{})", expr_src(x), op.symbol()),
        ExprKind::PreIncDec(op, x) => format!("({}{})", op.symbol(), expr_src(x)),
        ExprKind::Ternary(c, t, f) => format!("({} ? {} : {})", expr_src(c), expr_src(t), expr_src(f)),
    }
}
