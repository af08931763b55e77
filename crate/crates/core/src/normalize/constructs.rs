//! Construct normalization: every loop becomes a `while`, increments and
//! compound assignments become plain assignments, and every branch or loop
//! body becomes a block.

use crate::cparse::{AssignOp, BinOp, Expr, ExprKind, IncDec, Stmt, StmtKind};

/// Lowers one statement. `for` and `do`-`while` expand into several
/// statements, hence the list.
pub fn normalize_constructs(s: &Stmt) -> Vec<Stmt> {
    let span = s.span;
    match &s.kind {
        StmtKind::Decl(d) => {
            let mut d = d.clone();
            for v in &mut d.declarators {
                if let Some(crate::cparse::Initializer::Expr(e)) = &mut v.init {
                    *e = lower_expr(e);
                }
            }
            vec![Stmt { kind: StmtKind::Decl(d), span }]
        }
        StmtKind::Expr(e) => split_expr_stmt(e),
        StmtKind::If { cond, then, els } => vec![Stmt {
            kind: StmtKind::If {
                cond: lower_expr(cond),
                then: Box::new(as_block(then)),
                els: els.as_ref().map(|e| Box::new(as_block(e))),
            },
            span,
        }],
        StmtKind::While { cond, body } => vec![Stmt {
            kind: StmtKind::While { cond: lower_expr(cond), body: Box::new(as_block(body)) },
            span,
        }],
        StmtKind::DoWhile { body, cond } => {
            let body = as_block(body);
            let mut out = block_contents(&body);
            out.push(Stmt {
                kind: StmtKind::While { cond: lower_expr(cond), body: Box::new(body) },
                span,
            });
            out
        }
        StmtKind::For { init, cond, step, body } => {
            let mut out: Vec<Stmt> = init.iter().flat_map(normalize_constructs).collect();
            let cond = match cond {
                Some(c) => lower_expr(c),
                None => Expr { kind: ExprKind::Int("1".into()), span },
            };
            let mut stmts = block_contents(&as_block(body));
            for e in step {
                stmts.extend(split_expr_stmt(e));
            }
            let block_span = body.span;
            out.push(Stmt {
                kind: StmtKind::While {
                    cond,
                    body: Box::new(Stmt { kind: StmtKind::Block(stmts), span: block_span }),
                },
                span,
            });
            out
        }
        StmtKind::Return(v) => vec![Stmt { kind: StmtKind::Return(v.as_ref().map(lower_expr)), span }],
        StmtKind::Block(stmts) => {
            vec![Stmt { kind: StmtKind::Block(stmts.iter().flat_map(normalize_constructs).collect()), span }]
        }
        StmtKind::Break | StmtKind::Continue => vec![s.clone()],
    }
}

/// Normalizes a body and guarantees the result is a single block.
fn as_block(s: &Stmt) -> Stmt {
    let mut lowered = normalize_constructs(s);
    if lowered.len() == 1 && matches!(lowered[0].kind, StmtKind::Block(_)) {
        return lowered.pop().expect("one element");
    }
    Stmt { kind: StmtKind::Block(lowered), span: s.span }
}

fn block_contents(block: &Stmt) -> Vec<Stmt> {
    match &block.kind {
        StmtKind::Block(stmts) => stmts.clone(),
        _ => vec![block.clone()],
    }
}

/// Top-level comma expressions become separate statements; a bare
/// increment or decrement becomes `v = v + 1` / `v = v - 1`.
fn split_expr_stmt(e: &Expr) -> Vec<Stmt> {
    if let ExprKind::Binary(BinOp::Comma, l, r) = &e.kind {
        let mut out = split_expr_stmt(l);
        out.extend(split_expr_stmt(r));
        return out;
    }
    let lowered = match &e.kind {
        ExprKind::PostIncDec(op, target) | ExprKind::PreIncDec(op, target) => {
            let target = lower_expr(target);
            let arith = match op {
                IncDec::Inc => BinOp::Add,
                IncDec::Dec => BinOp::Sub,
            };
            let one = Expr { kind: ExprKind::Int("1".into()), span: e.span };
            let sum = Expr {
                kind: ExprKind::Binary(arith, Box::new(target.clone()), Box::new(one)),
                span: e.span,
            };
            Expr { kind: ExprKind::Assign(AssignOp::Set, Box::new(target), Box::new(sum)), span: e.span }
        }
        _ => lower_expr(e),
    };
    vec![Stmt { span: lowered.span, kind: StmtKind::Expr(lowered) }]
}

/// Rewrites `v op= e` into `v = v op e` throughout an expression.
pub(crate) fn lower_expr(e: &Expr) -> Expr {
    let span = e.span;
    let b = |x: &Expr| Box::new(lower_expr(x));
    let kind = match &e.kind {
        ExprKind::Assign(AssignOp::Compound(op), l, r) => {
            let target = lower_expr(l);
            let value = Expr {
                kind: ExprKind::Binary(*op, Box::new(target.clone()), b(r)),
                span,
            };
            ExprKind::Assign(AssignOp::Set, Box::new(target), Box::new(value))
        }
        ExprKind::Assign(AssignOp::Set, l, r) => ExprKind::Assign(AssignOp::Set, b(l), b(r)),
        ExprKind::Unary(op, x) => ExprKind::Unary(op.clone(), b(x)),
        ExprKind::Binary(op, l, r) => ExprKind::Binary(*op, b(l), b(r)),
        ExprKind::Call(name, args) => ExprKind::Call(name.clone(), args.iter().map(lower_expr).collect()),
        ExprKind::Index(x, i) => ExprKind::Index(b(x), b(i)),
        ExprKind::PostIncDec(op, x) => ExprKind::PostIncDec(*op, b(x)),
        ExprKind::PreIncDec(op, x) => ExprKind::PreIncDec(*op, b(x)),
        ExprKind::Ternary(c, t, f) => ExprKind::Ternary(b(c), b(t), b(f)),
        leaf => leaf.clone(),
    };
    Expr { kind, span }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cparse::{expr_src, parse_str};

    fn body_of(src: &str) -> Vec<Stmt> {
        let ast = parse_str(&format!("int main(){{ {src} }}")).unwrap();
        match &ast.functions[0].body.kind {
            StmtKind::Block(s) => s.clone(),
            _ => unreachable!(),
        }
    }

    fn render(stmts: &[Stmt]) -> String {
        let mut out = Vec::new();
        for s in stmts {
            out.push(match &s.kind {
                StmtKind::Expr(e) => format!("{};", expr_src(e)),
                StmtKind::While { cond, body } => format!("while {} {{ {} }}", expr_src(cond), match &body.kind {
                    StmtKind::Block(b) => render(b),
                    _ => unreachable!("bodies are blocks"),
                }),
                StmtKind::Block(b) => format!("{{ {} }}", render(b)),
                other => format!("{other:?}"),
            });
        }
        out.join(" ")
    }

    fn lower(src: &str) -> String {
        let stmts: Vec<Stmt> = body_of(src).iter().flat_map(normalize_constructs).collect();
        render(&stmts)
    }

    #[test]
    fn for_becomes_init_and_while() {
        assert_eq!(
            lower("for(i=0;i<n;i++) s=s+i;"),
            "(i = 0); while (i < n) { (s = (s + i)); (i = (i + 1)); }"
        );
        assert_eq!(lower("for(i=0;i<n;i++) s=s+i;"), lower("i=0; while(i<n){s=s+i; i=i+1;}"));
    }

    #[test]
    fn increments_and_compound_assignments() {
        assert_eq!(lower("x++;"), "(x = (x + 1));");
        assert_eq!(lower("--x;"), "(x = (x - 1));");
        assert_eq!(lower("x += 2 * y;"), "(x = (x + (2 * y)));");
    }

    #[test]
    fn do_while_duplicates_body() {
        assert_eq!(lower("do{a=a*2;}while(a<8);"), "(a = (a * 2)); while (a < 8) { (a = (a * 2)); }");
    }

    #[test]
    fn missing_for_condition_is_one() {
        assert_eq!(lower("for(;;) break;"), "while 1 { Break }");
    }

    #[test]
    fn comma_statements_split() {
        assert_eq!(lower("a = 1, b++;"), "(a = 1); (b = (b + 1));");
        assert_eq!(lower("for(i=0, j=5; i<j; i++, j--) {}"), lower("i=0; j=5; while(i<j){i++; j--;}"));
    }

    #[test]
    fn idempotent() {
        let src = "for(i=0;i<n;i++){ if(i%2) s+=i; else { do { s--; } while(s > 100); } } x++;";
        let once: Vec<Stmt> = body_of(src).iter().flat_map(normalize_constructs).collect();
        let twice: Vec<Stmt> = once.iter().flat_map(normalize_constructs).collect();
        assert_eq!(once, twice);
    }
}
