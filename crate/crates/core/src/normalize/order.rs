use std::collections::HashSet;

use crate::cparse::{Ast, Expr, ExprKind, FunctionDef, Initializer, Stmt, StmtKind};

/// First-use order of the functions reachable from the root, plus the names
/// of functions that are never reached (in definition order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallOrder {
    pub order: Vec<String>,
    pub dropped: Vec<String>,
    pub no_main: bool,
}

/// Depth-first walk of call expressions starting at `main` (or, without a
/// `main`, at the first defined function). Callees are visited in the
/// textual order of their first call within each body.
pub fn call_order(ast: &Ast) -> CallOrder {
    let root = ast.function("main").or_else(|| ast.functions.first());
    let mut order = Vec::new();
    let mut seen = HashSet::new();
    if let Some(root) = root {
        visit(ast, root, &mut seen, &mut order);
    }
    let dropped = ast
        .functions
        .iter()
        .filter(|f| !seen.contains(f.name.as_str()))
        .map(|f| f.name.clone())
        .collect();
    CallOrder { order, dropped, no_main: ast.no_main }
}

fn visit<'a>(ast: &'a Ast, f: &'a FunctionDef, seen: &mut HashSet<&'a str>, order: &mut Vec<String>) {
    if !seen.insert(f.name.as_str()) {
        return;
    }
    order.push(f.name.clone());
    let mut callees = Vec::new();
    stmt_calls(&f.body, &mut callees);
    for name in callees {
        if let Some(callee) = ast.function(name) {
            visit(ast, callee, seen, order);
        }
    }
}

fn stmt_calls<'a>(s: &'a Stmt, out: &mut Vec<&'a str>) {
    match &s.kind {
        StmtKind::Decl(d) => {
            for v in &d.declarators {
                for e in v.dims.iter().flatten() {
                    expr_calls(e, out);
                }
                if let Some(init) = &v.init {
                    init_calls(init, out);
                }
            }
        }
        StmtKind::Expr(e) => expr_calls(e, out),
        StmtKind::If { cond, then, els } => {
            expr_calls(cond, out);
            stmt_calls(then, out);
            if let Some(e) = els {
                stmt_calls(e, out);
            }
        }
        StmtKind::While { cond, body } => {
            expr_calls(cond, out);
            stmt_calls(body, out);
        }
        StmtKind::DoWhile { body, cond } => {
            stmt_calls(body, out);
            expr_calls(cond, out);
        }
        StmtKind::For { init, cond, step, body } => {
            init.iter().for_each(|s| stmt_calls(s, out));
            if let Some(c) = cond {
                expr_calls(c, out);
            }
            step.iter().for_each(|e| expr_calls(e, out));
            stmt_calls(body, out);
        }
        StmtKind::Return(v) => {
            if let Some(e) = v {
                expr_calls(e, out);
            }
        }
        StmtKind::Block(stmts) => stmts.iter().for_each(|s| stmt_calls(s, out)),
        StmtKind::Break | StmtKind::Continue => {}
    }
}

fn init_calls<'a>(init: &'a Initializer, out: &mut Vec<&'a str>) {
    match init {
        Initializer::Expr(e) => expr_calls(e, out),
        Initializer::List(items, _) => items.iter().for_each(|i| init_calls(i, out)),
    }
}

/// Textual pre-order: a call's name precedes calls nested in its arguments.
fn expr_calls<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
    match &e.kind {
        ExprKind::Call(name, args) => {
            out.push(name);
            args.iter().for_each(|a| expr_calls(a, out));
        }
        ExprKind::Unary(_, x) | ExprKind::PostIncDec(_, x) | ExprKind::PreIncDec(_, x) => expr_calls(x, out),
        ExprKind::Binary(_, l, r) | ExprKind::Assign(_, l, r) | ExprKind::Index(l, r) => {
            expr_calls(l, out);
            expr_calls(r, out);
        }
        ExprKind::Ternary(c, t, f) => {
            expr_calls(c, out);
            expr_calls(t, out);
            expr_calls(f, out);
        }
        _ => {}
    }
}
