use super::postfix::{init_assignment, rename_vars, to_postfix};
use super::token::{LinearToken, NormalizedExpr, PostfixAtom};
use crate::cparse::{Expr, Span, Stmt, StmtKind};

/// Flattens an already construct-normalized statement into tokens, each
/// paired with the source span it came from.
pub fn linearize_stmt(s: &Stmt) -> Vec<(LinearToken, Span)> {
    let mut out = Vec::new();
    emit(s, &mut out);
    out
}

fn norm(e: &Expr) -> NormalizedExpr {
    rename_vars(&to_postfix(e))
}

fn marker(text: &str) -> LinearToken {
    LinearToken::Expr(NormalizedExpr::new(vec![PostfixAtom::lit(text)]))
}

fn emit(s: &Stmt, out: &mut Vec<(LinearToken, Span)>) {
    match &s.kind {
        StmtKind::Decl(d) => {
            for v in &d.declarators {
                out.push((LinearToken::Decl(d.ty.clone()), v.span));
                if let Some(init) = &v.init {
                    let e = rename_vars(&init_assignment(&v.name, init));
                    out.push((LinearToken::Expr(e), v.span));
                }
            }
        }
        StmtKind::Expr(e) => out.push((LinearToken::Expr(norm(e)), e.span)),
        StmtKind::If { cond, then, els } => {
            out.push((LinearToken::If(norm(cond)), s.span));
            emit_body(then, out);
            if let Some(e) = els {
                out.push((LinearToken::Else, e.span));
                emit_body(e, out);
            }
        }
        StmtKind::While { cond, body } => {
            out.push((LinearToken::Loop(norm(cond)), s.span));
            emit_body(body, out);
        }
        // Only reachable when linearizing without construct normalization.
        StmtKind::DoWhile { body, cond } => {
            emit_body(body, out);
            out.push((LinearToken::Loop(norm(cond)), s.span));
            emit_body(body, out);
        }
        StmtKind::For { init, cond, step, body } => {
            for i in init {
                emit(i, out);
            }
            let c = cond.as_ref().map(norm).unwrap_or_else(|| NormalizedExpr::new(vec![PostfixAtom::lit("1")]));
            out.push((LinearToken::Loop(c), s.span));
            out.push((LinearToken::BlockOpen, body.span));
            match &body.kind {
                StmtKind::Block(stmts) => stmts.iter().for_each(|x| emit(x, out)),
                _ => emit(body, out),
            }
            for e in step {
                out.push((LinearToken::Expr(norm(e)), e.span));
            }
            out.push((LinearToken::BlockClose, body.span.end()));
        }
        StmtKind::Return(v) => out.push((LinearToken::Return(v.as_ref().map(norm)), s.span)),
        StmtKind::Block(stmts) => {
            out.push((LinearToken::BlockOpen, s.span));
            for x in stmts {
                emit(x, out);
            }
            out.push((LinearToken::BlockClose, s.span.end()));
        }
        StmtKind::Break => out.push((marker("break"), s.span)),
        StmtKind::Continue => out.push((marker("continue"), s.span)),
    }
}

/// Bodies always appear between block tokens.
fn emit_body(s: &Stmt, out: &mut Vec<(LinearToken, Span)>) {
    if matches!(s.kind, StmtKind::Block(_)) {
        emit(s, out);
    } else {
        out.push((LinearToken::BlockOpen, s.span));
        emit(s, out);
        out.push((LinearToken::BlockClose, s.span.end()));
    }
}

/// Sorts each maximal run of adjacent `DECL` tokens by type. Adjacent bare
/// declarations have no observable order.
pub(crate) fn sort_decl_runs(tokens: &mut [(LinearToken, Span)]) {
    let mut i = 0;
    while i < tokens.len() {
        if matches!(tokens[i].0, LinearToken::Decl(_)) {
            let start = i;
            while i < tokens.len() && matches!(tokens[i].0, LinearToken::Decl(_)) {
                i += 1;
            }
            tokens[start..i].sort_by(|a, b| match (&a.0, &b.0) {
                (LinearToken::Decl(x), LinearToken::Decl(y)) => x.cmp(y),
                _ => std::cmp::Ordering::Equal,
            });
        } else {
            i += 1;
        }
    }
}
