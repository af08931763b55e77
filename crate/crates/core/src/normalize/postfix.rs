use std::collections::HashMap;

use super::token::{NormalizedExpr, PostfixAtom};
use crate::cparse::{AssignOp, Expr, ExprKind, IncDec, Initializer, UnaryOp};

/// Postorder emission of an expression. Identifiers stay as
/// [`PostfixAtom::Ident`] until [`rename_vars`].
pub fn to_postfix(e: &Expr) -> NormalizedExpr {
    let mut out = Vec::new();
    emit(e, &mut out);
    NormalizedExpr::new(out)
}

fn unary_symbol(op: &UnaryOp) -> String {
    match op {
        UnaryOp::Neg => "neg".into(),
        UnaryOp::Plus => "pos".into(),
        UnaryOp::Not => "!".into(),
        UnaryOp::BitNot => "~".into(),
        UnaryOp::AddrOf => "addr".into(),
        UnaryOp::Deref => "deref".into(),
        UnaryOp::Sizeof => "sizeof".into(),
        UnaryOp::Cast(t) => format!("({})", t.replace(' ', "_")),
    }
}

fn emit(e: &Expr, out: &mut Vec<PostfixAtom>) {
    match &e.kind {
        ExprKind::Int(t) | ExprKind::Float(t) | ExprKind::Char(t) | ExprKind::Str(t) => {
            out.push(PostfixAtom::Literal(t.clone()))
        }
        ExprKind::SizeofType(t) => out.push(PostfixAtom::Literal(format!("sizeof({})", t.replace(' ', "_")))),
        ExprKind::Ident(name) => out.push(PostfixAtom::Ident(name.clone())),
        ExprKind::Unary(op, x) => {
            emit(x, out);
            out.push(PostfixAtom::Operator { symbol: unary_symbol(op), arity: 1 });
        }
        ExprKind::Binary(op, l, r) => {
            emit(l, out);
            emit(r, out);
            out.push(PostfixAtom::op(op.symbol(), 2));
        }
        ExprKind::Assign(op, l, r) => {
            emit(r, out);
            emit(l, out);
            out.push(PostfixAtom::Operator { symbol: AssignOp::symbol(*op), arity: 2 });
        }
        ExprKind::Call(name, args) => {
            for a in args {
                emit(a, out);
            }
            out.push(PostfixAtom::Call { name: name.clone(), argc: args.len() as u32 });
        }
        ExprKind::Index(b, i) => {
            emit(b, out);
            emit(i, out);
            out.push(PostfixAtom::op("[]", 2));
        }
        ExprKind::PostIncDec(op, x) => {
            emit(x, out);
            let sym = match op {
                IncDec::Inc => "post++",
                IncDec::Dec => "post--",
            };
            out.push(PostfixAtom::op(sym, 1));
        }
        ExprKind::PreIncDec(op, x) => {
            emit(x, out);
            let sym = match op {
                IncDec::Inc => "pre++",
                IncDec::Dec => "pre--",
            };
            out.push(PostfixAtom::op(sym, 1));
        }
        ExprKind::Ternary(c, t, f) => {
            emit(c, out);
            emit(t, out);
            emit(f, out);
            out.push(PostfixAtom::op("?:", 3));
        }
    }
}

/// Postfix form of `target = initializer`, as produced for a declaration
/// with an initializer.
pub fn init_assignment(target: &str, init: &Initializer) -> NormalizedExpr {
    let mut out = Vec::new();
    emit_init(init, &mut out);
    out.push(PostfixAtom::Ident(target.to_string()));
    out.push(PostfixAtom::op("=", 2));
    NormalizedExpr::new(out)
}

fn emit_init(init: &Initializer, out: &mut Vec<PostfixAtom>) {
    match init {
        Initializer::Expr(e) => emit(e, out),
        Initializer::List(items, _) => {
            for i in items {
                emit_init(i, out);
            }
            out.push(PostfixAtom::op("{}", items.len() as u32));
        }
    }
}

/// Replaces identifiers by their first-use rank within this expression.
pub fn rename_vars(e: &NormalizedExpr) -> NormalizedExpr {
    let mut ranks: HashMap<&str, u32> = HashMap::new();
    let atoms = e
        .atoms()
        .iter()
        .map(|a| match a {
            PostfixAtom::Ident(name) => {
                let next = ranks.len() as u32 + 1;
                PostfixAtom::Var(*ranks.entry(name.as_str()).or_insert(next))
            }
            other => other.clone(),
        })
        .collect();
    NormalizedExpr::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cparse::{parse_str, StmtKind};
    use proptest::prelude::*;

    fn expr(src: &str) -> Expr {
        let ast = parse_str(&format!("int main(){{ {src}; }}")).unwrap();
        let StmtKind::Block(b) = &ast.functions[0].body.kind else { unreachable!() };
        let StmtKind::Expr(e) = &b[0].kind else { unreachable!() };
        e.clone()
    }

    fn post(src: &str) -> String {
        to_postfix(&expr(src)).to_string()
    }

    fn norm(src: &str) -> String {
        rename_vars(&to_postfix(&expr(src))).to_string()
    }

    #[test]
    fn postorder_emission() {
        assert_eq!(post("a + b / a"), "$a $b $a / +");
        assert_eq!(post("5"), "5");
        assert_eq!(post("f(x, y+1)"), "$x $y 1 + f/2");
        assert_eq!(post("x = c ? -y : z[2]"), "$c $y neg $z 2 [] ?: $x =");
    }

    #[test]
    fn renaming_is_per_expression() {
        assert_eq!(norm("a + b / a"), "v1 v2 v1 / +");
        assert_eq!(norm("b + a / b"), "v1 v2 v1 / +");
        assert_eq!(norm("1 + 2"), "1 2 +");
    }

    /// Independent evaluator: interprets postfix over integers and compares
    /// with direct recursive evaluation of the AST.
    fn eval_ast(e: &Expr, env: &HashMap<String, i64>) -> i64 {
        match &e.kind {
            ExprKind::Int(t) => t.parse().unwrap(),
            ExprKind::Ident(n) => env[n],
            ExprKind::Binary(op, l, r) => {
                let (a, b) = (eval_ast(l, env), eval_ast(r, env));
                match op.symbol() {
                    "+" => a.wrapping_add(b),
                    "-" => a.wrapping_sub(b),
                    "*" => a.wrapping_mul(b),
                    _ => unreachable!(),
                }
            }
            ExprKind::Unary(UnaryOp::Neg, x) => eval_ast(x, env).wrapping_neg(),
            ExprKind::Call(_, args) => args.iter().map(|a| eval_ast(a, env)).fold(7, |acc, v| acc.wrapping_mul(31).wrapping_add(v)),
            _ => unreachable!(),
        }
    }

    fn eval_postfix(p: &NormalizedExpr, env: &HashMap<String, i64>) -> i64 {
        let mut stack: Vec<i64> = Vec::new();
        for atom in p.atoms() {
            match atom {
                PostfixAtom::Literal(t) => stack.push(t.parse().unwrap()),
                PostfixAtom::Ident(n) => stack.push(env[n]),
                PostfixAtom::Operator { symbol, arity: 1 } if symbol == "neg" => {
                    let v = stack.pop().unwrap();
                    stack.push(v.wrapping_neg());
                }
                PostfixAtom::Operator { symbol, arity: 2 } => {
                    let b = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    stack.push(match symbol.as_str() {
                        "+" => a.wrapping_add(b),
                        "-" => a.wrapping_sub(b),
                        "*" => a.wrapping_mul(b),
                        _ => unreachable!(),
                    });
                }
                PostfixAtom::Call { argc, .. } => {
                    let args = stack.split_off(stack.len() - *argc as usize);
                    stack.push(args.into_iter().fold(7, |acc, v| acc.wrapping_mul(31).wrapping_add(v)));
                }
                other => unreachable!("{other:?}"),
            }
        }
        assert_eq!(stack.len(), 1);
        stack[0]
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0i64..50).prop_map(|v| v.to_string()),
            prop::sample::select(vec!["a", "b", "c"]).prop_map(str::to_string),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                (inner.clone(), prop::sample::select(vec!["+", "-", "*"]), inner.clone())
                    .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
                inner.clone().prop_map(|x| format!("-({x})")),
                prop::collection::vec(inner, 0..3).prop_map(|args| format!("g({})", args.join(", "))),
            ]
        })
    }

    proptest! {
        #[test]
        fn postfix_is_valid_and_evaluates_like_the_tree(src in arb_expr(), a in -9i64..9, b in -9i64..9, c in -9i64..9) {
            let e = expr(&src);
            let p = to_postfix(&e);
            prop_assert!(p.is_valid_postfix());
            prop_assert!(rename_vars(&p).is_valid_postfix());
            let env: HashMap<String, i64> = [("a", a), ("b", b), ("c", c)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            prop_assert_eq!(eval_postfix(&p, &env), eval_ast(&e, &env));
        }

        #[test]
        fn renamed_ranks_are_contiguous(src in arb_expr()) {
            let r = rename_vars(&to_postfix(&expr(&src)));
            let mut next = 1;
            for atom in r.atoms() {
                if let PostfixAtom::Var(k) = atom {
                    prop_assert!(*k <= next);
                    if *k == next { next += 1; }
                }
            }
        }
    }
}
