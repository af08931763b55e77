use crate::normalize::{LinearToken, NormalizedExpr, PostfixAtom};

/// Abstract description of a token: construct name plus the shape of its
/// expression. Identifiers, callee names and literals never appear.
pub fn describe_token(t: &LinearToken) -> String {
    match t {
        LinearToken::FuncHeader { arity } => format!("a function taking {}", plural(*arity as usize, "argument")),
        LinearToken::Decl(ty) => format!("a declaration of type {}", ty.replace('_', " ")),
        LinearToken::Expr(e) => with_shape("a statement", e),
        LinearToken::If(e) => with_shape("a conditional check", e),
        LinearToken::Else => "an else branch".to_string(),
        LinearToken::Loop(e) => with_shape("a loop", e),
        LinearToken::Return(None) => "a return statement".to_string(),
        LinearToken::Return(Some(e)) => with_shape("a return statement", e),
        LinearToken::BlockOpen => "the start of a block".to_string(),
        LinearToken::BlockClose => "the end of a block".to_string(),
    }
}

fn with_shape(construct: &str, e: &NormalizedExpr) -> String {
    let shape = expr_shape(e);
    if shape.is_empty() {
        construct.to_string()
    } else {
        format!("{construct} {shape}")
    }
}

/// For example `using %, == and &&` or `assigning a value with a function
/// call taking 2 arguments`.
pub fn expr_shape(e: &NormalizedExpr) -> String {
    let atoms = e.atoms();
    let assigns = matches!(atoms.last(), Some(PostfixAtom::Operator { symbol, .. }) if symbol == "=");
    if matches!(atoms, [PostfixAtom::Literal(l)] if l == "break" || l == "continue") {
        return "that leaves or restarts a loop".to_string();
    }
    let mut ops: Vec<String> = Vec::new();
    let mut calls: Vec<u32> = Vec::new();
    for a in atoms {
        match a {
            PostfixAtom::Operator { symbol, .. } if symbol == "=" => {}
            PostfixAtom::Operator { symbol, arity } => {
                let s = operator_name(symbol, *arity);
                if !ops.contains(&s) {
                    ops.push(s);
                }
            }
            PostfixAtom::Call { argc, .. } => {
                if !calls.contains(argc) {
                    calls.push(*argc);
                }
            }
            _ => {}
        }
    }
    let vars = {
        let mut v: Vec<u32> = atoms
            .iter()
            .filter_map(|a| if let PostfixAtom::Var(k) = a { Some(*k) } else { None })
            .collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let mut parts = Vec::new();
    if !ops.is_empty() {
        parts.push(format!("using {}", join(&ops)));
    }
    for argc in calls {
        parts.push(format!("with a function call taking {}", plural(argc as usize, "argument")));
    }
    if parts.is_empty() && !assigns && vars > 0 {
        parts.push(format!("involving {}", plural(vars, "variable")));
    }
    let body = parts.join(" ");
    match (assigns, body.is_empty()) {
        (true, true) => "assigning a value".to_string(),
        (true, false) => format!("assigning a value {body}"),
        (false, _) => body,
    }
}

fn operator_name(symbol: &str, arity: u32) -> String {
    match symbol {
        "neg" => "unary -".to_string(),
        "pos" => "unary +".to_string(),
        "addr" => "&".to_string(),
        "deref" => "unary *".to_string(),
        "[]" => "indexing".to_string(),
        "?:" => "?:".to_string(),
        "{}" => format!("an initializer list of {}", plural(arity as usize, "value")),
        s if s.starts_with("pre") || s.starts_with("post") => s.trim_start_matches("pre").trim_start_matches("post").to_string(),
        s if s.starts_with('(') => format!("a cast to {}", s.trim_matches(|c| c == '(' || c == ')').replace('_', " ")),
        s => s.to_string(),
    }
}

fn join(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn plural(n: usize, noun: &str) -> String {
    if n == 1 {
        format!("1 {noun}")
    } else {
        format!("{n} {noun}s")
    }
}
