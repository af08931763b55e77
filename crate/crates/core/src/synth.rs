//! Seeded generators for synthetic C programs and corpora.
//!
//! Programs are built as a small abstract model and rendered to source, so
//! the same program can be printed with different variable names, loop
//! forms, increment spellings and definition orders. Used by tests, the
//! acceptance suite and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::normalize::normalize_str;

pub type SynRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SynRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const ARITH: [&str; 5] = ["+", "-", "*", "/", "%"];
const COMPARE: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];
const LOGIC: [&str; 2] = ["&&", "||"];

const NAME_POOL: [&str; 16] = [
    "count", "total", "idx", "tmp", "acc", "n", "m", "k", "val", "res", "lo", "hi", "step", "sum", "cur", "prev",
];

#[derive(Debug, Clone, PartialEq)]
pub enum SynExpr {
    Var(usize),
    Lit(i64),
    Bin(&'static str, Box<SynExpr>, Box<SynExpr>),
    /// Call of the function at this index of the program.
    Call(usize, Vec<SynExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynStmt {
    Assign(usize, SynExpr),
    /// `v++`, or `v = v + 1` when `plain`.
    Incr { var: usize, plain: bool },
    Print(Vec<SynExpr>),
    CallStmt(usize, Vec<SynExpr>),
    If { cond: SynExpr, then: Vec<SynStmt>, els: Option<Vec<SynStmt>> },
    While { cond: SynExpr, body: Vec<SynStmt> },
    /// Counting loop, printed as `for` or as an initialization plus `while`.
    Counted { var: usize, from: SynExpr, cond: SynExpr, body: Vec<SynStmt>, as_for: bool, plain_step: bool },
    Return(SynExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynFunction {
    pub params: usize,
    pub locals: usize,
    pub body: Vec<SynStmt>,
}

impl SynFunction {
    fn vars(&self) -> usize {
        self.params + self.locals
    }
}

/// Function 0 is `main`; function `i > 0` is `f{i}` and only calls
/// functions with a larger index.
#[derive(Debug, Clone, PartialEq)]
pub struct SynProgram {
    pub functions: Vec<SynFunction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub max_helpers: usize,
    pub max_params: usize,
    pub max_locals: usize,
    /// Statements per block, inclusive range.
    pub stmts: (usize, usize),
    pub max_depth: usize,
    pub expr_depth: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_helpers: 2, max_params: 2, max_locals: 4, stmts: (2, 5), max_depth: 2, expr_depth: 2 }
    }
}

/// How a program is printed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Style {
    /// Per-function variable names; `v0, v1, ...` when absent.
    pub names: Option<Vec<Vec<String>>>,
    /// Print every counting loop in the other form.
    pub flip_loops: bool,
    /// Print every increment in the other spelling.
    pub flip_increments: bool,
    /// Definition order of the functions; prototypes are emitted first.
    pub definition_order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Renamed,
    LoopsSwapped,
    IncrementsSwapped,
    DefinitionsReordered,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::Renamed, Variant::LoopsSwapped, Variant::IncrementsSwapped, Variant::DefinitionsReordered];
}

struct Gen<'a> {
    rng: &'a mut SynRng,
    cfg: &'a GenConfig,
    funcs: usize,
    current: usize,
    vars: usize,
    params: Vec<usize>,
}

impl Gen<'_> {
    fn var(&mut self) -> usize {
        self.rng.gen_range(0..self.vars)
    }

    fn lit(&mut self) -> SynExpr {
        SynExpr::Lit(self.rng.gen_range(0..20))
    }

    fn leaf(&mut self) -> SynExpr {
        if self.rng.gen_bool(0.6) {
            SynExpr::Var(self.var())
        } else {
            self.lit()
        }
    }

    fn arith(&mut self, depth: usize) -> SynExpr {
        if depth == 0 || self.rng.gen_bool(0.35) {
            return self.leaf();
        }
        if self.current + 1 < self.funcs && self.rng.gen_bool(0.15) {
            return self.call();
        }
        let op = *ARITH.choose(self.rng).expect("non-empty");
        SynExpr::Bin(op, Box::new(self.arith(depth - 1)), Box::new(self.arith(depth - 1)))
    }

    fn call(&mut self) -> SynExpr {
        let callee = self.rng.gen_range(self.current + 1..self.funcs);
        let args = (0..self.params[callee]).map(|_| self.leaf()).collect();
        SynExpr::Call(callee, args)
    }

    fn cond(&mut self) -> SynExpr {
        let op = *COMPARE.choose(self.rng).expect("non-empty");
        let c = SynExpr::Bin(op, Box::new(SynExpr::Var(self.var())), Box::new(self.arith(1)));
        if self.rng.gen_bool(0.2) {
            let op2 = *COMPARE.choose(self.rng).expect("non-empty");
            let d = SynExpr::Bin(op2, Box::new(SynExpr::Var(self.var())), Box::new(self.lit()));
            SynExpr::Bin(LOGIC.choose(self.rng).expect("non-empty"), Box::new(c), Box::new(d))
        } else {
            c
        }
    }

    fn block(&mut self, depth: usize) -> Vec<SynStmt> {
        let (lo, hi) = self.cfg.stmts;
        let n = self.rng.gen_range(lo..=hi.max(lo));
        (0..n).map(|_| self.stmt(depth)).collect()
    }

    fn stmt(&mut self, depth: usize) -> SynStmt {
        let nested = depth < self.cfg.max_depth;
        let roll = self.rng.gen_range(0..100);
        match roll {
            0..=29 => SynStmt::Assign(self.var(), self.arith(self.cfg.expr_depth)),
            30..=41 => SynStmt::Incr { var: self.var(), plain: self.rng.gen_bool(0.5) },
            42..=51 => {
                let k = self.rng.gen_range(1..=2);
                SynStmt::Print((0..k).map(|_| SynExpr::Var(self.var())).collect())
            }
            52..=57 if self.current + 1 < self.funcs => match self.call() {
                SynExpr::Call(f, args) => SynStmt::CallStmt(f, args),
                _ => unreachable!(),
            },
            58..=73 if nested => {
                let cond = self.cond();
                let then = self.block(depth + 1);
                let els = if self.rng.gen_bool(0.4) { Some(self.block(depth + 1)) } else { None };
                SynStmt::If { cond, then, els }
            }
            74..=81 if nested => {
                let cond = self.cond();
                SynStmt::While { cond, body: self.block(depth + 1) }
            }
            82..=99 if nested => {
                let var = self.var();
                let from = self.lit();
                let bound = self.arith(1);
                SynStmt::Counted {
                    var,
                    from,
                    cond: SynExpr::Bin("<", Box::new(SynExpr::Var(var)), Box::new(bound)),
                    body: self.block(depth + 1),
                    as_for: self.rng.gen_bool(0.5),
                    plain_step: self.rng.gen_bool(0.5),
                }
            }
            _ => SynStmt::Assign(self.var(), self.arith(self.cfg.expr_depth)),
        }
    }
}

/// Random well-formed program. Every helper is reachable from `main`.
pub fn random_program(rng: &mut SynRng, cfg: &GenConfig) -> SynProgram {
    let funcs = 1 + rng.gen_range(0..=cfg.max_helpers);
    let params: Vec<usize> =
        (0..funcs).map(|i| if i == 0 { 0 } else { rng.gen_range(0..=cfg.max_params) }).collect();
    let mut functions = Vec::with_capacity(funcs);
    for (i, &p) in params.iter().enumerate() {
        let locals = rng.gen_range(1..=cfg.max_locals.max(1));
        let mut g = Gen { rng: &mut *rng, cfg, funcs, current: i, vars: p + locals, params: params.clone() };
        let mut body = g.block(0);
        if i > 0 {
            body.push(SynStmt::Return(g.arith(1)));
        }
        functions.push(SynFunction { params: p, locals, body });
    }
    let mut p = SynProgram { functions };
    p.connect(rng);
    p
}

impl SynProgram {
    /// Adds a call from `main` to every helper no earlier function calls.
    fn connect(&mut self, rng: &mut SynRng) {
        for callee in 1..self.functions.len() {
            let called = self.functions[..callee].iter().any(|f| calls_in(&f.body).contains(&callee));
            if !called {
                let args = (0..self.functions[callee].params)
                    .map(|_| SynExpr::Lit(rng.gen_range(0..10)))
                    .collect();
                self.functions[0].body.push(SynStmt::CallStmt(callee, args));
            }
        }
    }

    pub fn render(&self, style: &Style) -> String {
        let mut out = String::new();
        let order: Vec<usize> = match &style.definition_order {
            Some(o) => {
                for i in 1..self.functions.len() {
                    out.push_str(&self.signature(i, style));
                    out.push_str(";\n");
                }
                out.push('\n');
                o.clone()
            }
            None => (1..self.functions.len()).chain([0]).collect(),
        };
        for (k, &i) in order.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            self.render_function(i, style, &mut out);
        }
        out
    }

    pub fn to_source(&self) -> String {
        self.render(&Style::default())
    }

    /// Source of one equivalence-preserving variant.
    pub fn variant(&self, v: Variant, rng: &mut SynRng) -> String {
        let style = match v {
            Variant::Renamed => Style { names: Some(self.fresh_names(rng)), ..Style::default() },
            Variant::LoopsSwapped => Style { flip_loops: true, ..Style::default() },
            Variant::IncrementsSwapped => Style { flip_increments: true, ..Style::default() },
            Variant::DefinitionsReordered => {
                let mut o: Vec<usize> = (0..self.functions.len()).collect();
                o.shuffle(rng);
                if o.len() > 1 && o == (1..self.functions.len()).chain([0]).collect::<Vec<_>>() {
                    o.rotate_left(1);
                }
                Style { definition_order: Some(o), ..Style::default() }
            }
        };
        self.render(&style)
    }

    fn fresh_names(&self, rng: &mut SynRng) -> Vec<Vec<String>> {
        self.functions
            .iter()
            .map(|f| {
                let mut pool: Vec<String> = NAME_POOL.iter().map(|s| s.to_string()).collect();
                pool.shuffle(rng);
                pool.truncate(f.vars());
                for extra in pool.len()..f.vars() {
                    pool.push(format!("w{extra}"));
                }
                pool
            })
            .collect()
    }

    pub fn function_name(i: usize) -> String {
        if i == 0 {
            "main".to_string()
        } else {
            format!("f{i}")
        }
    }

    fn var_name(&self, f: usize, v: usize, style: &Style) -> String {
        match &style.names {
            Some(n) => n[f][v].clone(),
            None => format!("v{v}"),
        }
    }

    fn signature(&self, i: usize, style: &Style) -> String {
        let params: Vec<String> =
            (0..self.functions[i].params).map(|v| format!("int {}", self.var_name(i, v, style))).collect();
        format!("int {}({})", Self::function_name(i), params.join(", "))
    }

    fn render_function(&self, i: usize, style: &Style, out: &mut String) {
        let f = &self.functions[i];
        out.push_str(&self.signature(i, style));
        out.push_str("\n{\n");
        if f.locals > 0 {
            let names: Vec<String> = (f.params..f.vars()).map(|v| self.var_name(i, v, style)).collect();
            out.push_str(&format!("    int {};\n", names.join(", ")));
        }
        let r = Renderer { prog: self, func: i, style };
        for s in &f.body {
            r.stmt(s, 1, out);
        }
        if i == 0 {
            out.push_str("    return 0;\n");
        }
        out.push_str("}\n");
    }

    pub fn statement_count(&self) -> usize {
        fn count(b: &[SynStmt]) -> usize {
            b.iter()
                .map(|s| {
                    1 + match s {
                        SynStmt::If { then, els, .. } => count(then) + els.as_deref().map_or(0, count),
                        SynStmt::While { body, .. } | SynStmt::Counted { body, .. } => count(body),
                        _ => 0,
                    }
                })
                .sum()
        }
        self.functions.iter().map(|f| count(&f.body)).sum()
    }

    /// One small random edit: a literal, an operator, an inserted print or a
    /// removed simple statement.
    pub fn mutate(&mut self, rng: &mut SynRng) {
        let fi = rng.gen_range(0..self.functions.len());
        let vars = self.functions[fi].vars();
        match rng.gen_range(0..4) {
            0 | 1 => {
                let total = count_exprs(&self.functions[fi].body);
                if total == 0 {
                    return;
                }
                let target = rng.gen_range(0..total);
                let mut seen = 0;
                visit_exprs(&mut self.functions[fi].body, &mut |e| {
                    if seen == target {
                        change_expr(e, rng);
                    }
                    seen += 1;
                });
            }
            2 => {
                let body = &mut self.functions[fi].body;
                let at = rng.gen_range(0..=body.len().saturating_sub(usize::from(fi > 0)));
                body.insert(at, SynStmt::Print(vec![SynExpr::Var(rng.gen_range(0..vars))]));
            }
            _ => {
                let body = &mut self.functions[fi].body;
                let simple: Vec<usize> = body
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| matches!(s, SynStmt::Assign(..) | SynStmt::Incr { .. } | SynStmt::Print(_)))
                    .map(|(i, _)| i)
                    .collect();
                if let Some(&i) = simple.choose(rng) {
                    body.remove(i);
                }
            }
        }
    }
}

fn change_expr(e: &mut SynExpr, rng: &mut SynRng) {
    match e {
        SynExpr::Lit(v) => *v = (*v + rng.gen_range(1..10)) % 20,
        SynExpr::Bin(op, _, _) => {
            let class: &[&'static str] = if ARITH.contains(op) {
                &ARITH
            } else if COMPARE.contains(op) {
                &COMPARE
            } else {
                &LOGIC
            };
            let others: Vec<&'static str> = class.iter().copied().filter(|o| o != op).collect();
            *op = others.choose(rng).expect("operator classes have two or more members");
        }
        SynExpr::Var(_) => *e = SynExpr::Bin("+", Box::new(e.clone()), Box::new(SynExpr::Lit(1))),
        SynExpr::Call(_, args) => {
            if let Some(a) = args.first_mut() {
                *a = SynExpr::Lit(rng.gen_range(0..20));
            }
        }
    }
}

fn count_exprs(b: &[SynStmt]) -> usize {
    let mut b = b.to_vec();
    let mut n = 0;
    visit_exprs(&mut b, &mut |_| n += 1);
    n
}

/// Pre-order over every expression node of the statements.
fn visit_exprs(b: &mut [SynStmt], f: &mut dyn FnMut(&mut SynExpr)) {
    fn expr(e: &mut SynExpr, f: &mut dyn FnMut(&mut SynExpr)) {
        f(e);
        match e {
            SynExpr::Bin(_, l, r) => {
                expr(l, f);
                expr(r, f);
            }
            SynExpr::Call(_, args) => args.iter_mut().for_each(|a| expr(a, f)),
            _ => {}
        }
    }
    for s in b {
        match s {
            SynStmt::Assign(_, e) | SynStmt::Return(e) => expr(e, f),
            SynStmt::Print(args) | SynStmt::CallStmt(_, args) => args.iter_mut().for_each(|a| expr(a, f)),
            SynStmt::Incr { .. } => {}
            SynStmt::If { cond, then, els } => {
                expr(cond, f);
                visit_exprs(then, f);
                if let Some(e) = els {
                    visit_exprs(e, f);
                }
            }
            SynStmt::While { cond, body } => {
                expr(cond, f);
                visit_exprs(body, f);
            }
            SynStmt::Counted { from, cond, body, .. } => {
                expr(from, f);
                expr(cond, f);
                visit_exprs(body, f);
            }
        }
    }
}

fn calls_in(b: &[SynStmt]) -> Vec<usize> {
    let mut b = b.to_vec();
    let mut out = Vec::new();
    visit_exprs(&mut b, &mut |e| {
        if let SynExpr::Call(c, _) = e {
            out.push(*c);
        }
    });
    fn stmt_calls(b: &[SynStmt], out: &mut Vec<usize>) {
        for s in b {
            match s {
                SynStmt::CallStmt(c, _) => out.push(*c),
                SynStmt::If { then, els, .. } => {
                    stmt_calls(then, out);
                    if let Some(e) = els {
                        stmt_calls(e, out);
                    }
                }
                SynStmt::While { body, .. } | SynStmt::Counted { body, .. } => stmt_calls(body, out),
                _ => {}
            }
        }
    }
    stmt_calls(&b, &mut out);
    out
}

struct Renderer<'a> {
    prog: &'a SynProgram,
    func: usize,
    style: &'a Style,
}

impl Renderer<'_> {
    fn var(&self, v: usize) -> String {
        self.prog.var_name(self.func, v, self.style)
    }

    fn expr(&self, e: &SynExpr) -> String {
        match e {
            SynExpr::Var(v) => self.var(*v),
            SynExpr::Lit(n) => n.to_string(),
            SynExpr::Bin(op, l, r) => format!("({} {op} {})", self.expr(l), self.expr(r)),
            SynExpr::Call(f, args) => self.call(*f, args),
        }
    }

    fn call(&self, f: usize, args: &[SynExpr]) -> String {
        let args: Vec<String> = args.iter().map(|a| self.expr(a)).collect();
        format!("{}({})", SynProgram::function_name(f), args.join(", "))
    }

    fn incr(&self, var: usize, plain: bool) -> String {
        let v = self.var(var);
        if plain != self.style.flip_increments {
            format!("{v} = {v} + 1")
        } else {
            format!("{v}++")
        }
    }

    fn block(&self, b: &[SynStmt], depth: usize, out: &mut String) {
        for s in b {
            self.stmt(s, depth, out);
        }
    }

    fn stmt(&self, s: &SynStmt, depth: usize, out: &mut String) {
        let pad = "    ".repeat(depth);
        match s {
            SynStmt::Assign(v, e) => out.push_str(&format!("{pad}{} = {};\n", self.var(*v), self.expr(e))),
            SynStmt::Incr { var, plain } => out.push_str(&format!("{pad}{};\n", self.incr(*var, *plain))),
            SynStmt::Print(args) => {
                let fmt = vec!["%d"; args.len()].join(" ");
                let args: Vec<String> = args.iter().map(|a| self.expr(a)).collect();
                out.push_str(&format!("{pad}printf(\"{fmt}\\n\", {});\n", args.join(", ")));
            }
            SynStmt::CallStmt(f, args) => out.push_str(&format!("{pad}{};\n", self.call(*f, args))),
            SynStmt::If { cond, then, els } => {
                out.push_str(&format!("{pad}if ({}) {{\n", self.expr(cond)));
                self.block(then, depth + 1, out);
                match els {
                    Some(e) => {
                        out.push_str(&format!("{pad}}} else {{\n"));
                        self.block(e, depth + 1, out);
                        out.push_str(&format!("{pad}}}\n"));
                    }
                    None => out.push_str(&format!("{pad}}}\n")),
                }
            }
            SynStmt::While { cond, body } => {
                out.push_str(&format!("{pad}while ({}) {{\n", self.expr(cond)));
                self.block(body, depth + 1, out);
                out.push_str(&format!("{pad}}}\n"));
            }
            SynStmt::Counted { var, from, cond, body, as_for, plain_step } => {
                let v = self.var(*var);
                let step = self.incr(*var, *plain_step);
                if *as_for != self.style.flip_loops {
                    out.push_str(&format!("{pad}for ({v} = {}; {}; {step}) {{\n", self.expr(from), self.expr(cond)));
                    self.block(body, depth + 1, out);
                } else {
                    out.push_str(&format!("{pad}{v} = {};\n", self.expr(from)));
                    out.push_str(&format!("{pad}while ({}) {{\n", self.expr(cond)));
                    self.block(body, depth + 1, out);
                    out.push_str(&format!("{pad}    {step};\n"));
                }
                out.push_str(&format!("{pad}}}\n"));
            }
            SynStmt::Return(e) => out.push_str(&format!("{pad}return {};\n", self.expr(e))),
        }
    }
}

/// One program of a mutation corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub template: usize,
    pub source: String,
    pub marks: f64,
}

/// `n` programs derived from `k` random templates by up to two mutations
/// each, assigned round-robin. Marks are the template's grade (an integer in
/// 0..=10) plus uniform noise in ±0.5.
pub fn mutation_corpus(n: usize, k: usize, seed: u64) -> Vec<CorpusEntry> {
    let mut r = rng(seed);
    let cfg = GenConfig { max_helpers: 1, stmts: (3, 5), ..GenConfig::default() };
    let templates: Vec<(SynProgram, f64)> =
        (0..k).map(|_| (random_program(&mut r, &cfg), f64::from(r.gen_range(0..=10u8)))).collect();
    (0..n)
        .map(|i| {
            let t = i % k;
            let mut p = templates[t].0.clone();
            for _ in 0..r.gen_range(0..=2) {
                p.mutate(&mut r);
            }
            let marks = templates[t].1 + r.gen_range(-0.5..=0.5);
            CorpusEntry { id: format!("s{i:03}"), template: t, source: p.to_source(), marks }
        })
        .collect()
}

/// A `main`-only program whose normalized form has at least `tokens` tokens
/// (and at most three more), one statement per source line.
pub fn sized_program(rng: &mut SynRng, tokens: usize) -> String {
    let cfg = GenConfig { max_helpers: 0, stmts: (1, 1), max_depth: 1, ..GenConfig::default() };
    let mut p = SynProgram { functions: vec![SynFunction { params: 0, locals: cfg.max_locals, body: Vec::new() }] };
    loop {
        let src = p.to_source();
        let count = normalize_str(&src).expect("generated programs parse").token_count();
        if count >= tokens {
            return src;
        }
        let mut g = Gen { rng: &mut *rng, cfg: &cfg, funcs: 1, current: 0, vars: cfg.max_locals, params: vec![0] };
        // A compound statement adds up to six tokens; near the target only simple ones fit.
        let s = if tokens - count >= 6 { g.stmt(0) } else { g.stmt(cfg.max_depth) };
        let s = match s {
            SynStmt::If { cond, then, .. } => SynStmt::If { cond, then: then.into_iter().take(1).collect(), els: None },
            other => other,
        };
        p.functions[0].body.push(s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{distance, Weights};

    #[test]
    fn generated_programs_parse_and_are_deterministic() {
        for seed in 0..30 {
            let a = random_program(&mut rng(seed), &GenConfig::default()).to_source();
            let b = random_program(&mut rng(seed), &GenConfig::default()).to_source();
            assert_eq!(a, b);
            normalize_str(&a).unwrap_or_else(|e| panic!("{e}\n{a}"));
        }
    }

    #[test]
    fn variants_normalize_identically() {
        let w = Weights::default();
        for seed in 0..40 {
            let mut r = rng(seed);
            let p = random_program(&mut r, &GenConfig::default());
            let base = normalize_str(&p.to_source()).unwrap();
            for v in Variant::ALL {
                let src = p.variant(v, &mut r);
                let n = normalize_str(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
                assert_eq!(n.to_text(), base.to_text(), "{v:?}\n{src}");
                assert_eq!(distance(&base, &n, &w), 0.0);
            }
        }
    }

    #[test]
    fn sized_programs_hit_the_target() {
        let mut r = rng(7);
        for _ in 0..10 {
            let n = normalize_str(&sized_program(&mut r, 40)).unwrap().token_count();
            assert!((40..=43).contains(&n), "{n}");
        }
    }

    #[test]
    fn corpus_marks_follow_templates() {
        let c = mutation_corpus(25, 4, 3);
        assert_eq!(c.len(), 25);
        for e in &c {
            let base = c[e.template].marks.round();
            assert!((e.marks - base).abs() <= 1.0);
            normalize_str(&e.source).unwrap();
        }
    }
}
