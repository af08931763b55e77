//! Edit distance between normalized programs.
//!
//! Functions are compared pairwise with a weighted Levenshtein alignment over
//! linear tokens. Expressions inside tokens get a scaled inner distance, and
//! block markers are expensive to insert or delete so that alignments keep
//! blocks together. Which function is compared with which is decided by
//! [`pair_functions`].

mod edit;
mod expr;
pub mod oracle;
mod pairing;
mod weights;

use serde::{Deserialize, Serialize};

pub use edit::{apply_script, apply_script_iter, edit_cost, edit_module, EditOp, EditOutcome};
pub use expr::{atom_levenshtein, expr_distance, expr_levenshtein, indel_cost, substitution_cost, token_replace_cost};
pub use pairing::{pair_functions, Pairing};
pub use weights::Weights;

use crate::normalize::LinearProgram;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDiff {
    pub left_index: usize,
    pub right_index: usize,
    pub left_name: String,
    pub right_name: String,
    pub cost: u32,
    /// Turns the left function's tokens into the right function's tokens.
    pub script: Vec<EditOp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub total: f64,
    pub functions: Vec<FunctionDiff>,
    pub unpaired_left: Vec<usize>,
    pub unpaired_right: Vec<usize>,
    pub leftout_penalty: f64,
    pub ordering_penalty: f64,
    pub pairing_fallback: bool,
}

impl DistanceResult {
    /// Line-based script: one `PAIR` header per function pair followed by its
    /// edit operations, then `LEFTOUT` lines and the penalty summary.
    pub fn script_text(&self) -> String {
        let mut out = String::new();
        for f in &self.functions {
            out.push_str(&format!(
                "PAIR {} {} {} {} [{}]\n",
                f.left_index, f.left_name, f.right_index, f.right_name, f.cost
            ));
            for op in &f.script {
                out.push_str(&op.to_string());
                out.push('\n');
            }
        }
        for i in &self.unpaired_left {
            out.push_str(&format!("LEFTOUT left {i}\n"));
        }
        for j in &self.unpaired_right {
            out.push_str(&format!("LEFTOUT right {j}\n"));
        }
        out.push_str(&format!(
            "PENALTY leftout {} ordering {}\nTOTAL {}\n",
            fmt_cost(self.leftout_penalty),
            fmt_cost(self.ordering_penalty),
            fmt_cost(self.total)
        ));
        out
    }
}

/// Integral costs print without a fractional part.
pub fn fmt_cost(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:.4}")
    }
}

/// Distance between two programs plus the per-function edit scripts.
pub fn program_distance(p1: &LinearProgram, p2: &LinearProgram, w: &Weights) -> DistanceResult {
    let pairing = pair_functions(p1, p2, w);
    let functions: Vec<FunctionDiff> = pairing
        .pairs
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (&p1.functions[i], &p2.functions[j]);
            let out = edit_module(&a.tokens, &b.tokens, w);
            FunctionDiff {
                left_index: i,
                right_index: j,
                left_name: a.name.clone(),
                right_name: b.name.clone(),
                cost: out.cost,
                script: out.script,
            }
        })
        .collect();
    let edit: u64 = functions.iter().map(|f| f.cost as u64).sum();
    debug_assert_eq!(edit, pairing.edit_cost);
    DistanceResult {
        total: edit as f64 + pairing.leftout_penalty + pairing.ordering_penalty,
        functions,
        unpaired_left: pairing.unpaired_left,
        unpaired_right: pairing.unpaired_right,
        leftout_penalty: pairing.leftout_penalty,
        ordering_penalty: pairing.ordering_penalty,
        pairing_fallback: pairing.fallback,
    }
}

/// Scalar distance without scripts.
pub fn distance(p1: &LinearProgram, p2: &LinearProgram, w: &Weights) -> f64 {
    pair_functions(p1, p2, w).total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize_str;

    #[test]
    fn identical_programs() {
        let p = normalize_str("int f(int a){return a+1;}\nint main(){int x; x = f(2); return x;}").unwrap();
        let r = program_distance(&p, &p, &Weights::default());
        assert_eq!(r.total, 0.0);
        assert!(r.functions.iter().all(|f| f.script.is_empty()));
    }

    #[test]
    fn single_function_identity_pairing() {
        let a = normalize_str("int main(){int x; x = 1;}").unwrap();
        let b = normalize_str("int main(){int x; x = 2;}").unwrap();
        let p = pair_functions(&a, &b, &Weights::default());
        assert_eq!(p.pairs, [(0, 0)]);
        assert_eq!((p.leftout_penalty, p.ordering_penalty), (0.0, 0.0));
    }

    #[test]
    fn script_text_lists_pairs_and_totals() {
        let a = normalize_str("int main(){int x; x = 1;}").unwrap();
        let b = normalize_str("int main(){int x; x = 2;}").unwrap();
        let r = program_distance(&a, &b, &Weights::default());
        let text = r.script_text();
        assert!(text.starts_with("PAIR 0 main 0 main ["));
        assert!(text.contains("REP 3 E: 1 v1 = -> E: 2 v1 = ["));
        assert!(text.ends_with(&format!("TOTAL {}\n", fmt_cost(r.total))));
    }
}
