//! Turns an edit script against a nearby correct program into short hints.
//!
//! Hints describe normalized tokens only (construct kind, operators, call
//! arity), so the neighbor's identifiers, literals and layout are never
//! shown. Large differences are suppressed instead of partially revealed.

mod render;

use serde::{Deserialize, Serialize};

pub use render::{describe_token, expr_shape};

use crate::cparse::Span;
use crate::distance::{DistanceResult, EditOp, Weights};
use crate::normalize::{LinearProgram, LinearToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HintKind {
    MissingConstruct,
    ExtraConstruct,
    ChangedCondition,
    ChangedExpression,
}

impl HintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HintKind::MissingConstruct => "missing-construct",
            HintKind::ExtraConstruct => "extra-construct",
            HintKind::ChangedCondition => "changed-condition",
            HintKind::ChangedExpression => "changed-expression",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hint {
    pub kind: HintKind,
    /// Ordinal of the student's function in first-use order.
    pub function: usize,
    /// Token index inside that function.
    pub token: usize,
    pub line: u32,
    pub span: Span,
    pub message: String,
    /// Cost contribution of the underlying edit.
    pub severity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintSet {
    pub hints: Vec<Hint>,
    pub neighbor_distance: f64,
    pub suppressed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HintConfig {
    /// Suppress when the distance exceeds this fraction of the cost of
    /// writing the student's program from scratch.
    pub reveal_ratio: f64,
    /// Suppress when the script needs more than this many hints.
    pub max_ops: usize,
    /// Hints returned when not suppressed.
    pub max_hints: usize,
}

impl Default for HintConfig {
    fn default() -> Self {
        HintConfig { reveal_ratio: 0.25, max_ops: 5, max_hints: 3 }
    }
}

fn location(student: &LinearProgram, function: usize, token: usize) -> Span {
    let f = &student.functions[function];
    let last = f.tokens.len().saturating_sub(1);
    f.span(token.min(last))
}

fn hint(student: &LinearProgram, kind: HintKind, function: usize, token: usize, message: String, severity: f64) -> Hint {
    let span = location(student, function, token);
    let message = if span.line > 0 { format!("{message} near line {}", span.line) } else { message };
    Hint { kind, function, token, line: span.line, span, message, severity }
}

/// One hint per edit operation of `result`, which must have been computed
/// with the student's program on the left. Functions of the neighbor that
/// have no counterpart produce a missing-construct hint, and unpaired
/// student functions an extra-construct hint. Ranked by severity, then by
/// position.
pub fn script_to_hints(result: &DistanceResult, student: &LinearProgram, neighbor: &LinearProgram, w: &Weights) -> Vec<Hint> {
    let mut out = Vec::new();
    for f in &result.functions {
        for op in &f.script {
            let severity = op.cost(w) as f64;
            let h = match op {
                EditOp::Insert { pos, token } => hint(
                    student,
                    HintKind::MissingConstruct,
                    f.left_index,
                    *pos,
                    format!("{} is expected", capitalize(&describe_token(token))),
                    severity,
                ),
                EditOp::Delete { pos, token } => hint(
                    student,
                    HintKind::ExtraConstruct,
                    f.left_index,
                    *pos,
                    format!("{} looks unnecessary", capitalize(&describe_token(token))),
                    severity,
                ),
                EditOp::Replace { pos, old, new, .. } => match (old, new) {
                    (LinearToken::If(_), LinearToken::If(e)) | (LinearToken::Loop(_), LinearToken::Loop(e)) => {
                        let what = if matches!(old, LinearToken::If(_)) { "conditional check" } else { "loop" };
                        let shape = expr_shape(e);
                        let expected = if shape.is_empty() { String::new() } else { format!("; the expected condition is {shape}") };
                        hint(
                            student,
                            HintKind::ChangedCondition,
                            f.left_index,
                            *pos,
                            format!("The condition of the {what} needs another look{expected}"),
                            severity,
                        )
                    }
                    _ => hint(
                        student,
                        HintKind::ChangedExpression,
                        f.left_index,
                        *pos,
                        format!("Consider {} instead", describe_token(new)),
                        severity,
                    ),
                },
            };
            out.push(h);
        }
    }
    for &j in &result.unpaired_right {
        let g = &neighbor.functions[j];
        out.push(hint(
            student,
            HintKind::MissingConstruct,
            0,
            0,
            format!("{} is expected", capitalize(&describe_token(&g.tokens[0]))),
            g.tokens.len() as f64 * w.leftout_factor,
        ));
    }
    for &i in &result.unpaired_left {
        let g = &student.functions[i];
        out.push(hint(
            student,
            HintKind::ExtraConstruct,
            i,
            0,
            format!("{} looks unnecessary", capitalize(&describe_token(&g.tokens[0]))),
            g.tokens.len() as f64 * w.leftout_factor,
        ));
    }
    out.sort_by(|a, b| b.severity.total_cmp(&a.severity).then((a.function, a.token).cmp(&(b.function, b.token))));
    out
}

/// Applies the reveal policy: nothing when the neighbor is too far away or
/// the fix needs too many edits, otherwise the top `max_hints`.
pub fn filter_hints(hints: Vec<Hint>, neighbor_distance: f64, student_tokens: usize, config: &HintConfig, w: &Weights) -> HintSet {
    let budget = config.reveal_ratio * student_tokens as f64 * w.w_ad as f64;
    if neighbor_distance > budget || hints.len() > config.max_ops {
        return HintSet { hints: Vec::new(), neighbor_distance, suppressed: true };
    }
    let mut hints = hints;
    hints.truncate(config.max_hints);
    HintSet { hints, neighbor_distance, suppressed: false }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
