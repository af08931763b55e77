//! Token-level alignment of two linear functions.

use std::cell::RefCell;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::expr::{indel_cost, token_replace_cost};
use super::Weights;
use crate::normalize::LinearToken;

/// One step of an edit script. Positions index the source token list.
/// `Insert { pos }` inserts before source token `pos`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditOp {
    Insert { pos: usize, token: LinearToken },
    Delete { pos: usize, token: LinearToken },
    Replace { pos: usize, old: LinearToken, new: LinearToken, cost: u32 },
}

impl EditOp {
    pub fn pos(&self) -> usize {
        match self {
            EditOp::Insert { pos, .. } | EditOp::Delete { pos, .. } | EditOp::Replace { pos, .. } => *pos,
        }
    }

    pub fn cost(&self, w: &Weights) -> u32 {
        match self {
            EditOp::Insert { token, .. } | EditOp::Delete { token, .. } => indel_cost(token, w),
            EditOp::Replace { cost, .. } => *cost,
        }
    }
}

/// `INS <pos> <token>`, `DEL <pos> <token>`, `REP <pos> <old> -> <new> [cost]`.
impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditOp::Insert { pos, token } => write!(f, "INS {pos} {token}"),
            EditOp::Delete { pos, token } => write!(f, "DEL {pos} {token}"),
            EditOp::Replace { pos, old, new, cost } => write!(f, "REP {pos} {old} -> {new} [{cost}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EditOutcome {
    pub cost: u32,
    pub script: Vec<EditOp>,
}

const FORBIDDEN: u32 = u32::MAX;

/// Suffix-cost table: `at(i, j)` is the cheapest way to turn `a[i..]` into
/// `b[j..]`.
struct Table<'s> {
    width: usize,
    cells: &'s [u32],
    /// Substitution cost of `a[i]` by `b[j]` at `i * (width - 1) + j`.
    subs: &'s [u32],
}

impl Table<'_> {
    fn at(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.width + j]
    }
}

/// Discriminant code; codes at or above `BLOCK_CODE` are block markers.
fn kind_code(t: &LinearToken) -> u32 {
    match t {
        LinearToken::FuncHeader { .. } => 0,
        LinearToken::Decl(_) => 1,
        LinearToken::Expr(_) => 2,
        LinearToken::If(_) => 3,
        LinearToken::Else => 4,
        LinearToken::Loop(_) => 5,
        LinearToken::Return(_) => 6,
        LinearToken::BlockOpen => BLOCK_CODE,
        LinearToken::BlockClose => BLOCK_CODE + 1,
    }
}

const BLOCK_CODE: u32 = 7;
const ELSE_CODE: u32 = 4;

thread_local! {
    static SCRATCH: RefCell<Vec<u32>> = const { RefCell::new(Vec::new()) };
}

/// Fills the suffix table in a per-thread buffer and hands it to `f`.
fn with_suffix_table<R>(a: &[LinearToken], b: &[LinearToken], w: &Weights, f: impl FnOnce(&Table) -> R) -> R {
    SCRATCH.with(|cell| {
        let mut buf = cell.borrow_mut();
        let (n, m) = (a.len(), b.len());
        let width = m + 1;
        let cells = (n + 1) * width;
        let len = cells + n * m + 2 * m;
        if buf.len() < len {
            // Every cell is written before it is read, so old contents can stay.
            buf.resize(len, 0);
        }
        let (t, rest) = buf.split_at_mut(cells);
        let (subs, rest) = rest.split_at_mut(n * m);
        let cols = &mut rest[..2 * m];
        for (j, x) in b.iter().enumerate() {
            cols[j] = kind_code(x);
            cols[m + j] = indel_cost(x, w);
        }
        fill(t, subs, cols, a, b, w);
        f(&Table { width, cells: t, subs })
    })
}

fn fill(t: &mut [u32], subs: &mut [u32], cols: &[u32], a: &[LinearToken], b: &[LinearToken], w: &Weights) {
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let w_r = w.w_r;
    let (kinds, ins) = cols.split_at(m);
    let last = &mut t[n * width..(n + 1) * width];
    last[m] = 0;
    for j in (0..m).rev() {
        last[j] = last[j + 1] + ins[j];
    }
    for i in (0..n).rev() {
        let ak = kind_code(&a[i]);
        let del = indel_cost(&a[i], w);
        let (row, below) = t[i * width..(i + 2) * width].split_at_mut(width);
        let sub_row = &mut subs[i * m..(i + 1) * m];
        for j in 0..m {
            let bk = kinds[j];
            sub_row[j] = if ak != bk {
                if ak.max(bk) >= BLOCK_CODE {
                    FORBIDDEN
                } else {
                    w_r
                }
            } else if ak >= BLOCK_CODE || ak == ELSE_CODE {
                0
            } else {
                token_replace_cost(&a[i], &b[j], w)
            };
        }
        let mut right = below[m] + del;
        row[m] = right;
        let (row, down, diag, ins) = (&mut row[..m], &below[..m], &below[1..], &ins[..m]);
        let sub_row = &sub_row[..m];
        for j in (0..m).rev() {
            // FORBIDDEN saturates and never wins.
            let best = (down[j] + del).min(right + ins[j]).min(diag[j].saturating_add(sub_row[j]));
            row[j] = best;
            right = best;
        }
    }
}

/// Length of the common prefix. Matching equal leading tokens is always
/// optimal (all non-block tokens share one indel cost and block markers only
/// replace themselves), and the forward walk takes that match first, so
/// skipping the prefix changes neither the cost nor the script.
fn common_prefix(a: &[LinearToken], b: &[LinearToken]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Cost only, without building a script.
pub fn edit_cost(a: &[LinearToken], b: &[LinearToken], w: &Weights) -> u32 {
    let k = common_prefix(a, b);
    if k == a.len() && k == b.len() {
        return 0;
    }
    with_suffix_table(&a[k..], &b[k..], w, |t| t.at(0, 0))
}

/// Weighted Levenshtein alignment with block-anchor penalties.
///
/// The script is recovered by walking the table forward from the start and
/// taking, at each step, the first optimal move among replace (or match),
/// delete, insert.
pub fn edit_module(a: &[LinearToken], b: &[LinearToken], w: &Weights) -> EditOutcome {
    let k = common_prefix(a, b);
    if k == a.len() && k == b.len() {
        return EditOutcome::default();
    }
    with_suffix_table(&a[k..], &b[k..], w, |t| backtrace(t, &a[k..], &b[k..], k, w))
}

/// `offset` is added to every position of the script.
fn backtrace(t: &Table, a: &[LinearToken], b: &[LinearToken], offset: usize, w: &Weights) -> EditOutcome {
    let (n, m) = (a.len(), b.len());
    let width = t.width;
    let (mut i, mut j) = (0, 0);
    let mut script = Vec::with_capacity(n + m);
    while i < n || j < m {
        // Cell (i, j) and its neighbours in the flat table.
        let k = i * width + j;
        let here = t.cells[k];
        if i < n && j < m {
            let sub = t.subs[i * m + j];
            if sub != FORBIDDEN && t.cells[k + width + 1] + sub == here {
                if sub > 0 {
                    script.push(EditOp::Replace { pos: offset + i, old: a[i].clone(), new: b[j].clone(), cost: sub });
                }
                i += 1;
                j += 1;
                continue;
            }
        }
        if i < n && t.cells[k + width] + indel_cost(&a[i], w) == here {
            script.push(EditOp::Delete { pos: offset + i, token: a[i].clone() });
            i += 1;
            continue;
        }
        debug_assert!(j < m && t.cells[k + 1] + indel_cost(&b[j], w) == here);
        script.push(EditOp::Insert { pos: offset + i, token: b[j].clone() });
        j += 1;
    }
    EditOutcome { cost: t.at(0, 0), script }
}

/// Applies a script produced against `source`.
pub fn apply_script(source: &[LinearToken], script: &[EditOp]) -> Vec<LinearToken> {
    apply_script_iter(source, script).cloned().collect()
}

/// The tokens [`apply_script`] would produce, borrowed from `source` and
/// `script`.
pub fn apply_script_iter<'a>(source: &'a [LinearToken], script: &'a [EditOp]) -> impl Iterator<Item = &'a LinearToken> {
    let mut ops = script.iter().peekable();
    let mut i = 0;
    std::iter::from_fn(move || loop {
        match ops.next_if(|op| op.pos() == i) {
            Some(EditOp::Insert { token, .. }) => return Some(token),
            Some(EditOp::Delete { .. }) => i += 1,
            Some(EditOp::Replace { new, .. }) => {
                i += 1;
                return Some(new);
            }
            None => {
                i += 1;
                return source.get(i - 1);
            }
        }
    })
}
