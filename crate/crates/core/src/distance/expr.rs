use super::Weights;
use crate::normalize::{LinearToken, NormalizedExpr, PostfixAtom};

/// Unit-cost Levenshtein distance between two atom lists.
pub fn atom_levenshtein(a: &[PostfixAtom], b: &[PostfixAtom]) -> usize {
    levenshtein(a.len(), b.len(), |i, j| a[i] == b[j])
}

/// Same as [`atom_levenshtein`] on the expressions' atoms, comparing
/// fingerprints first.
pub fn expr_levenshtein(a: &NormalizedExpr, b: &NormalizedExpr) -> usize {
    if a.same_atoms(b) {
        return 0;
    }
    let (xa, xb) = (a.atoms(), b.atoms());
    let (fa, fb) = (a.fingerprints(), b.fingerprints());
    let same = |i: usize, j: usize| fa[i] == fb[j] && xa[i] == xb[j];
    let (mut lo, mut hi_a, mut hi_b) = (0, xa.len(), xb.len());
    while lo < hi_a && lo < hi_b && same(lo, lo) {
        lo += 1;
    }
    while hi_a > lo && hi_b > lo && same(hi_a - 1, hi_b - 1) {
        hi_a -= 1;
        hi_b -= 1;
    }
    match (hi_a - lo, hi_b - lo) {
        (0, k) | (k, 0) => k,
        (n, m) => levenshtein(n, m, |i, j| same(lo + i, lo + j)),
    }
}

fn levenshtein(n: usize, m: usize, same: impl Fn(usize, usize) -> bool) -> usize {
    const STACK: usize = 32;
    if m < STACK {
        let mut row = [0u32; STACK];
        levenshtein_row(n, &mut row[..=m], same)
    } else {
        levenshtein_row(n, &mut vec![0; m + 1], same)
    }
}

fn levenshtein_row(n: usize, row: &mut [u32], same: impl Fn(usize, usize) -> bool) -> usize {
    let m = row.len() - 1;
    for (j, r) in row.iter_mut().enumerate() {
        *r = j as u32;
    }
    for i in 0..n {
        let mut diag = row[0];
        row[0] = i as u32 + 1;
        for j in 0..m {
            let sub = diag + u32::from(!same(i, j));
            diag = row[j + 1];
            row[j + 1] = sub.min(diag + 1).min(row[j] + 1);
        }
    }
    row[m] as usize
}

/// Expression distance scaled into `1..=w_r` (0 only for equal expressions).
#[inline]
pub fn expr_distance(a: &NormalizedExpr, b: &NormalizedExpr, w: &Weights) -> u32 {
    if a.same_atoms(b) {
        return 0;
    }
    let raw = expr_levenshtein(a, b) as u64;
    if raw == 0 {
        return 0;
    }
    let longest = a.len().max(b.len()) as u64;
    let num = w.w_r as u64 * raw;
    // Round half up.
    let scaled = (2 * num + longest) / (2 * longest);
    scaled.clamp(1, w.w_r as u64) as u32
}

/// Cost of replacing token `a` by `b`; never more than `w_r`.
#[inline]
pub fn token_replace_cost(a: &LinearToken, b: &LinearToken, w: &Weights) -> u32 {
    use LinearToken::*;
    match (a, b) {
        (Expr(x), Expr(y)) | (If(x), If(y)) | (Loop(x), Loop(y)) | (Return(Some(x)), Return(Some(y))) => {
            expr_distance(x, y, w)
        }
        _ if a == b => 0,
        _ => w.w_r,
    }
}

/// Replacement cost as used by the alignment: block markers only align with
/// identical block markers, so any substitution touching one is refused.
#[inline]
pub fn substitution_cost(a: &LinearToken, b: &LinearToken, w: &Weights) -> Option<u32> {
    match (a.is_block(), b.is_block()) {
        (false, false) => Some(token_replace_cost(a, b, w)),
        (true, true) if a == b => Some(0),
        _ => None,
    }
}

#[inline]
pub fn indel_cost(t: &LinearToken, w: &Weights) -> u32 {
    if t.is_block() {
        w.block_indel()
    } else {
        w.w_ad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::PostfixAtom as A;

    fn e(text: &str) -> NormalizedExpr {
        crate::normalize::LinearProgram::from_text(&format!("FUNC f 0\nE: {text}\n"))
            .unwrap()
            .functions[0]
            .tokens[1]
            .expr()
            .unwrap()
            .clone()
    }

    /// Exhaustive oracle: shortest edit sequence by breadth-first search over
    /// strings reachable by single edits.
    fn bfs_levenshtein(a: &[A], b: &[A]) -> usize {
        use std::collections::{HashSet, VecDeque};
        let alphabet: Vec<A> = a.iter().chain(b).cloned().collect();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([(a.to_vec(), 0)]);
        seen.insert(a.to_vec());
        while let Some((s, d)) = queue.pop_front() {
            if s == b {
                return d;
            }
            let mut next = Vec::new();
            for i in 0..s.len() {
                let mut t = s.clone();
                t.remove(i);
                next.push(t);
                for c in &alphabet {
                    let mut t = s.clone();
                    t[i] = c.clone();
                    next.push(t);
                }
            }
            for i in 0..=s.len() {
                for c in &alphabet {
                    let mut t = s.clone();
                    t.insert(i, c.clone());
                    next.push(t);
                }
            }
            for t in next {
                if t.len() <= a.len().max(b.len()) + 1 && seen.insert(t.clone()) {
                    queue.push_back((t, d + 1));
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn raw_distance_matches_search_oracle() {
        let x = e("v1 v2 v1 / +");
        let y = e("v1 v2 +");
        assert_eq!(bfs_levenshtein(x.atoms(), y.atoms()), 2);
        assert_eq!(atom_levenshtein(x.atoms(), y.atoms()), 2);
    }

    #[test]
    fn scaled_expression_distance() {
        let w = Weights::default();
        assert_eq!(expr_distance(&e("v1 v2 +"), &e("v1 v2 +"), &w), 0);
        // raw 2, longest 5: round(10 * 2 / 5) = 4
        assert_eq!(expr_distance(&e("v1 v2 v1 / +"), &e("v1 v2 +"), &w), 4);
        assert_eq!(expr_distance(&e("v1 v2 +"), &e("3 4 *"), &w), 10);
        // Tiny differences never vanish.
        let long_a = e("v1 v2 + v3 + v4 + v5 + v6 + v7 + v8 + v9 + v10 + v11 + v12 + 1 +");
        let long_b = e("v1 v2 + v3 + v4 + v5 + v6 + v7 + v8 + v9 + v10 + v11 + v12 + 2 +");
        assert_eq!(expr_distance(&long_a, &long_b, &w), 1);
    }

    #[test]
    fn replace_cost_by_kind() {
        let w = Weights::default();
        let c = e("v1 3 <");
        assert_eq!(token_replace_cost(&LinearToken::If(c.clone()), &LinearToken::Loop(c.clone()), &w), 10);
        assert_eq!(token_replace_cost(&LinearToken::Expr(c.clone()), &LinearToken::Expr(c.clone()), &w), 0);
        assert_eq!(
            token_replace_cost(&LinearToken::Decl("int".into()), &LinearToken::Decl("float".into()), &w),
            10
        );
        assert_eq!(
            token_replace_cost(&LinearToken::FuncHeader { arity: 1 }, &LinearToken::FuncHeader { arity: 1 }, &w),
            0
        );
        assert_eq!(substitution_cost(&LinearToken::BlockOpen, &LinearToken::Else, &w), None);
        assert_eq!(substitution_cost(&LinearToken::BlockOpen, &LinearToken::BlockOpen, &w), Some(0));
    }
}
