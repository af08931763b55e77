use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::edit::edit_cost;
use super::Weights;
use crate::normalize::LinearProgram;

/// Function correspondence between two programs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    /// `(index in p1, index in p2)`, ordered by the p1 index.
    pub pairs: Vec<(usize, usize)>,
    pub unpaired_left: Vec<usize>,
    pub unpaired_right: Vec<usize>,
    pub leftout_penalty: f64,
    pub ordering_penalty: f64,
    /// Sum of the per-pair edit costs.
    pub edit_cost: u64,
    /// True when the exhaustive search was skipped or timed out.
    pub fallback: bool,
}

impl Pairing {
    pub fn total(&self) -> f64 {
        self.edit_cost as f64 + self.leftout_penalty + self.ordering_penalty
    }
}

/// Chooses which function of `p1` is compared with which function of `p2`.
///
/// The first function of each program (the root of the call order) is always
/// paired with the other root. The non-root functions of the program that has
/// more of them (of `p2` on equal counts) are permuted and zipped with the
/// other program's non-root functions in first-use order. Every candidate is
/// scored by the sum of pair edit costs, a left-out penalty per token of an
/// unpaired function, and an ordering penalty proportional to the fraction of
/// permuted functions that are away from their first-use position.
pub fn pair_functions(p1: &LinearProgram, p2: &LinearProgram, w: &Weights) -> Pairing {
    let (m, n) = (p1.functions.len(), p2.functions.len());
    if m == 0 || n == 0 {
        return leftovers(p1, p2, Vec::new(), 0, w, false);
    }
    // Permute the side with more functions so that both directions search
    // the same set of pairings.
    let swap = m > n;
    let (fixed, moving) = if swap { (p2, p1) } else { (p1, p2) };
    let k = fixed.functions.len() - 1;
    let r = moving.functions.len() - 1;

    let cost = |fi: usize, mi: usize| -> u64 {
        edit_cost(&fixed.functions[fi].tokens, &moving.functions[mi].tokens, w) as u64
    };
    let orient = |pairs: Vec<(usize, usize)>| -> Vec<(usize, usize)> {
        let mut p: Vec<_> = if swap { pairs.into_iter().map(|(a, b)| (b, a)).collect() } else { pairs };
        p.sort_unstable();
        p
    };

    let root_cost = cost(0, 0);
    let first_use = |root_cost: u64, fallback: bool| {
        let pairs: Vec<_> = (0..=k).map(|i| (i, i)).collect();
        let c = root_cost + (1..=k).map(|i| cost(i, i)).sum::<u64>();
        leftovers(p1, p2, orient(pairs), c, w, fallback)
    };
    if k == 0 || r == 0 {
        return first_use(root_cost, false);
    }
    if m.max(n) > w.pairing_fn_limit {
        return first_use(root_cost, true);
    }

    let matrix: Vec<Vec<u64>> = (1..=k).map(|fi| (1..=r).map(|mi| cost(fi, mi)).collect()).collect();
    let moving_sizes: Vec<usize> = (1..=r).map(|mi| moving.functions[mi].tokens.len()).collect();
    let total_moving: usize = moving_sizes.iter().sum();
    let deadline = w.pairing_timeout_ms.map(|ms| Instant::now() + Duration::from_millis(ms));

    // perm[j] is the moving function (0-based among non-roots) placed at
    // position j; positions 0..k are paired, the rest are left out.
    let mut perm: Vec<usize> = (0..r).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut steps = 0u64;
    loop {
        let mut edit = 0u64;
        let mut paired_tokens = 0usize;
        for (j, &mi) in perm.iter().take(k).enumerate() {
            edit += matrix[j][mi];
            paired_tokens += moving_sizes[mi];
        }
        let leftout_tokens = total_moving - paired_tokens;
        let misplaced = perm.iter().enumerate().filter(|(j, &mi)| *j != mi).count();
        let total = edit as f64
            + leftout_tokens as f64 * w.leftout_factor
            + misplaced as f64 / r as f64 * w.ordering_factor;
        if best.as_ref().map_or(true, |(b, _)| total < *b) {
            best = Some((total, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
        steps += 1;
        if let Some(d) = deadline {
            if steps % 256 == 0 && Instant::now() >= d {
                return first_use(root_cost, true);
            }
        }
    }
    let (_, perm) = best.expect("at least one permutation");
    let misplaced = perm.iter().enumerate().filter(|(j, &mi)| *j != mi).count();
    let mut pairs = vec![(0, 0)];
    let mut edit = root_cost;
    for (j, &mi) in perm.iter().take(k).enumerate() {
        pairs.push((j + 1, mi + 1));
        edit += matrix[j][mi];
    }
    let mut p = leftovers(p1, p2, orient(pairs), edit, w, false);
    p.ordering_penalty = misplaced as f64 / r as f64 * w.ordering_factor;
    p
}

/// Fills in unpaired functions and the left-out penalty for a fixed pairing.
fn leftovers(
    p1: &LinearProgram,
    p2: &LinearProgram,
    pairs: Vec<(usize, usize)>,
    edit_cost: u64,
    w: &Weights,
    fallback: bool,
) -> Pairing {
    let unpaired_left: Vec<usize> =
        (0..p1.functions.len()).filter(|i| !pairs.iter().any(|(a, _)| a == i)).collect();
    let unpaired_right: Vec<usize> =
        (0..p2.functions.len()).filter(|j| !pairs.iter().any(|(_, b)| b == j)).collect();
    let tokens: usize = unpaired_left.iter().map(|&i| p1.functions[i].tokens.len()).sum::<usize>()
        + unpaired_right.iter().map(|&j| p2.functions[j].tokens.len()).sum::<usize>();
    Pairing {
        pairs,
        unpaired_left,
        unpaired_right,
        leftout_penalty: tokens as f64 * w.leftout_factor,
        ordering_penalty: 0.0,
        edit_cost,
        fallback,
    }
}

/// Lexicographic successor; false once the last permutation has been seen.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
