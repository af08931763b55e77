use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ClusterError, DistanceMatrix};

/// Agglomeration rule. The declaration order is the tie-break order used
/// when selecting a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    Weighted,
}

impl Linkage {
    pub const ALL: [Linkage; 4] = [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Weighted];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Weighted => "weighted",
        }
    }

    /// Lance–Williams update: distance from cluster `k` to the union of `i`
    /// (size `ni`) and `j` (size `nj`).
    fn update(self, dki: f64, dkj: f64, ni: usize, nj: usize) -> f64 {
        match self {
            Linkage::Single => dki.min(dkj),
            Linkage::Complete => dki.max(dkj),
            Linkage::Average => (ni as f64 * dki + nj as f64 * dkj) / (ni + nj) as f64,
            Linkage::Weighted => (dki + dkj) / 2.0,
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Linkage::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown linkage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendroNode {
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub dist: f64,
    pub count: usize,
    /// Matrix index of the program, for leaves.
    pub leaf: Option<usize>,
}

impl DendroNode {
    pub fn is_leaf(&self) -> bool {
        self.leaf.is_some()
    }
}

/// Merge tree stored as an arena: nodes `0..n` are the leaves in matrix
/// order, node `n + k` is the k-th merge, and the last node is the root.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dendrogram {
    pub nodes: Vec<DendroNode>,
    pub leaves: usize,
}

impl Dendrogram {
    pub fn root(&self) -> Option<usize> {
        self.nodes.len().checked_sub(1)
    }

    pub fn node(&self, id: usize) -> &DendroNode {
        &self.nodes[id]
    }

    /// Merges as `(smaller node id, larger node id, height, size)`.
    pub fn merges(&self) -> Vec<(usize, usize, f64, usize)> {
        self.nodes[self.leaves..]
            .iter()
            .map(|n| {
                let (l, r) = (n.left.expect("internal"), n.right.expect("internal"));
                (l.min(r), l.max(r), n.dist, n.count)
            })
            .collect()
    }

    /// Leaf indices under `id`, left subtree first.
    pub fn leaves_under(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            let node = &self.nodes[x];
            match (node.leaf, node.left, node.right) {
                (Some(leaf), _, _) => out.push(leaf),
                (None, Some(l), Some(r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                _ => unreachable!("internal nodes have two children"),
            }
        }
        out
    }

    /// Square matrix of merge heights at which each pair first joins.
    pub fn cophenetic(&self) -> Vec<f64> {
        let n = self.leaves;
        let mut out = vec![0.0; n * n];
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for node in &self.nodes[n..] {
            let (l, r) = (node.left.expect("internal"), node.right.expect("internal"));
            let right = std::mem::take(&mut members[r]);
            let mut left = std::mem::take(&mut members[l]);
            for &a in &left {
                for &b in &right {
                    out[a * n + b] = node.dist;
                    out[b * n + a] = node.dist;
                }
            }
            left.extend(right);
            members.push(left);
        }
        out
    }
}

/// Agglomerative clustering with Lance–Williams updates.
///
/// At every step the closest pair of active clusters is merged; among equal
/// distances the pair with the smallest `(i, j)` slot indices wins. The
/// merged cluster keeps the smaller slot. A nearest-neighbour cache per slot
/// keeps the common case quadratic.
pub fn linkage_tree(m: &DistanceMatrix, method: Linkage) -> Dendrogram {
    let n = m.len();
    let mut nodes: Vec<DendroNode> =
        (0..n).map(|i| DendroNode { left: None, right: None, dist: 0.0, count: 1, leaf: Some(i) }).collect();
    if n < 2 {
        return Dendrogram { nodes, leaves: n };
    }
    let mut d: Vec<f64> = (0..n).flat_map(|i| m.row(i).to_vec()).collect();
    let mut active = vec![true; n];
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    // Nearest higher-indexed active slot and its distance.
    let mut nn: Vec<(usize, f64)> = vec![(usize::MAX, f64::INFINITY); n];
    let scan = |d: &[f64], active: &[bool], i: usize| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for k in i + 1..n {
            if active[k] && d[i * n + k] < best.1 {
                best = (k, d[i * n + k]);
            }
        }
        best
    };
    for i in 0..n {
        nn[i] = scan(&d, &active, i);
    }
    for _ in 0..n - 1 {
        let mut i = usize::MAX;
        let mut best = f64::INFINITY;
        for s in 0..n {
            if active[s] && nn[s].0 != usize::MAX && (i == usize::MAX || nn[s].1 < best) {
                i = s;
                best = nn[s].1;
            }
        }
        let j = nn[i].0;
        let (ni, nj) = (size[i], size[j]);
        nodes.push(DendroNode {
            left: Some(node_of[i]),
            right: Some(node_of[j]),
            dist: best,
            count: ni + nj,
            leaf: None,
        });
        active[j] = false;
        for k in 0..n {
            if active[k] && k != i {
                let v = method.update(d[k * n + i], d[k * n + j], ni, nj);
                d[k * n + i] = v;
                d[i * n + k] = v;
            }
        }
        size[i] = ni + nj;
        node_of[i] = nodes.len() - 1;
        nn[i] = scan(&d, &active, i);
        nn[j] = (usize::MAX, f64::INFINITY);
        for p in 0..n {
            if !active[p] || p == i {
                continue;
            }
            if nn[p].0 == i || nn[p].0 == j {
                nn[p] = scan(&d, &active, p);
            } else if p < i {
                let v = d[p * n + i];
                if v < nn[p].1 || (v == nn[p].1 && i < nn[p].0) {
                    nn[p] = (i, v);
                }
            }
        }
    }
    Dendrogram { nodes, leaves: n }
}

/// Pearson correlation between the original and cophenetic distances.
pub fn cophenetic_correlation(m: &DistanceMatrix, t: &Dendrogram) -> Result<f64, ClusterError> {
    let n = m.len();
    if n < 3 {
        return Err(ClusterError::TooFewPrograms(n));
    }
    let coph = t.cophenetic();
    let x = m.condensed();
    let y: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| coph[i * n + j]).collect();
    pearson(&x, &y).ok_or(ClusterError::DegenerateVariance)
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageChoice {
    pub method: Linkage,
    pub tree: Dendrogram,
    pub cophenetic: f64,
    /// Per-method correlation in `Linkage::ALL` order; `None` when degenerate.
    pub scores: [Option<f64>; 4],
}

const TIE_TOLERANCE: f64 = 1e-12;

/// Builds all four trees and keeps the one with the highest cophenetic
/// correlation. Degenerate methods score 0. Among (near-)equal maxima the
/// method declared last wins.
pub fn select_linkage(m: &DistanceMatrix) -> Result<LinkageChoice, ClusterError> {
    if m.len() < 3 {
        return Err(ClusterError::TooFewPrograms(m.len()));
    }
    let trees: Vec<Dendrogram> = Linkage::ALL.iter().map(|&l| linkage_tree(m, l)).collect();
    let mut scores = [None; 4];
    for (s, t) in scores.iter_mut().zip(&trees) {
        *s = cophenetic_correlation(m, t).ok();
    }
    if scores.iter().all(Option::is_none) {
        return Err(ClusterError::DegenerateVariance);
    }
    let value = |s: Option<f64>| s.unwrap_or(0.0);
    let max = scores.iter().map(|&s| value(s)).fold(f64::NEG_INFINITY, f64::max);
    let pick = (0..4).rev().find(|&k| value(scores[k]) >= max - TIE_TOLERANCE).expect("max exists");
    Ok(LinkageChoice {
        method: Linkage::ALL[pick],
        tree: trees.into_iter().nth(pick).expect("four trees"),
        cophenetic: value(scores[pick]),
        scores,
    })
}
