use super::{Dendrogram, DistanceMatrix};

/// Largest multi-member cluster the pruning will emit: `⌊√n⌋`.
pub fn threshold_count(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// A group of matrix indices cut from the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruned {
    pub members: Vec<usize>,
    /// False for leaves the descent never captured.
    pub from_tree: bool,
}

/// Cuts the tree top-down. A node is split while it is higher than
/// `threshold_dist` or holds at least `2 · ⌊√n⌋` leaves; a node within both
/// bounds becomes a cluster once it holds at most `⌊√n⌋` leaves. Leaves the
/// descent never captures become singleton clusters.
///
/// The result is sorted by smallest member; members are sorted.
pub fn prune_clusters(t: &Dendrogram, n: usize, threshold_dist: f64) -> Vec<Pruned> {
    let limit = threshold_count(n);
    let mut out = Vec::new();
    let mut captured = vec![false; t.leaves];
    if let Some(root) = t.root() {
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = t.node(id);
            let (Some(l), Some(r)) = (node.left, node.right) else {
                // Leaf: nothing below it to descend into.
                continue;
            };
            // Splitting at `2 · limit` leaves is subsumed by `count > limit`.
            if node.dist > threshold_dist || node.count > limit {
                stack.push(r);
                stack.push(l);
            } else {
                let mut members = t.leaves_under(id);
                members.sort_unstable();
                for &m in &members {
                    captured[m] = true;
                }
                out.push(Pruned { members, from_tree: true });
            }
        }
    }
    for (leaf, seen) in captured.iter().enumerate() {
        if !seen {
            out.push(Pruned { members: vec![leaf], from_tree: false });
        }
    }
    out.sort_by_key(|c| c.members[0]);
    out
}

/// Member with the least root-mean-square distance to all members; ties go
/// to the member listed first.
pub fn representative(members: &[usize], m: &DistanceMatrix) -> usize {
    assert!(!members.is_empty(), "representative of an empty cluster");
    let mut best = (members[0], f64::INFINITY);
    for &p in members {
        let ss: f64 = members.iter().map(|&q| m.get(p, q).powi(2)).sum();
        let rms = (ss / members.len() as f64).sqrt();
        if rms < best.1 {
            best = (p, rms);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{linkage_tree, Linkage};

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn integer_square_root() {
        let got: Vec<usize> = [0, 1, 3, 4, 8, 9, 24, 25, 63, 64, 99, 100].iter().map(|&n| threshold_count(n)).collect();
        assert_eq!(got, [0, 1, 1, 2, 2, 3, 4, 5, 7, 8, 9, 10]);
    }

    #[test]
    fn zero_matrix_of_four() {
        // Merges (0,1), ({0,1},2), ({0,1,2},3), all at height 0. The root
        // holds 4 = 2·2 leaves and splits; {0,1,2} exceeds 2 and splits;
        // {0,1} is emitted; 2 and 3 are never captured.
        let m = DistanceMatrix::from_fn(ids(4), |_, _| 0.0);
        let t = linkage_tree(&m, Linkage::Average);
        let got = prune_clusters(&t, 4, 0.0);
        let members: Vec<Vec<usize>> = got.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, [vec![0, 1], vec![2], vec![3]]);
        assert_eq!(got.iter().map(|c| c.from_tree).collect::<Vec<_>>(), [true, false, false]);
    }

    #[test]
    fn single_program() {
        let m = DistanceMatrix::from_fn(ids(1), |_, _| 0.0);
        let t = linkage_tree(&m, Linkage::Single);
        assert_eq!(prune_clusters(&t, 1, 0.0), [Pruned { members: vec![0], from_tree: false }]);
    }

    #[test]
    fn two_separated_groups() {
        let m = DistanceMatrix::from_fn(ids(6), |i, j| if (i < 3) == (j < 3) { 1.0 } else { 100.0 });
        let t = linkage_tree(&m, Linkage::Average);
        let got = prune_clusters(&t, 6, 2.0);
        let mut all: Vec<usize> = got.iter().flat_map(|c| c.members.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, [0, 1, 2, 3, 4, 5]);
        assert!(got.len() >= 3);
        for c in &got {
            assert!(c.members.len() <= 2);
            assert!(c.members.iter().all(|&x| x < 3) || c.members.iter().all(|&x| x >= 3));
        }
    }

    #[test]
    fn medoid_of_three() {
        // d(a,b)=1, d(a,c)=1, d(b,c)=2
        let m = DistanceMatrix::from_fn(ids(3), |i, _| if i == 0 { 1.0 } else { 2.0 });
        assert_eq!(representative(&[0, 1, 2], &m), 0);
        assert_eq!(representative(&[2], &m), 2);
        assert_eq!(representative(&[1, 2], &m), 1);
    }
}
