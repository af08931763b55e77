use serde::{Deserialize, Serialize};

use super::prune::{prune_clusters, representative, threshold_count};
use super::{linkage_tree, select_linkage, ClusterError, Dendrogram, DistanceMatrix, Linkage};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    /// Merge height above which the tree is always split. Defaults to twice
    /// the median non-zero distance.
    pub threshold_dist: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<String>,
    pub representative: String,
    /// False for singletons of programs the tree cut never captured.
    pub from_tree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSnapshot {
    pub problem_id: String,
    pub linkage: Linkage,
    /// Correlation of the chosen tree; `None` when it could not be computed.
    pub cophenetic: Option<f64>,
    pub threshold_dist: f64,
    pub threshold_count: usize,
    pub clusters: Vec<Cluster>,
    /// Ids in matrix order; the tree's leaves index into this list.
    pub ids: Vec<String>,
    pub tree: Dendrogram,
    /// Unix seconds, supplied by the caller.
    pub created_at: i64,
}

impl ClusterSnapshot {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Index of the cluster holding `id`.
    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.members.iter().any(|m| m == id))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }
}

/// Linkage selection, pruning and representatives over the whole matrix.
///
/// With fewer than three programs every program is its own cluster. When
/// every linkage is degenerate (all distances equal) average linkage is used
/// without a correlation.
pub fn build_snapshot(
    problem_id: &str,
    m: &DistanceMatrix,
    config: &ClusterConfig,
    created_at: i64,
) -> Result<ClusterSnapshot, ClusterError> {
    m.validate()?;
    let n = m.len();
    let threshold_dist = match config.threshold_dist {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(t) => return Err(ClusterError::InvalidThreshold(t)),
        None => 2.0 * m.median_nonzero(),
    };
    let (linkage, cophenetic, tree) = if n < 3 {
        (Linkage::Average, None, linkage_tree(m, Linkage::Average))
    } else {
        match select_linkage(m) {
            Ok(choice) => (choice.method, Some(choice.cophenetic), choice.tree),
            Err(ClusterError::DegenerateVariance) => (Linkage::Average, None, linkage_tree(m, Linkage::Average)),
            Err(e) => return Err(e),
        }
    };
    let groups: Vec<(Vec<usize>, bool)> = if n < 3 {
        (0..n).map(|i| (vec![i], false)).collect()
    } else {
        prune_clusters(&tree, n, threshold_dist).into_iter().map(|p| (p.members, p.from_tree)).collect()
    };
    let ids = m.ids().to_vec();
    let clusters = groups
        .into_iter()
        .map(|(members, from_tree)| Cluster {
            representative: ids[representative(&members, m)].clone(),
            members: members.iter().map(|&i| ids[i].clone()).collect(),
            from_tree,
        })
        .collect();
    Ok(ClusterSnapshot {
        problem_id: problem_id.to_string(),
        linkage,
        cophenetic,
        threshold_dist,
        threshold_count: threshold_count(n),
        clusters,
        ids,
        tree,
        created_at,
    })
}
