//! Hierarchical clustering of a problem's correct programs.
//!
//! The distances are not a metric, so programs are clustered directly from
//! the matrix: all four classic linkages are built, the one whose tree best
//! preserves the original distances (cophenetic correlation) is kept, and the
//! tree is cut into clusters of at most `⌊√n⌋` programs.

mod export;
mod linkage;
mod matrix;
mod prune;
mod snapshot;

use thiserror::Error;

pub use export::{
    dendrogram, dendrogram_json, flat_clusters, force_graph, force_graph_json, parse_flat_clusters, DendroExport,
    ForceGraph, ForceLink, ForceNode,
};
pub use linkage::{cophenetic_correlation, linkage_tree, select_linkage, DendroNode, Dendrogram, Linkage, LinkageChoice};
pub use matrix::DistanceMatrix;
pub use prune::{prune_clusters, representative, threshold_count, Pruned};
pub use snapshot::{build_snapshot, Cluster, ClusterConfig, ClusterSnapshot};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("distances have zero variance")]
    DegenerateVariance,
    #[error("need at least 3 programs, got {0}")]
    TooFewPrograms(usize),
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid threshold distance {0}")]
    InvalidThreshold(f64),
}
