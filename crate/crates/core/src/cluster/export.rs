//! Export formats consumed by the cluster explorer.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ClusterSnapshot, DistanceMatrix};

/// `cluster-id member-id is-representative` per line, clusters in snapshot
/// order, `1` marking the representative.
pub fn flat_clusters(s: &ClusterSnapshot) -> String {
    let mut out = String::new();
    for (cid, c) in s.clusters.iter().enumerate() {
        for m in &c.members {
            let _ = writeln!(out, "{cid} {m} {}", u8::from(*m == c.representative));
        }
    }
    out
}

/// Parses [`flat_clusters`] output into `(cluster, member, representative)`.
pub fn parse_flat_clusters(text: &str) -> Result<Vec<(usize, String, bool)>, String> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let parts: Vec<&str> = line.split(' ').collect();
            match parts.as_slice() {
                [cid, member, rep @ ("0" | "1")] => {
                    let cid = cid.parse().map_err(|_| format!("line {}: bad cluster id", i + 1))?;
                    Ok((cid, member.to_string(), *rep == "1"))
                }
                _ => Err(format!("line {}: expected three fields", i + 1)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendroExport {
    pub dist: f64,
    pub count: usize,
    pub leaf_id: Option<String>,
    pub children: Vec<DendroExport>,
}

/// Nested tree rooted at the final merge; `None` for an empty snapshot.
pub fn dendrogram(s: &ClusterSnapshot) -> Option<DendroExport> {
    fn build(s: &ClusterSnapshot, id: usize) -> DendroExport {
        let node = s.tree.node(id);
        DendroExport {
            dist: node.dist,
            count: node.count,
            leaf_id: node.leaf.map(|l| s.ids[l].clone()),
            children: [node.left, node.right].into_iter().flatten().map(|c| build(s, c)).collect(),
        }
    }
    s.tree.root().map(|r| build(s, r))
}

pub fn dendrogram_json(s: &ClusterSnapshot) -> String {
    serde_json::to_string_pretty(&dendrogram(s)).expect("dendrogram serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceNode {
    pub id: String,
    pub cluster: usize,
    pub representative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceLink {
    pub source: String,
    pub target: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceGraph {
    pub threshold_dist: f64,
    pub nodes: Vec<ForceNode>,
    pub links: Vec<ForceLink>,
}

/// Nodes in snapshot id order; one link per pair closer than the snapshot's
/// threshold distance. `m` must contain the snapshot ids as a prefix.
pub fn force_graph(s: &ClusterSnapshot, m: &DistanceMatrix) -> ForceGraph {
    let n = s.ids.len();
    debug_assert!(m.ids().len() >= n && m.ids()[..n] == s.ids[..]);
    let mut nodes = Vec::with_capacity(n);
    for id in &s.ids {
        let cluster = s.cluster_of(id).expect("every id is clustered");
        nodes.push(ForceNode { id: id.clone(), cluster, representative: s.clusters[cluster].representative == *id });
    }
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = m.get(i, j);
            if d < s.threshold_dist {
                links.push(ForceLink { source: s.ids[i].clone(), target: s.ids[j].clone(), distance: d });
            }
        }
    }
    ForceGraph { threshold_dist: s.threshold_dist, nodes, links }
}

pub fn force_graph_json(s: &ClusterSnapshot, m: &DistanceMatrix) -> String {
    serde_json::to_string_pretty(&force_graph(s, m)).expect("force graph serializes")
}
