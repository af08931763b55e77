//! Marks variance with and without clustering.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterVariance {
    pub cluster: usize,
    /// Members that have marks.
    pub size: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub overall_variance: f64,
    /// Per-cluster variances averaged with cluster sizes as weights.
    pub weighted_cluster_variance: f64,
    pub clusters: Vec<ClusterVariance>,
    /// Members without marks, in cluster order.
    pub excluded: Vec<String>,
}

impl VarianceReport {
    /// `weighted / overall`, or `None` when the overall variance is zero.
    pub fn ratio(&self) -> Option<f64> {
        (self.overall_variance > 0.0).then(|| self.weighted_cluster_variance / self.overall_variance)
    }

    /// Plain-text table, one row per cluster followed by the totals.
    pub fn to_table(&self) -> String {
        let mut out = String::from("cluster\tsize\tmean\tvariance\n");
        for c in &self.clusters {
            out.push_str(&format!("{}\t{}\t{:.4}\t{:.4}\n", c.cluster, c.size, c.mean, c.variance));
        }
        out.push_str(&format!("overall\t\t\t{:.4}\n", self.overall_variance));
        out.push_str(&format!("weighted\t\t\t{:.4}\n", self.weighted_cluster_variance));
        if let Some(r) = self.ratio() {
            out.push_str(&format!("reduction\t\t\t{:.2}%\n", (1.0 - r) * 100.0));
        }
        out
    }
}

/// Population mean and variance; `(0, 0)` for an empty slice.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

/// Variance report over arbitrary clusters of ids. Clusters left empty after
/// excluding members without marks get weight 0.
pub fn evaluate(clusters: &[Vec<String>], marks: &HashMap<String, f64>) -> VarianceReport {
    let mut all = Vec::new();
    let mut excluded = Vec::new();
    let mut per = Vec::with_capacity(clusters.len());
    let mut weighted = 0.0;
    for (cid, members) in clusters.iter().enumerate() {
        let mut xs = Vec::with_capacity(members.len());
        for m in members {
            match marks.get(m) {
                Some(&x) => xs.push(x),
                None => excluded.push(m.clone()),
            }
        }
        let (mean, variance) = mean_variance(&xs);
        weighted += variance * xs.len() as f64;
        all.extend_from_slice(&xs);
        per.push(ClusterVariance { cluster: cid, size: xs.len(), mean, variance });
    }
    let overall = mean_variance(&all).1;
    let weighted_cluster_variance = if all.is_empty() { 0.0 } else { weighted / all.len() as f64 };
    VarianceReport { overall_variance: overall, weighted_cluster_variance, clusters: per, excluded }
}

pub fn evaluate_snapshot(s: &ClusterSnapshot, marks: &HashMap<String, f64>) -> VarianceReport {
    let clusters: Vec<Vec<String>> = s.clusters.iter().map(|c| c.members.clone()).collect();
    evaluate(&clusters, marks)
}
