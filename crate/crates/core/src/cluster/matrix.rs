use serde::{Deserialize, Serialize};

use super::ClusterError;

/// Symmetric pairwise distances over an ordered list of program ids.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    /// Row-major `n × n`.
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the matrix from a distance function evaluated once per
    /// unordered pair.
    pub fn from_fn(ids: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = ids.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { ids, d }
    }

    /// Full square rows; checks shape, symmetry, zero diagonal and finiteness.
    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self, ClusterError> {
        let n = ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(ClusterError::InvalidMatrix(format!("expected a {n}x{n} matrix")));
        }
        let m = DistanceMatrix { ids, d: rows.concat() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        let n = self.len();
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(ClusterError::InvalidMatrix(format!("non-zero diagonal at {i}")));
            }
            for j in i + 1..n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(ClusterError::InvalidMatrix(format!("bad entry ({i}, {j}) = {v}")));
                }
                if v != self.get(j, i) {
                    return Err(ClusterError::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    /// Appends a member given its distances to every existing member.
    pub fn push(&mut self, id: String, row: &[f64]) {
        let n = self.len();
        assert_eq!(row.len(), n, "row length must equal the current size");
        let mut d = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..n {
            d.extend_from_slice(&self.d[i * n..(i + 1) * n]);
            d.push(row[i]);
        }
        d.extend_from_slice(row);
        d.push(0.0);
        self.d = d;
        self.ids.push(id);
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.d[i * n..(i + 1) * n]
    }

    /// Upper-triangle entries in `(0,1), (0,2), …, (n-2,n-1)` order.
    pub fn condensed(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Submatrix over the given member indices, in that order.
    pub fn select(&self, members: &[usize]) -> DistanceMatrix {
        let ids = members.iter().map(|&i| self.ids[i].clone()).collect();
        DistanceMatrix::from_fn(ids, |a, b| self.get(members[a], members[b]))
    }

    /// Median of the non-zero off-diagonal entries; 0 when there are none.
    pub fn median_nonzero(&self) -> f64 {
        let mut v: Vec<f64> = self.condensed().into_iter().filter(|&x| x > 0.0).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        let k = v.len();
        if k % 2 == 1 {
            v[k / 2]
        } else {
            (v[k / 2 - 1] + v[k / 2]) / 2.0
        }
    }
}
