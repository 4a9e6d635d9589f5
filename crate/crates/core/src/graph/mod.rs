//! Canonical in-memory graph, feature, and label representations.
//!
//! A [`Graph`] stores a sparse adjacency in compressed-row layout with
//! non-negative integer edge multiplicities. Undirected graphs keep both
//! directions of every edge so that row sums are degrees; `m` counts each
//! undirected edge once with multiplicities summed. Self-loops are never
//! stored; convolution adds them transiently.
//!
//! All three containers are immutable after construction and safe to share
//! across threads.

pub mod io;

use ndarray::{Array2, ArrayView1};
use std::borrow::Cow;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("node id {id} out of range for n = {n}")]
    NodeOutOfRange { id: u64, n: usize },
    #[error("feature matrix has {rows} rows but graph has {n} nodes")]
    FeatureRowMismatch { rows: usize, n: usize },
    #[error("label vector has {len} entries but graph has {n} nodes")]
    LabelLenMismatch { len: usize, n: usize },
    #[error("label {label} exceeds declared class count {classes}")]
    LabelOutOfRange { label: u32, classes: u32 },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Sparse symmetric (or directed) adjacency with integer multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: u64,
    directed: bool,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<u32>,
}

/// Outcome of building a graph from raw edges: the graph plus the number of
/// self-loop entries that were dropped.
#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub graph: Graph,
    pub self_loops_dropped: usize,
}

impl Graph {
    /// Build a graph from `(u, v, multiplicity)` triples.
    ///
    /// Duplicate pairs are summed, self-loops dropped and counted. For
    /// undirected graphs both orientations of each edge are stored.
    pub fn build(
        n: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (u32, u32, u32)>,
    ) -> Result<BuildOutcome, GraphError> {
        let mut pairs: Vec<(u32, u32, u32)> = Vec::new();
        let mut self_loops_dropped = 0usize;
        for (u, v, w) in edges {
            if u as usize >= n {
                return Err(GraphError::NodeOutOfRange { id: u as u64, n });
            }
            if v as usize >= n {
                return Err(GraphError::NodeOutOfRange { id: v as u64, n });
            }
            if u == v {
                self_loops_dropped += 1;
                continue;
            }
            if w == 0 {
                continue;
            }
            if directed {
                pairs.push((u, v, w));
            } else {
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                pairs.push((a, b, w));
            }
        }
        pairs.sort_unstable_by_key(|&(u, v, _)| (u, v));

        // Merge duplicates, then count m over stored pairs (once per pair).
        let mut merged: Vec<(u32, u32, u32)> = Vec::with_capacity(pairs.len());
        for (u, v, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => {
                    last.2 = last.2.checked_add(w).ok_or_else(|| {
                        GraphError::Invalid(format!("multiplicity overflow on edge ({u}, {v})"))
                    })?;
                }
                _ => merged.push((u, v, w)),
            }
        }
        let m: u64 = merged.iter().map(|&(_, _, w)| w as u64).sum();

        let mut degree_count = vec![0usize; n];
        for &(u, v, _) in &merged {
            degree_count[u as usize] += 1;
            if !directed {
                degree_count[v as usize] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + degree_count[i];
        }
        let nnz = row_ptr[n];
        let mut cols = vec![0u32; nnz];
        let mut weights = vec![0u32; nnz];
        let mut cursor = row_ptr[..n].to_vec();
        for &(u, v, w) in &merged {
            let cu = cursor[u as usize];
            cols[cu] = v;
            weights[cu] = w;
            cursor[u as usize] += 1;
            if !directed {
                let cv = cursor[v as usize];
                cols[cv] = u;
                weights[cv] = w;
                cursor[v as usize] += 1;
            }
        }
        // Neighbor lists must be sorted for binary-search lookups.
        let mut graph = Graph {
            n,
            m,
            directed,
            row_ptr,
            cols,
            weights,
        };
        graph.sort_rows();
        Ok(BuildOutcome {
            graph,
            self_loops_dropped,
        })
    }

    fn sort_rows(&mut self) {
        for u in 0..self.n {
            let (s, e) = (self.row_ptr[u], self.row_ptr[u + 1]);
            let mut row: Vec<(u32, u32)> = self.cols[s..e]
                .iter()
                .copied()
                .zip(self.weights[s..e].iter().copied())
                .collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            for (k, (c, w)) in row.into_iter().enumerate() {
                self.cols[s + k] = c;
                self.weights[s + k] = w;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edge count: undirected edges counted once with multiplicities summed;
    /// for directed graphs, the directed edge count.
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Number of distinct stored edges (multiplicities clamped to one).
    pub fn distinct_edge_count(&self) -> u64 {
        if self.directed {
            self.cols.len() as u64
        } else {
            (self.cols.len() / 2) as u64
        }
    }

    /// Neighbors of `u` as `(node, multiplicity)` pairs, ascending by node id.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let (s, e) = (self.row_ptr[u], self.row_ptr[u + 1]);
        self.cols[s..e]
            .iter()
            .copied()
            .zip(self.weights[s..e].iter().copied())
    }

    pub fn neighbor_ids(&self, u: usize) -> &[u32] {
        &self.cols[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn neighbor_weights(&self, u: usize) -> &[u32] {
        &self.weights[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    /// Multiplicity of edge `(u, v)`, zero when absent. For directed graphs
    /// this is the stored orientation only.
    pub fn weight(&self, u: usize, v: u32) -> u32 {
        let ids = self.neighbor_ids(u);
        match ids.binary_search(&v) {
            Ok(pos) => self.neighbor_weights(u)[pos],
            Err(_) => 0,
        }
    }

    /// Stored edges: unordered pairs `(u, v, w)` with `u < v` for undirected
    /// graphs, directed pairs as given otherwise. Each pair appears once.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u).filter_map(move |(v, w)| {
                if self.directed || (u as u32) < v {
                    Some((u as u32, v, w))
                } else {
                    None
                }
            })
        })
    }

    /// Multiplicity-weighted degrees; `augmented` adds the convolution
    /// self-loop (+1 per node). Directed graphs report total (in + out).
    pub fn degree_vector(&self, augmented: bool) -> Vec<u64> {
        let mut deg = vec![0u64; self.n];
        if self.directed {
            for u in 0..self.n {
                for (v, w) in self.neighbors(u) {
                    deg[u] += w as u64;
                    deg[v as usize] += w as u64;
                }
            }
        } else {
            for (u, slot) in deg.iter_mut().enumerate() {
                *slot = self.neighbor_weights(u).iter().map(|&w| w as u64).sum();
            }
        }
        if augmented {
            for d in &mut deg {
                *d += 1;
            }
        }
        deg
    }

    /// Distinct-neighbor degrees (multiplicities clamped to one). Directed
    /// graphs report in + out distinct counts.
    pub fn distinct_degree_vector(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n];
        if self.directed {
            for u in 0..self.n {
                deg[u] += self.neighbor_ids(u).len() as u64;
                for &v in self.neighbor_ids(u) {
                    deg[v as usize] += 1;
                }
            }
        } else {
            for (u, slot) in deg.iter_mut().enumerate() {
                *slot = self.neighbor_ids(u).len() as u64;
            }
        }
        deg
    }

    /// Undirected view: identity for undirected graphs; for directed graphs a
    /// symmetrized copy with `w(i,j) + w(j,i)` multiplicities.
    pub fn as_undirected(&self) -> Cow<'_, Graph> {
        if !self.directed {
            return Cow::Borrowed(self);
        }
        let edges: Vec<(u32, u32, u32)> = self.edges().collect();
        let out = Graph::build(self.n, false, edges)
            .expect("symmetrizing a valid graph cannot fail")
            .graph;
        Cow::Owned(out)
    }

    /// Clamp multiplicities to one, keeping directedness.
    pub fn clamped(&self) -> Graph {
        let edges: Vec<(u32, u32, u32)> = self.edges().map(|(u, v, _)| (u, v, 1)).collect();
        Graph::build(self.n, self.directed, edges)
            .expect("clamping a valid graph cannot fail")
            .graph
    }
}

/// Dense row-major per-node real features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self, GraphError> {
        for ((row, col), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(GraphError::NonFiniteFeature { row, col });
            }
        }
        Ok(FeatureMatrix { values })
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn check_pairing(&self, g: &Graph) -> Result<(), GraphError> {
        if self.rows() != g.n() {
            return Err(GraphError::FeatureRowMismatch {
                rows: self.rows(),
                n: g.n(),
            });
        }
        Ok(())
    }
}

/// Integer class label per node, ids dense in `[0, C)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<u32>,
    num_classes: u32,
}

impl LabelVector {
    pub fn new(labels: Vec<u32>, num_classes: u32) -> Result<Self, GraphError> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(GraphError::LabelOutOfRange {
                label: bad,
                classes: num_classes,
            });
        }
        Ok(LabelVector {
            labels,
            num_classes,
        })
    }

    /// Infer the class count as `max label + 1`.
    pub fn from_labels(labels: Vec<u32>) -> Self {
        let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        LabelVector {
            labels,
            num_classes,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    /// Number of nodes per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_classes as usize];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn check_pairing(&self, g: &Graph) -> Result<(), GraphError> {
        if self.len() != g.n() {
            return Err(GraphError::LabelLenMismatch {
                len: self.len(),
                n: g.n(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn path3() -> Graph {
        Graph::build(3, false, vec![(0, 1, 1), (1, 2, 1)])
            .unwrap()
            .graph
    }

    #[test]
    fn path_graph_counts() {
        let g = path3();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 2);
        assert_eq!(g.degree_vector(false), vec![1, 2, 1]);
        assert_eq!(g.degree_vector(true), vec![2, 3, 2]);
    }

    #[test]
    fn duplicate_edges_sum_multiplicities() {
        let out = Graph::build(2, false, vec![(0, 1, 1), (1, 0, 1)]).unwrap();
        assert_eq!(out.graph.m(), 2);
        assert_eq!(out.graph.weight(0, 1), 2);
        assert_eq!(out.graph.degree_vector(false), vec![2, 2]);
    }

    #[test]
    fn self_loops_dropped_and_counted() {
        let out = Graph::build(2, false, vec![(0, 0, 1), (0, 1, 1)]).unwrap();
        assert_eq!(out.self_loops_dropped, 1);
        assert_eq!(out.graph.m(), 1);
    }

    #[test]
    fn degree_sum_is_twice_m() {
        let g = Graph::build(5, false, vec![(0, 1, 2), (1, 2, 1), (3, 4, 5)])
            .unwrap()
            .graph;
        let total: u64 = g.degree_vector(false).iter().sum();
        assert_eq!(total, 2 * g.m());
    }

    #[test]
    fn directed_total_degrees() {
        let g = Graph::build(3, true, vec![(0, 1, 1), (1, 2, 2)])
            .unwrap()
            .graph;
        assert_eq!(g.m(), 3);
        assert_eq!(g.degree_vector(false), vec![1, 3, 2]);
        let und = g.as_undirected();
        assert!(!und.directed());
        assert_eq!(und.m(), 3);
    }

    #[test]
    fn out_of_range_node_rejected() {
        assert!(Graph::build(2, false, vec![(0, 2, 1)]).is_err());
    }

    #[test]
    fn feature_matrix_rejects_non_finite() {
        assert!(FeatureMatrix::new(array![[1.0, f64::NAN]]).is_err());
        assert!(FeatureMatrix::new(array![[1.0, 2.0]]).is_ok());
    }

    #[test]
    fn label_vector_bounds() {
        assert!(LabelVector::new(vec![0, 2], 2).is_err());
        let y = LabelVector::from_labels(vec![0, 1, 1]);
        assert_eq!(y.num_classes(), 2);
        assert_eq!(y.class_sizes(), vec![1, 2]);
    }
}
