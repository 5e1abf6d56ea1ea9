//! Dissimilarity construction: attribute normalization, Euclidean-family
//! distances, and manifold distances from shortest paths on a t-nn graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{squared_distance, DataMatrix, DissimilarityMatrix, Measure};

/// Maps every attribute onto `[0, 1]`. Constant attributes become 0.
pub fn min_max_normalize(data: &DataMatrix) -> Result<DataMatrix> {
    let p = data.dim();
    let mut lo = vec![f64::INFINITY; p];
    let mut hi = vec![f64::NEG_INFINITY; p];
    for (r, row) in data.rows().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteData { row: r, col: c });
            }
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    let values = data
        .rows()
        .flat_map(|row| {
            row.iter().enumerate().map(|(c, &v)| {
                let span = hi[c] - lo[c];
                if span > 0.0 {
                    ((v - lo[c]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
        })
        .collect();
    DataMatrix::new(data.len(), p, values)
}

/// `d_ij = ||x_i - x_j||^2`.
pub fn squared_euclidean(data: &DataMatrix) -> Result<DissimilarityMatrix> {
    DissimilarityMatrix::from_fn(data.len(), Measure::SquaredEuclidean, |i, j| {
        squared_distance(data.row(i), data.row(j))
    })
}

/// `d_ij = ||x_i - x_j||`.
pub fn euclidean(data: &DataMatrix) -> Result<DissimilarityMatrix> {
    DissimilarityMatrix::from_fn(data.len(), Measure::Euclidean, |i, j| {
        squared_distance(data.row(i), data.row(j)).sqrt()
    })
}

/// Symmetric weighted graph over the points.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    t: usize,
    bridges: usize,
}

impl NeighborGraph {
    /// Builds a graph from an undirected edge list; duplicate edges keep the first weight.
    pub fn from_edges(n: usize, t: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self {
            adjacency: vec![Vec::new(); n],
            t,
            bridges: 0,
        };
        for &(a, b, w) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidParameter(format!("bad edge ({a}, {b})")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter(format!("bad edge weight {w}")));
            }
            g.add_edge(a, b, w);
        }
        Ok(g)
    }

    fn add_edge(&mut self, a: usize, b: usize, w: f64) {
        if self.adjacency[a].iter().any(|&(j, _)| j == b) {
            return;
        }
        self.adjacency[a].push((b, w));
        self.adjacency[b].push((a, w));
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of edges added to join disconnected components.
    pub fn bridge_count(&self) -> usize {
        self.bridges
    }

    /// Component id per vertex, numbered in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adjacency[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}

/// Length assigned to a t-nn graph edge. Neighbor choice and bridging are
/// the same either way, since squaring preserves the distance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeWeight {
    #[default]
    Euclidean,
    SquaredEuclidean,
}

/// Connects each point to its `t` nearest points (Euclidean, ties by index),
/// symmetrizes by edge union, then bridges components with the shortest
/// available inter-component edge until the graph is connected.
pub fn build_tnn_graph(data: &DataMatrix, t: usize) -> Result<NeighborGraph> {
    build_tnn_graph_weighted(data, t, EdgeWeight::Euclidean)
}

/// As [`build_tnn_graph`], with a choice of edge length.
pub fn build_tnn_graph_weighted(data: &DataMatrix, t: usize, weight: EdgeWeight) -> Result<NeighborGraph> {
    let mut graph = tnn_graph(data, t)?;
    if weight == EdgeWeight::SquaredEuclidean {
        for list in &mut graph.adjacency {
            for e in list.iter_mut() {
                e.1 *= e.1;
            }
        }
    }
    Ok(graph)
}

fn tnn_graph(data: &DataMatrix, t: usize) -> Result<NeighborGraph> {
    let m = data.len();
    if t == 0 || t >= m {
        return Err(Error::InvalidNeighborCount { t, m });
    }
    let dist = |i: usize, j: usize| squared_distance(data.row(i), data.row(j)).sqrt();

    let nearest: Vec<Vec<(usize, f64)>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut others: Vec<(usize, f64)> =
                (0..m).filter(|&j| j != i).map(|j| (j, dist(i, j))).collect();
            others.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            others.truncate(t);
            others
        })
        .collect();

    let mut graph = NeighborGraph {
        adjacency: vec![Vec::new(); m],
        t,
        bridges: 0,
    };
    for (i, list) in nearest.iter().enumerate() {
        for &(j, w) in list {
            graph.add_edge(i, j, w);
        }
    }

    loop {
        let comp = graph.components();
        if comp.iter().all(|&c| c == 0) {
            break;
        }
        let best = (0..m)
            .into_par_iter()
            .filter_map(|i| {
                (0..m)
                    .filter(|&j| comp[j] != comp[i] && j > i)
                    .map(|j| (dist(i, j), i, j))
                    .min_by(cmp_bridge)
            })
            .min_by(cmp_bridge)
            .expect("a disconnected graph has an inter-component pair");
        graph.add_edge(best.1, best.2, best.0);
        graph.bridges += 1;
    }
    Ok(graph)
}

fn cmp_bridge(a: &(f64, usize, usize), b: &(f64, usize, usize)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path lengths (Dijkstra).
pub fn shortest_paths_from(graph: &NeighborGraph, source: usize) -> Vec<f64> {
    let n = graph.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, w) in graph.neighbors(node) {
            let candidate = d + w;
            if candidate < dist[next] {
                dist[next] = candidate;
                heap.push(HeapEntry {
                    dist: candidate,
                    node: next,
                });
            }
        }
    }
    dist
}

/// Graph distance between every pair of vertices.
pub fn manifold_distance(graph: &NeighborGraph) -> Result<DissimilarityMatrix> {
    let n = graph.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| shortest_paths_from(graph, s))
        .collect();
    if rows.iter().flatten().any(|d| !d.is_finite()) {
        return Err(Error::DisconnectedGraph);
    }
    // Path sums can differ in the last bit between the two directions; use the
    // upper triangle for both halves.
    DissimilarityMatrix::from_fn(n, Measure::ManifoldGraph { t: graph.t() }, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[[f64; 2]]) -> DataMatrix {
        DataMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn normalize_affine_and_constant_columns() {
        let d = DataMatrix::new(3, 2, vec![2.0, 7.0, 4.0, 7.0, 6.0, 7.0]).unwrap();
        let n = min_max_normalize(&d).unwrap();
        assert_eq!(n.as_slice(), &[0.0, 0.0, 0.5, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn squared_euclidean_three_four_five() {
        let d = squared_euclidean(&pts(&[[0.0, 0.0], [3.0, 4.0]])).unwrap();
        assert_eq!(d.get(0, 1), 25.0);
        assert_eq!(d.max(), 25.0);
        let single = squared_euclidean(&pts(&[[1.0, 2.0]])).unwrap();
        assert_eq!(single.as_slice(), &[0.0]);
    }

    #[test]
    fn tnn_collinear_middle_has_degree_two() {
        let g = build_tnn_graph(&pts(&[[0.0, 0.0], [1.0, 0.0], [2.5, 0.0]]), 1).unwrap();
        assert_eq!(g.degree(1), 2);
        assert!(g.is_connected());
    }

    #[test]
    fn tnn_bridges_far_pairs() {
        let data = pts(&[[0.0, 0.0], [0.1, 0.0], [10.0, 0.0], [10.1, 0.0]]);
        let g = build_tnn_graph(&data, 1).unwrap();
        assert_eq!(g.bridge_count(), 1);
        assert!(g.is_connected());
        // The shortest inter-component edge joins points 1 and 2.
        assert!(g.neighbors(1).iter().any(|&(j, _)| j == 2));
    }

    #[test]
    fn tnn_rejects_bad_t() {
        let data = pts(&[[0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(
            build_tnn_graph(&data, 2),
            Err(Error::InvalidNeighborCount { t: 2, m: 2 })
        ));
        assert!(build_tnn_graph(&data, 0).is_err());
    }

    #[test]
    fn path_graph_distance() {
        let g = NeighborGraph::from_edges(3, 1, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let d = manifold_distance(&g).unwrap();
        assert_eq!(d.get(0, 2), 2.0);
    }

    #[test]
    fn disconnected_graph_is_error() {
        let g = NeighborGraph::from_edges(3, 1, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(manifold_distance(&g), Err(Error::DisconnectedGraph)));
    }

    #[test]
    fn complete_graph_gives_euclidean() {
        let data = pts(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0], [-2.0, 0.5]]);
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((i, j, squared_distance(data.row(i), data.row(j)).sqrt()));
            }
        }
        let g = NeighborGraph::from_edges(4, 3, &edges).unwrap();
        let d = manifold_distance(&g).unwrap();
        let e = euclidean(&data).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((d.get(i, j) - e.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
