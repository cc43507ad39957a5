//! Undirected simple graphs, the property functions evaluated on them, and
//! the JSON-lines dataset format.

mod io;
mod properties;

pub use io::{read_jsonl, read_jsonl_from, write_jsonl, write_jsonl_to, GraphRecord};
pub use properties::{
    avg_clustering, avg_degree, avg_shortest_path, compute_properties, maximal_clique_count,
    triangle_count, PropertyKind, PropertyMatrix, PropertyRegistry, PropertyVector,
};

use crate::error::{Error, Result};

/// Undirected simple graph with canonically ordered edges (`u < v`), sorted
/// and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    id: String,
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Validates and canonicalizes an edge list. Endpoint order is free;
    /// self-loops, out-of-range endpoints and repeated edges are rejected.
    pub fn new(
        id: impl Into<String>,
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let id = id.into();
        if num_nodes == 0 {
            return Err(Error::InvalidGraph(format!("`{id}` has no nodes")));
        }
        let mut canonical = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("`{id}` has self-loop on {u}")));
            }
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "`{id}` edge ({u},{v}) exceeds node count {num_nodes}"
                )));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "`{id}` repeats edge ({},{})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self {
            id,
            num_nodes,
            edges: canonical,
        })
    }

    /// Builds from edges already known to be canonical, sorted and unique.
    pub(crate) fn from_canonical(id: String, num_nodes: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(u, v)| u < v && v < num_nodes));
        Self {
            id,
            num_nodes,
            edges,
        }
    }

    pub fn empty(id: impl Into<String>, num_nodes: usize) -> Result<Self> {
        Self::new(id, num_nodes, std::iter::empty())
    }

    pub fn complete(id: impl Into<String>, num_nodes: usize) -> Result<Self> {
        let edges = (0..num_nodes).flat_map(|u| (u + 1..num_nodes).map(move |v| (u, v)));
        Self::new(id, num_nodes, edges)
    }

    pub fn path(id: impl Into<String>, num_nodes: usize) -> Result<Self> {
        Self::new(id, num_nodes, (1..num_nodes).map(|v| (v - 1, v)))
    }

    pub fn cycle(id: impl Into<String>, num_nodes: usize) -> Result<Self> {
        Self::new(
            id,
            num_nodes,
            (0..num_nodes).map(|v| (v, (v + 1) % num_nodes)),
        )
    }

    /// Star with one hub (node 0) and `leaves` leaves.
    pub fn star(id: impl Into<String>, leaves: usize) -> Result<Self> {
        Self::new(id, leaves + 1, (1..=leaves).map(|v| (0, v)))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Copy with the state of pair `(u, v)` flipped and a new id.
    pub fn with_toggled(&self, id: impl Into<String>, u: usize, v: usize) -> Self {
        assert!(u != v && u < self.num_nodes && v < self.num_nodes);
        let key = (u.min(v), u.max(v));
        let mut edges = self.edges.clone();
        match edges.binary_search(&key) {
            Ok(pos) => {
                edges.remove(pos);
            }
            Err(pos) => edges.insert(pos, key),
        }
        Self::from_canonical(id.into(), self.num_nodes, edges)
    }

    pub fn with_id(&self, id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..self.clone()
        }
    }
}
