use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// The graph statistics available as split or test properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKind {
    AvgDegree,
    TriangleCount,
    AvgShortestPath,
    AvgClustering,
    MaximalCliqueCount,
}

impl PropertyKind {
    /// Canonical registration order; indices into it are stable across runs.
    pub const ALL: [PropertyKind; 5] = [
        PropertyKind::AvgDegree,
        PropertyKind::TriangleCount,
        PropertyKind::AvgShortestPath,
        PropertyKind::AvgClustering,
        PropertyKind::MaximalCliqueCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropertyKind::AvgDegree => "avg_degree",
            PropertyKind::TriangleCount => "triangle_count",
            PropertyKind::AvgShortestPath => "avg_shortest_path",
            PropertyKind::AvgClustering => "avg_clustering",
            PropertyKind::MaximalCliqueCount => "maximal_clique_count",
        }
    }

    pub fn evaluate(self, g: &Graph) -> Result<f64> {
        match self {
            PropertyKind::AvgDegree => Ok(avg_degree(g)),
            PropertyKind::TriangleCount => Ok(triangle_count(g)),
            PropertyKind::AvgShortestPath => avg_shortest_path(g),
            PropertyKind::AvgClustering => Ok(avg_clustering(g)),
            PropertyKind::MaximalCliqueCount => Ok(maximal_clique_count(g)),
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        PropertyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .or(match s {
                "degree" => Some(PropertyKind::AvgDegree),
                "triads" | "triangles" => Some(PropertyKind::TriangleCount),
                "shortest_path" => Some(PropertyKind::AvgShortestPath),
                "clustering" => Some(PropertyKind::AvgClustering),
                "maximal_cliques" | "cliques" => Some(PropertyKind::MaximalCliqueCount),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown property `{s}`")))
    }
}

/// Ordered, non-empty list of properties; position in the list is the
/// property index used everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PropertyKind>", into = "Vec<PropertyKind>")]
pub struct PropertyRegistry {
    kinds: Vec<PropertyKind>,
}

impl PropertyRegistry {
    pub fn new(kinds: Vec<PropertyKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::Config("property registry is empty".into()));
        }
        for (i, k) in kinds.iter().enumerate() {
            if kinds[..i].contains(k) {
                return Err(Error::Config(format!("property `{k}` registered twice")));
            }
        }
        Ok(Self { kinds })
    }

    /// All five properties in canonical order.
    pub fn canonical() -> Self {
        Self {
            kinds: PropertyKind::ALL.to_vec(),
        }
    }

    /// Degree, triangle count and clustering: the three-property set used
    /// for the synthetic model-selection runs.
    pub fn synthetic() -> Self {
        Self {
            kinds: vec![
                PropertyKind::AvgDegree,
                PropertyKind::TriangleCount,
                PropertyKind::AvgClustering,
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kinds(&self) -> &[PropertyKind] {
        &self.kinds
    }

    pub fn names(&self) -> Vec<String> {
        self.kinds.iter().map(|k| k.name().to_string()).collect()
    }

    pub fn index_of(&self, kind: PropertyKind) -> Option<usize> {
        self.kinds.iter().position(|&k| k == kind)
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.kinds.len() {
            Ok(())
        } else {
            Err(Error::PropertyOutOfRange {
                index,
                count: self.kinds.len(),
            })
        }
    }

    pub fn evaluate(&self, g: &Graph) -> Result<PropertyVector> {
        let values = self
            .kinds
            .iter()
            .map(|k| {
                k.evaluate(g).map_err(|e| Error::Property {
                    graph_id: g.id().to_string(),
                    property: k.name().to_string(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PropertyVector {
            graph_id: g.id().to_string(),
            values,
        })
    }
}

impl TryFrom<Vec<PropertyKind>> for PropertyRegistry {
    type Error = Error;

    fn try_from(kinds: Vec<PropertyKind>) -> Result<Self> {
        Self::new(kinds)
    }
}

impl From<PropertyRegistry> for Vec<PropertyKind> {
    fn from(r: PropertyRegistry) -> Self {
        r.kinds
    }
}

/// Property values of one graph, aligned with a registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVector {
    pub graph_id: String,
    pub values: Vec<f64>,
}

/// Property vectors for a whole dataset plus the registry that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyMatrix {
    pub registry: PropertyRegistry,
    pub rows: Vec<PropertyVector>,
}

impl PropertyMatrix {
    pub fn compute(graphs: &[Graph], registry: &PropertyRegistry) -> Result<Self> {
        Ok(Self {
            registry: registry.clone(),
            rows: compute_properties(graphs, registry)?,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_properties(&self) -> usize {
        self.registry.len()
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[index]).collect()
    }

    /// Rows at the given positions, in that order.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self {
            registry: self.registry.clone(),
            rows: positions.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// One property vector per graph, in dataset order.
pub fn compute_properties(
    graphs: &[Graph],
    registry: &PropertyRegistry,
) -> Result<Vec<PropertyVector>> {
    graphs.par_iter().map(|g| registry.evaluate(g)).collect()
}

pub fn avg_degree(g: &Graph) -> f64 {
    2.0 * g.num_edges() as f64 / g.num_nodes() as f64
}

/// Number of 3-cliques, by intersecting neighbour lists along each edge and
/// counting only common neighbours above both endpoints.
pub fn triangle_count(g: &Graph) -> f64 {
    let adj = g.adjacency();
    let mut count = 0usize;
    for &(u, v) in g.edges() {
        count += sorted_intersection(&adj[u], &adj[v])
            .filter(|&w| w > v)
            .count();
    }
    count as f64
}

/// Mean local clustering coefficient; nodes of degree < 2 contribute 0.
pub fn avg_clustering(g: &Graph) -> f64 {
    let adj = g.adjacency();
    let mut total = 0.0;
    for nbrs in &adj {
        let d = nbrs.len();
        if d < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in nbrs.iter().enumerate() {
            links += sorted_intersection(&adj[a], &nbrs[i + 1..]).count();
        }
        total += 2.0 * links as f64 / (d * (d - 1)) as f64;
    }
    total / g.num_nodes() as f64
}

/// Mean BFS distance over unordered pairs lying in the same connected
/// component. Pairs in different components are skipped.
pub fn avg_shortest_path(g: &Graph) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::NoReachablePairs);
    }
    let adj = g.adjacency();
    let n = g.num_nodes();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut sum = 0u64;
    let mut pairs = 0u64;
    for source in 0..n {
        dist.fill(usize::MAX);
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                    if w > source {
                        sum += dist[w] as u64;
                        pairs += 1;
                    }
                }
            }
        }
    }
    Ok(sum as f64 / pairs as f64)
}

/// Number of maximal cliques (Bron–Kerbosch with Tomita pivoting).
pub fn maximal_clique_count(g: &Graph) -> f64 {
    let n = g.num_nodes();
    let adj: Vec<BitSet> = g
        .adjacency()
        .iter()
        .map(|nbrs| BitSet::from_members(n, nbrs))
        .collect();
    let candidates = BitSet::full(n);
    let excluded = BitSet::new(n);
    bron_kerbosch(&adj, candidates, excluded) as f64
}

fn bron_kerbosch(adj: &[BitSet], mut candidates: BitSet, mut excluded: BitSet) -> u64 {
    if candidates.is_empty() {
        return u64::from(excluded.is_empty());
    }
    // pivot maximizing |P ∩ N(u)| over P ∪ X
    let pivot = candidates
        .iter()
        .chain(excluded.iter())
        .max_by_key(|&u| candidates.intersection_len(&adj[u]))
        .expect("candidates is non-empty");
    let mut count = 0;
    for v in candidates
        .difference(&adj[pivot])
        .iter()
        .collect::<Vec<_>>()
    {
        count += bron_kerbosch(
            adj,
            candidates.intersection(&adj[v]),
            excluded.intersection(&adj[v]),
        );
        candidates.remove(v);
        excluded.insert(v);
    }
    count
}

fn sorted_intersection<'a>(a: &'a [usize], b: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let x = a[i];
                    i += 1;
                    j += 1;
                    return Some(x);
                }
            }
        }
        None
    })
}

#[derive(Clone, Debug)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    fn from_members(n: usize, members: &[usize]) -> Self {
        let mut s = Self::new(n);
        for &m in members {
            s.insert(m);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn intersection(&self, other: &Self) -> Self {
        Self {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn difference(&self, other: &Self) -> Self {
        Self {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    fn intersection_len(&self, other: &Self) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}
