//! Sparse similarity graphs, labeled sets and hop-neighborhood layering.
//!
//! A [`Graph`] is undirected and stores each node's neighbors in a sorted
//! array, so every traversal visits nodes in the same order regardless of the
//! order edges were supplied in. Edges of weight zero are not stored.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected, non-negatively weighted graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from undirected edges `(i, j, w)`.
    ///
    /// An edge may be listed in either orientation and may repeat as long as
    /// every listing carries the same weight.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut unique: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, w) in edges {
            for idx in [i, j] {
                if idx >= node_count {
                    return Err(Error::NodeOutOfRange { index: idx, node_count });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("weight of edge ({i}, {j})"),
                    value: w,
                });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { i, j, weight: w });
            }
            let key = (i.min(j), i.max(j));
            match unique.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::ConflictingEdge {
                        i: key.0,
                        j: key.1,
                        first: prev,
                        second: w,
                    })
                }
                Some(_) => {}
                None => {
                    unique.insert(key, w);
                }
            }
        }

        let mut adjacency = vec![Vec::new(); node_count];
        let mut edge_count = 0;
        for (&(i, j), &w) in &unique {
            if w == 0.0 {
                continue;
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
            edge_count += 1;
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(j, _)| j);
        }
        let degree = adjacency
            .iter()
            .map(|row| row.iter().fold(0.0, |acc, &(_, w)| acc + w))
            .collect();
        Ok(Self {
            adjacency,
            degree,
            edge_count,
        })
    }

    pub fn empty(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
            degree: vec![0.0; node_count],
            edge_count: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of undirected edges with positive weight.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted `(neighbor, weight)` pairs of node `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Weighted degree `Σⱼ wᵢⱼ`.
    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| self.adjacency[i][pos].1)
            .unwrap_or(0.0)
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&(j, _)| j > i).map(move |&(j, w)| (i, j, w)))
    }

    /// Mean number of neighbors per node.
    pub fn average_degree(&self) -> f64 {
        if self.node_count() == 0 {
            return 0.0;
        }
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    /// `Σᵢⱼ wᵢⱼ (fᵢ − fⱼ)²` with each undirected edge counted once.
    pub fn smoothness(&self, f: &[f64]) -> f64 {
        self.edges()
            .map(|(i, j, w)| {
                let d = f[i] - f[j];
                w * d * d
            })
            .sum()
    }

    /// Connected component id of every node, numbered in order of first node.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Nodes reachable from any of `sources`, as a membership mask.
    pub fn reachable_from(&self, sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::new();
        for s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _) in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Binary class label.
pub type Label = u8;

/// The hard-constrained nodes and their labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    entries: Vec<(usize, Label)>,
}

impl LabelSet {
    /// Entries are kept sorted by node index.
    pub fn new(mut entries: Vec<(usize, Label)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateLabel(w[0].0));
            }
        }
        if let Some(&(i, y)) = entries.iter().find(|&&(_, y)| y > 1) {
            return Err(Error::invalid(format!("label {y} on node {i} is not 0 or 1")));
        }
        Ok(Self { entries })
    }

    /// Labels the given nodes with their ground-truth values.
    pub fn from_truth(nodes: impl IntoIterator<Item = usize>, truth: &[Label]) -> Result<Self> {
        let entries = nodes
            .into_iter()
            .map(|i| {
                truth.get(i).map(|&y| (i, y)).ok_or(Error::NodeOutOfRange {
                    index: i,
                    node_count: truth.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(usize, Label)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn get(&self, node: usize) -> Option<Label> {
        self.entries
            .binary_search_by_key(&node, |&(i, _)| i)
            .ok()
            .map(|pos| self.entries[pos].1)
    }

    /// Dense per-node view: `Some(y)` on labeled nodes.
    pub fn to_dense(&self, node_count: usize) -> Vec<Option<Label>> {
        let mut dense = vec![None; node_count];
        for &(i, y) in &self.entries {
            dense[i] = Some(y);
        }
        dense
    }

    pub fn check_against(&self, node_count: usize) -> Result<()> {
        match self.entries.last() {
            Some(&(i, _)) if i >= node_count => Err(Error::NodeOutOfRange { index: i, node_count }),
            _ => Ok(()),
        }
    }
}

/// Row-major real feature vectors of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * dim);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {r} has {} features, expected {dim}",
                    row.len()
                )));
            }
            for (c, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite {
                        what: format!("feature ({r}, {c})"),
                        value: x,
                    });
                }
            }
            data.extend(row);
        }
        Ok(Self { data, rows: n, dim })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.row(i), self.row(j))
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Linear-interpolation percentile (`0 ≤ pct ≤ 100`) of a sorted slice.
pub fn percentile_sorted(sorted: &[f64], pct: f64) -> f64 {
    let rank = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Unweighted graph connecting points closer than the distance below which a
/// fraction `t/N` of all `N²` pairwise distances fall (self-distances
/// included), giving an average degree of about `t`.
///
/// The pool holds `N` zeros and every off-diagonal distance twice, so only
/// the upper triangle is materialized and pool ranks are mapped onto it.
pub fn build_threshold_graph(features: &FeatureMatrix, t: f64) -> Result<Graph> {
    let n = features.rows();
    if n < 2 {
        return Err(Error::invalid("threshold graph needs at least 2 points"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("average degree t must be positive, got {t}")));
    }
    if t > n as f64 {
        return Err(Error::invalid(format!(
            "average degree t = {t} exceeds the point count {n}"
        )));
    }
    let pct = 100.0 * t / n as f64;

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(features.distance(i, j));
        }
    }
    let threshold = pool_percentile(&pairs, n, pct);

    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if pairs[k] < threshold {
                edges.push((i, j, 1.0));
            }
            k += 1;
        }
    }
    Graph::from_edges(n, edges)
}

/// Percentile over `n` zeros plus each entry of `pairs` taken twice.
fn pool_percentile(pairs: &[f64], n: usize, pct: f64) -> f64 {
    let pool_len = n * n;
    let rank = pct / 100.0 * (pool_len - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;

    let mut scratch = pairs.to_vec();
    let mut order_stat = |r: usize| -> f64 {
        if r < n {
            return 0.0;
        }
        let idx = (r - n) / 2;
        let (_, v, _) = scratch.select_nth_unstable_by(idx, f64::total_cmp);
        *v
    };
    let a = order_stat(lo);
    let b = if hi == lo { a } else { order_stat(hi) };
    a + (b - a) * frac
}

/// Breadth-first layering of nodes by hop distance to the labeled set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodPartition {
    hops: Vec<Vec<usize>>,
    unreachable: Vec<usize>,
    hop_of: Vec<Option<usize>>,
}

impl NeighborhoodPartition {
    /// `𝒩₀, 𝒩₁, …, 𝒩_l`, each sorted by node index.
    pub fn hops(&self) -> &[Vec<usize>] {
        &self.hops
    }

    pub fn hop(&self, k: usize) -> &[usize] {
        &self.hops[k]
    }

    /// Largest hop index `l`.
    pub fn max_hop(&self) -> usize {
        self.hops.len() - 1
    }

    pub fn unreachable(&self) -> &[usize] {
        &self.unreachable
    }

    pub fn hop_of(&self, node: usize) -> Option<usize> {
        self.hop_of[node]
    }

    pub fn node_count(&self) -> usize {
        self.hop_of.len()
    }
}

pub fn compute_neighborhoods(graph: &Graph, labels: &LabelSet) -> Result<NeighborhoodPartition> {
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    labels.check_against(graph.node_count())?;

    let n = graph.node_count();
    let mut hop_of = vec![None; n];
    let mut frontier: Vec<usize> = labels.nodes().collect();
    for &i in &frontier {
        hop_of[i] = Some(0);
    }
    let mut hops = Vec::new();
    while !frontier.is_empty() {
        let k = hops.len();
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, _) in graph.neighbors(u) {
                if hop_of[v].is_none() {
                    hop_of[v] = Some(k + 1);
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        hops.push(frontier);
        frontier = next;
    }
    let unreachable = (0..n).filter(|&i| hop_of[i].is_none()).collect();
    Ok(NeighborhoodPartition {
        hops,
        unreachable,
        hop_of,
    })
}
