//! Compressed adjacency storage.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::VertexId;

/// Read-only adjacency structure in compressed sparse row form.
///
/// Neighbor lists are sorted and duplicate-free. Undirected graphs store both
/// arcs of every edge; a self-loop is stored once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    directed: bool,
}

impl Graph {
    /// Builds a graph over `n` vertices from an edge iterator.
    ///
    /// Duplicate edges are collapsed. For undirected graphs each edge is
    /// inserted in both directions.
    pub fn from_edges<I>(n: usize, edges: I, directed: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut arcs: Vec<(VertexId, VertexId)> = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::UnknownVertex(x));
                }
            }
            arcs.push((u, v));
            if !directed && u != v {
                arcs.push((v, u));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(arcs.len());
        let mut arc = arcs.iter().peekable();
        for v in 0..n as VertexId {
            while let Some(&(_, dst)) = arc.next_if(|(src, _)| *src == v) {
                neighbors.push(dst);
            }
            offsets.push(neighbors.len());
        }
        Ok(Graph {
            offsets,
            neighbors,
            directed,
        })
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of stored arcs, i.e. the length of the flat neighbor array.
    #[inline]
    pub fn n_arcs(&self) -> usize {
        self.neighbors.len()
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        (v as usize) < self.n_vertices()
    }

    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        self.contains(u) && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Every stored arc `(u, v)`.
    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n_vertices() as VertexId)
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// Each edge once: all arcs for directed graphs, `u <= v` arcs otherwise.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let directed = self.directed;
        self.arcs().filter(move |&(u, v)| directed || u <= v)
    }

    pub fn n_edges(&self) -> usize {
        self.edges().count()
    }

    /// Checks the structural invariants, returning a description of the
    /// first violation.
    pub fn validate(&self) -> core::result::Result<(), String> {
        let n = self.n_vertices();
        if self.offsets[0] != 0 || self.offsets[n] != self.neighbors.len() {
            return Err("offset bounds".to_string());
        }
        for v in 0..n {
            if self.offsets[v] > self.offsets[v + 1] {
                return Err(alloc::format!("offsets decrease at {v}"));
            }
            let list = self.neighbors(v as VertexId);
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(alloc::format!("neighbors of {v} unsorted or duplicated"));
            }
            for &u in list {
                if u as usize >= n {
                    return Err(alloc::format!("neighbor {u} out of range"));
                }
                if !self.directed && !self.has_arc(u, v as VertexId) {
                    return Err(alloc::format!("arc {v}->{u} has no reverse"));
                }
            }
        }
        Ok(())
    }
}

/// Incremental builder mapping external vertex labels to dense ids in
/// first-seen order.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    ids: IdMap,
    edges: Vec<(VertexId, VertexId)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: &str) -> VertexId {
        self.ids.intern(label)
    }

    pub fn add_edge(&mut self, u: &str, v: &str) {
        let u = self.ids.intern(u);
        let v = self.ids.intern(v);
        self.edges.push((u, v));
    }

    pub fn n_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn build(self, directed: bool) -> Result<(Graph, IdMap)> {
        if self.ids.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let graph = Graph::from_edges(self.ids.len(), self.edges, directed)?;
        Ok((graph, self.ids))
    }
}

/// Bijection between external labels and dense ids.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct IdMap {
    names: Vec<String>,
    index: BTreeMap<String, VertexId>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ids `0..n` named by their decimal representation.
    pub fn numeric(n: usize) -> Self {
        let mut map = Self::new();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    pub fn intern(&mut self, name: &str) -> VertexId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as VertexId;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: VertexId) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Per-vertex label sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelTable {
    labels: Vec<Vec<u32>>,
    n_labels: usize,
}

impl LabelTable {
    /// A table for `n_vertices` vertices over `n_labels` label ids, all empty.
    pub fn new(n_vertices: usize, n_labels: usize) -> Self {
        LabelTable {
            labels: alloc::vec![Vec::new(); n_vertices],
            n_labels,
        }
    }

    /// Builds a table from explicit sets. `n_labels` becomes one past the
    /// largest id seen.
    pub fn from_sets(sets: Vec<Vec<u32>>) -> Self {
        let n_labels = sets
            .iter()
            .flatten()
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0);
        let mut table = LabelTable::new(sets.len(), n_labels);
        for (v, set) in sets.into_iter().enumerate() {
            for l in set {
                table.insert(v as VertexId, l);
            }
        }
        table
    }

    pub fn insert(&mut self, v: VertexId, label: u32) {
        let v = v as usize;
        if v >= self.labels.len() {
            self.labels.resize(v + 1, Vec::new());
        }
        self.n_labels = self.n_labels.max(label as usize + 1);
        let set = &mut self.labels[v];
        if let Err(pos) = set.binary_search(&label) {
            set.insert(pos, label);
        }
    }

    /// Grows the table so that `n` vertices are addressable.
    pub fn resize(&mut self, n: usize) {
        if n > self.labels.len() {
            self.labels.resize(n, Vec::new());
        }
    }

    pub fn labels(&self, v: VertexId) -> &[u32] {
        self.labels.get(v as usize).map_or(&[], Vec::as_slice)
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    /// Vertices carrying at least one label.
    pub fn labeled(&self) -> Vec<VertexId> {
        (0..self.labels.len() as VertexId)
            .filter(|&v| !self.labels(v).is_empty())
            .collect()
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.labels
    }
}
