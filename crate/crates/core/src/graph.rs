//! Finite weighted graphs with a vertex measure `mu` and a symmetric edge
//! measure `omega`, plus the problem instance built on top of them.

use std::collections::{HashSet, VecDeque};
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// An undirected edge stored once, with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub omega: f64,
}

/// Neighbor entry in the adjacency list of a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    pub omega: f64,
    pub edge: usize,
}

/// Immutable finite graph. Edges are kept sorted by `(i, j)` and each
/// adjacency list is sorted by ascending neighbor index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    mu: Vec<f64>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl WeightedGraph {
    /// Builds a graph from vertex measures and an edge list. Edges may be
    /// given in either orientation; they are normalized to `i < j`.
    pub fn new(mu: Vec<f64>, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        for (k, &m) in mu.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::entry("mu", k, format!("vertex measure {m} must be finite and > 0")));
            }
        }

        let mut list = Vec::new();
        let mut seen = HashSet::new();
        for (k, (a, b, omega)) in edges.into_iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::entry("edges", k, format!("endpoint out of range 0..{n}")));
            }
            if a == b {
                return Err(Error::entry("edges", k, format!("self-loop at vertex {a}")));
            }
            if !(omega.is_finite() && omega > 0.0) {
                return Err(Error::entry("edges", k, format!("edge weight {omega} must be finite and > 0")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((i, j)) {
                return Err(Error::entry("edges", k, format!("duplicate edge ({i}, {j})")));
            }
            list.push(Edge { i, j, omega });
        }
        list.sort_by_key(|e| (e.i, e.j));

        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in list.iter().enumerate() {
            adjacency[e.i].push(Neighbor { vertex: e.j, omega: e.omega, edge: k });
            adjacency[e.j].push(Neighbor { vertex: e.i, omega: e.omega, edge: k });
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by_key(|nb| nb.vertex);
        }

        Ok(Self { mu, edges: list, adjacency })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[i]
    }

    /// True iff every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for nb in &self.adjacency[v] {
                if !visited[nb.vertex] {
                    visited[nb.vertex] = true;
                    count += 1;
                    queue.push_back(nb.vertex);
                }
            }
        }
        count == n
    }

    /// Total vertex measure.
    pub fn volume(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Same graph with vertices renamed by `perm` (old index `k` becomes `perm[k]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::LengthMismatch {
                what: "permutation",
                expected: self.n(),
                found: perm.len(),
            });
        }
        let mut mu = vec![0.0; self.n()];
        for (k, &m) in self.mu.iter().enumerate() {
            mu[perm[k]] = m;
        }
        Self::new(mu, self.edges.iter().map(|e| (perm[e.i], perm[e.j], e.omega)))
    }
}

/// A real value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    /// Rejects non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::entry("values", k, "entry is not finite"));
        }
        Ok(Self(values))
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Deref for VertexFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for VertexFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<VertexFunction> for Vec<f64> {
    fn from(v: VertexFunction) -> Self {
        v.0
    }
}

/// Graph, potential `h`, positive weight `f` and exponents `alpha >= p > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    graph: WeightedGraph,
    h: VertexFunction,
    f: VertexFunction,
    p: f64,
    alpha: f64,
}

impl ProblemInstance {
    pub fn new(graph: WeightedGraph, h: VertexFunction, f: VertexFunction, p: f64, alpha: f64) -> Result<Self> {
        let n = graph.n();
        if h.len() != n {
            return Err(Error::LengthMismatch { what: "h", expected: n, found: h.len() });
        }
        if f.len() != n {
            return Err(Error::LengthMismatch { what: "f", expected: n, found: f.len() });
        }
        if let Some(k) = f.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::entry("f", k, format!("f = {} must be > 0", f[k])));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::param("p", format!("p = {p} must be finite and > 1")));
        }
        if !alpha.is_finite() {
            return Err(Error::param("alpha", "alpha must be finite"));
        }
        if alpha < p {
            return Err(Error::AlphaBelowP { p, alpha });
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(Self { graph, h, f, p, alpha })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn h(&self) -> &VertexFunction {
        &self.h
    }

    pub fn f(&self) -> &VertexFunction {
        &self.f
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Copy with different exponents; other fields unchanged.
    pub fn with_exponents(&self, p: f64, alpha: f64) -> Result<Self> {
        Self::new(self.graph.clone(), self.h.clone(), self.f.clone(), p, alpha)
    }
}
