//! Compact metric graphs: vertices, edges with lengths, points and the path metric.
//!
//! Edges are oriented only for bookkeeping: an edge `e` from `a` to `b` is identified
//! with the segment `[0, |e|]`, offset 0 sitting at `a`. Loops and parallel edges are
//! allowed. Every query treats the graph as an undirected continuum.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// Absolute tolerance used when comparing offsets on an edge of length `len`.
pub(crate) fn offset_tol(len: f64) -> f64 {
    1e-12 * len.max(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.from {
            self.to
        } else {
            self.from
        }
    }
}

/// A location on the graph. Vertices have exactly one representation; a point on an
/// edge is stored as `OnEdge` only when its offset is strictly inside the edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphPoint {
    Vertex(VertexId),
    OnEdge { edge: EdgeId, offset: f64 },
}

impl GraphPoint {
    pub fn approx_eq(&self, other: &GraphPoint) -> bool {
        match (self, other) {
            (GraphPoint::Vertex(a), GraphPoint::Vertex(b)) => a == b,
            (
                GraphPoint::OnEdge { edge: e1, offset: t1 },
                GraphPoint::OnEdge { edge: e2, offset: t2 },
            ) => e1 == e2 && (t1 - t2).abs() <= offset_tol(t1.abs().max(t2.abs())),
            _ => false,
        }
    }

    /// Total order used for deterministic tie-breaking: vertices first, then by
    /// (edge, offset).
    pub fn sort_key(&self) -> (usize, usize, f64) {
        match *self {
            GraphPoint::Vertex(v) => (0, v.0, 0.0),
            GraphPoint::OnEdge { edge, offset } => (1, edge.0, offset),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MetricGraph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeId>>,
}

/// Serialized graph description, the `vertices` / `edges` part of a graph-spec file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphSpec {
    #[serde(default)]
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

impl MetricGraph {
    /// Validating constructor used for every user-facing graph.
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        if spec.edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut vertex_names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for v in &spec.vertices {
            if index.insert(v.clone(), vertex_names.len()).is_some() {
                return Err(Error::DuplicateId(v.clone()));
            }
            vertex_names.push(v.clone());
        }
        let declared = !spec.vertices.is_empty();
        let mut edge_names = Vec::new();
        let mut edges = Vec::new();
        for e in &spec.edges {
            if edge_names.contains(&e.id) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::NonpositiveLength { edge: e.id.clone(), length: e.length });
            }
            let mut lookup = |name: &String| -> Result<VertexId> {
                if let Some(&i) = index.get(name) {
                    return Ok(VertexId(i));
                }
                if declared {
                    return Err(Error::UnknownVertex(name.clone()));
                }
                index.insert(name.clone(), vertex_names.len());
                vertex_names.push(name.clone());
                Ok(VertexId(vertex_names.len() - 1))
            };
            let from = lookup(&e.from)?;
            let to = lookup(&e.to)?;
            edge_names.push(e.id.clone());
            edges.push(Edge { from, to, length: e.length });
        }
        let g = Self::from_raw(vertex_names, edge_names, edges);
        g.check_connected()?;
        Ok(g)
    }

    /// Builds a graph from `(from, to, length)` triples. Vertex ids follow first
    /// appearance; edges are named `e0, e1, ...`.
    pub fn from_edges(list: &[(&str, &str, f64)]) -> Result<Self> {
        let spec = GraphSpec {
            vertices: Vec::new(),
            edges: list
                .iter()
                .enumerate()
                .map(|(i, (a, b, l))| EdgeSpec {
                    id: format!("e{i}"),
                    from: a.to_string(),
                    to: b.to_string(),
                    length: *l,
                })
                .collect(),
        };
        Self::from_spec(&spec)
    }

    /// The segment `[0, len]` with vertices `a` (offset 0) and `b`.
    pub fn segment(len: f64) -> Result<Self> {
        Self::from_edges(&[("a", "b", len)])
    }

    /// The star with `n` unit edges `e_k = <o, v_k>`.
    pub fn star(n: usize) -> Result<Self> {
        let mut spec = GraphSpec {
            vertices: std::iter::once("o".to_string())
                .chain((1..=n).map(|k| format!("v{k}")))
                .collect(),
            edges: Vec::new(),
        };
        for k in 1..=n {
            spec.edges.push(EdgeSpec {
                id: format!("e{k}"),
                from: "o".into(),
                to: format!("v{k}"),
                length: 1.0,
            });
        }
        Self::from_spec(&spec)
    }

    /// Unchecked constructor for derived graphs (cut trees, extracted subgraphs).
    /// A single vertex with no edges is allowed here.
    pub(crate) fn from_raw(vertex_names: Vec<String>, edge_names: Vec<String>, edges: Vec<Edge>) -> Self {
        let mut incidence = vec![Vec::new(); vertex_names.len()];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.from.0].push(EdgeId(i));
            if !e.is_loop() {
                incidence[e.to.0].push(EdgeId(i));
            }
        }
        MetricGraph { vertex_names, edge_names, edges, incidence }
    }

    fn check_connected(&self) -> Result<()> {
        let seen = self.reachable_from(VertexId(0), None);
        match seen.iter().position(|s| !s) {
            Some(i) => Err(Error::DisconnectedGraph(self.vertex_names[i].clone())),
            None => Ok(()),
        }
    }

    pub(crate) fn reachable_from(&self, start: VertexId, skip: Option<EdgeId>) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![start];
        seen[start.0] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.incidence[v.0] {
                if Some(e) == skip {
                    continue;
                }
                let w = self.edges[e.0].other(v);
                if !seen[w.0] {
                    seen[w.0] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.vertex_names.clone(),
            edges: self
                .edges
                .iter()
                .zip(&self.edge_names)
                .map(|(e, id)| EdgeSpec {
                    id: id.clone(),
                    from: self.vertex_names[e.from.0].clone(),
                    to: self.vertex_names[e.to.0].clone(),
                    length: e.length,
                })
                .collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_names.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edge_names[e.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Result<VertexId> {
        self.vertex_names
            .iter()
            .position(|n| n == name)
            .map(VertexId)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn edge_by_name(&self, name: &str) -> Result<EdgeId> {
        self.edge_names
            .iter()
            .position(|n| n == name)
            .map(EdgeId)
            .ok_or_else(|| Error::UnknownEdge(name.to_string()))
    }

    /// Degree counts a loop twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0]
            .iter()
            .map(|&e| if self.edges[e.0].is_loop() { 2 } else { 1 })
            .sum()
    }

    /// Boundary vertices (degree one) in id order.
    pub fn boundary(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.degree(v) == 1).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Canonical point at `offset` along `edge`.
    pub fn point(&self, edge: EdgeId, offset: f64) -> GraphPoint {
        let e = &self.edges[edge.0];
        let tol = offset_tol(e.length);
        if offset <= tol {
            GraphPoint::Vertex(e.from)
        } else if offset >= e.length - tol {
            GraphPoint::Vertex(e.to)
        } else {
            GraphPoint::OnEdge { edge, offset }
        }
    }

    /// Re-canonicalizes a point (e.g. one whose offset drifted onto an endpoint).
    pub fn canonical(&self, p: GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(_) => p,
            GraphPoint::OnEdge { edge, offset } => self.point(edge, offset),
        }
    }

    pub fn check_point(&self, p: &GraphPoint) -> Result<()> {
        match *p {
            GraphPoint::Vertex(v) if v.0 < self.vertex_count() => Ok(()),
            GraphPoint::OnEdge { edge, offset }
                if edge.0 < self.edge_count()
                    && offset >= 0.0
                    && offset <= self.edges[edge.0].length =>
            {
                Ok(())
            }
            _ => Err(Error::PointNotOnGraph(format!("{p:?}"))),
        }
    }

    pub fn describe_point(&self, p: &GraphPoint) -> String {
        match *p {
            GraphPoint::Vertex(v) => self.vertex_names[v.0].clone(),
            GraphPoint::OnEdge { edge, offset } => format!("{}@{}", self.edge_names[edge.0], offset),
        }
    }

    /// Shortest-path distances from a point to every vertex.
    fn vertex_distances(&self, x: &GraphPoint) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        let mut heap = BinaryHeap::new();
        let seed = |v: VertexId, d: f64, dist: &mut Vec<f64>, heap: &mut BinaryHeap<HeapItem>| {
            if d < dist[v.0] {
                dist[v.0] = d;
                heap.push(HeapItem(d, v));
            }
        };
        match *x {
            GraphPoint::Vertex(v) => seed(v, 0.0, &mut dist, &mut heap),
            GraphPoint::OnEdge { edge, offset } => {
                let e = &self.edges[edge.0];
                seed(e.from, offset, &mut dist, &mut heap);
                seed(e.to, e.length - offset, &mut dist, &mut heap);
            }
        }
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v.0] {
                continue;
            }
            for &eid in &self.incidence[v.0] {
                let e = &self.edges[eid.0];
                let w = e.other(v);
                let nd = d + e.length;
                if nd < dist[w.0] {
                    dist[w.0] = nd;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
        dist
    }

    /// Path-metric distance between two points.
    pub fn distance(&self, x: &GraphPoint, y: &GraphPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let x = self.canonical(*x);
        let y = self.canonical(*y);
        let dist = self.vertex_distances(&x);
        Ok(match y {
            GraphPoint::Vertex(v) => dist[v.0],
            GraphPoint::OnEdge { edge, offset } => {
                let e = &self.edges[edge.0];
                let mut best = (dist[e.from.0] + offset).min(dist[e.to.0] + e.length - offset);
                if let GraphPoint::OnEdge { edge: ex, offset: ox } = x {
                    if ex == edge {
                        best = best.min((ox - offset).abs());
                    }
                }
                best
            }
        })
    }

    /// A connected graph is a tree iff it has no loops and `#E = #V - 1`.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count() && !self.edges.iter().any(Edge::is_loop)
    }

    /// Bridge flags via DFS low-link. Parallel edges are told apart by edge id, so a
    /// doubled edge is never a bridge; loops are never bridges.
    pub fn bridges(&self) -> Vec<bool> {
        let n = self.vertex_count();
        let mut is_bridge = vec![false; self.edges.len()];
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // iterative DFS: (vertex, parent edge, next incidence index)
            let mut stack: Vec<(usize, Option<EdgeId>, usize)> = vec![(root, None, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(top) = stack.last_mut() {
                let (v, parent) = (top.0, top.1);
                if top.2 < self.incidence[v].len() {
                    let e = self.incidence[v][top.2];
                    top.2 += 1;
                    if Some(e) == parent {
                        continue;
                    }
                    let w = self.edges[e.0].other(VertexId(v)).0;
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, Some(e), 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let (Some(pe), Some(&(u, _, _))) = (parent, stack.last()) {
                        low[u] = low[u].min(low[v]);
                        if low[v] > disc[u] {
                            is_bridge[pe.0] = true;
                        }
                    }
                }
            }
        }
        is_bridge
    }

    /// Smallest-id edge lying on a cycle (loops included), or `None` for a tree.
    pub fn find_noncycle_free_edge(&self) -> Option<EdgeId> {
        self.bridges().iter().position(|b| !b).map(EdgeId)
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, VertexId);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl fmt::Display for MetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (e, name) in self.edges.iter().zip(&self.edge_names) {
            writeln!(
                f,
                "{name}: {} -- {} ({})",
                self.vertex_names[e.from.0], self.vertex_names[e.to.0], e.length
            )?;
        }
        Ok(())
    }
}
