//! Length-preserving maps of one metric graph into another, and extraction of a
//! closed connected subset as a graph of its own.

use crate::graph::{offset_tol, Edge, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::subset::{ConnectedSubset, Interval};

/// Every local edge runs forward along a target edge, starting at the stored offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub vertex_map: Vec<GraphPoint>,
    pub edge_map: Vec<(EdgeId, f64)>,
}

impl Embedding {
    pub fn identity(g: &MetricGraph) -> Self {
        Embedding {
            vertex_map: g.vertices().map(GraphPoint::Vertex).collect(),
            edge_map: g.edge_ids().map(|e| (e, 0.0)).collect(),
        }
    }

    pub fn map_point(&self, target: &MetricGraph, p: &GraphPoint) -> GraphPoint {
        match *p {
            GraphPoint::Vertex(v) => self.vertex_map[v.0],
            GraphPoint::OnEdge { edge, offset } => {
                let (te, a) = self.edge_map[edge.0];
                target.point(te, a + offset)
            }
        }
    }

    pub fn map_subset(&self, local: &MetricGraph, target: &MetricGraph, s: &ConnectedSubset) -> ConnectedSubset {
        let mut intervals: Vec<Interval> = s
            .intervals()
            .iter()
            .map(|iv| {
                let (te, a) = self.edge_map[iv.edge.0];
                let len = local.edge(iv.edge).length;
                let lo = if iv.lo <= 0.0 { a } else { a + iv.lo };
                let hi = if iv.hi >= len { a + len } else { a + iv.hi };
                Interval { edge: te, lo, hi }
            })
            .collect();
        let mut vertices = Vec::new();
        for &v in s.closure_vertices() {
            match self.vertex_map[v.0] {
                GraphPoint::Vertex(w) => vertices.push(w),
                GraphPoint::OnEdge { edge, offset } => intervals.push(Interval { edge, lo: offset, hi: offset }),
            }
        }
        let excluded: Vec<GraphPoint> = s.excluded().iter().map(|p| self.map_point(target, p)).collect();
        ConnectedSubset::from_parts(target, intervals, vertices, excluded)
    }

    /// All local points mapped onto `p`.
    pub fn preimages(&self, local: &MetricGraph, target: &MetricGraph, p: &GraphPoint) -> Vec<GraphPoint> {
        let p = target.canonical(*p);
        let mut out: Vec<GraphPoint> = self
            .vertex_map
            .iter()
            .enumerate()
            .filter(|(_, q)| q.approx_eq(&p))
            .map(|(i, _)| GraphPoint::Vertex(VertexId(i)))
            .collect();
        if let GraphPoint::OnEdge { edge, offset } = p {
            let tol = offset_tol(target.edge(edge).length);
            for (i, &(te, a)) in self.edge_map.iter().enumerate() {
                let len = local.edge(EdgeId(i)).length;
                if te == edge && offset > a + tol && offset < a + len - tol {
                    out.push(GraphPoint::OnEdge { edge: EdgeId(i), offset: offset - a });
                }
            }
        }
        out
    }

    /// `outer ∘ self`.
    pub fn compose(&self, middle: &MetricGraph, target: &MetricGraph, outer: &Embedding) -> Embedding {
        Embedding {
            vertex_map: self.vertex_map.iter().map(|p| outer.map_point_via(middle, target, p)).collect(),
            edge_map: self
                .edge_map
                .iter()
                .map(|&(me, a)| {
                    let (te, b) = outer.edge_map[me.0];
                    (te, a + b)
                })
                .collect(),
        }
    }

    fn map_point_via(&self, middle: &MetricGraph, target: &MetricGraph, p: &GraphPoint) -> GraphPoint {
        self.map_point(target, &middle.canonical(*p))
    }
}

/// Turns the closure of `set` into a graph. Local vertices are the original vertices
/// of the closure (by id) followed by the interval ends lying inside edges, ordered by
/// edge and offset; local edges follow the intervals in (edge, start) order.
pub fn extract_subgraph(g: &MetricGraph, set: &ConnectedSubset) -> (MetricGraph, Embedding) {
    let mut vertex_map: Vec<GraphPoint> = set.closure_vertices().iter().map(|&v| GraphPoint::Vertex(v)).collect();
    let mut names: Vec<String> = set.closure_vertices().iter().map(|&v| g.vertex_name(v).to_string()).collect();
    let mut inner: Vec<(EdgeId, f64)> = Vec::new();
    for iv in set.intervals() {
        let len = g.edge(iv.edge).length;
        for t in [iv.lo, iv.hi] {
            if t > 0.0 && t < len && !inner.iter().any(|&(e, s)| e == iv.edge && (s - t).abs() <= offset_tol(len)) {
                inner.push((iv.edge, t));
            }
        }
    }
    inner.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for &(e, t) in &inner {
        vertex_map.push(GraphPoint::OnEdge { edge: e, offset: t });
        names.push(format!("{}@{}", g.edge_name(e), t));
    }
    let find = |p: GraphPoint| -> VertexId {
        VertexId(vertex_map.iter().position(|q| q.approx_eq(&p)).expect("interval end is a local vertex"))
    };
    let mut edges = Vec::new();
    let mut edge_names = Vec::new();
    let mut edge_map = Vec::new();
    for iv in set.intervals() {
        if iv.hi <= iv.lo {
            continue;
        }
        let from = find(g.point(iv.edge, iv.lo));
        let to = find(g.point(iv.edge, iv.hi));
        edges.push(Edge { from, to, length: iv.hi - iv.lo });
        let full = iv.lo == 0.0 && iv.hi == g.edge(iv.edge).length;
        edge_names.push(if full {
            g.edge_name(iv.edge).to_string()
        } else {
            format!("{}[{},{}]", g.edge_name(iv.edge), iv.lo, iv.hi)
        });
        edge_map.push((iv.edge, iv.lo));
    }
    let local = MetricGraph::from_raw(names, edge_names, edges);
    (local, Embedding { vertex_map, edge_map })
}
