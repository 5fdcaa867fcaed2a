//! Connected, not necessarily closed subsets of a metric graph.
//!
//! A [`ConnectedSubset`] stores its closure (closed intervals per edge plus the
//! vertices it touches) and the finite list of closure points that are removed.

use crate::graph::{offset_tol, EdgeId, GraphPoint, MetricGraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub edge: EdgeId,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConnectedSubset {
    intervals: Vec<Interval>,
    vertices: Vec<VertexId>,
    excluded: Vec<GraphPoint>,
}

impl ConnectedSubset {
    /// Normalizing constructor: clamps and merges intervals, adds the endpoint vertices
    /// implied by intervals reaching an edge end, canonicalizes points and drops
    /// exclusions that are not in the closure.
    pub fn from_parts(
        g: &MetricGraph,
        intervals: impl IntoIterator<Item = Interval>,
        vertices: impl IntoIterator<Item = VertexId>,
        excluded: impl IntoIterator<Item = GraphPoint>,
    ) -> Self {
        let mut verts: Vec<VertexId> = vertices.into_iter().collect();
        let mut ivs: Vec<Interval> = Vec::new();
        for iv in intervals {
            let e = g.edge(iv.edge);
            let tol = offset_tol(e.length);
            let mut lo = iv.lo.max(0.0);
            let mut hi = iv.hi.min(e.length);
            if hi < lo - tol {
                continue;
            }
            if hi < lo {
                hi = lo;
            }
            if lo <= tol {
                lo = 0.0;
                verts.push(e.from);
            }
            if hi >= e.length - tol {
                hi = e.length;
                verts.push(e.to);
            }
            if hi <= 0.0 || lo >= e.length {
                // degenerate interval sitting on a vertex
                continue;
            }
            ivs.push(Interval { edge: iv.edge, lo, hi });
        }
        ivs.sort_by(|a, b| a.edge.cmp(&b.edge).then(a.lo.total_cmp(&b.lo)));
        let mut merged: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            if let Some(last) = merged.last_mut() {
                let tol = offset_tol(g.edge(iv.edge).length);
                if last.edge == iv.edge && iv.lo <= last.hi + tol {
                    last.hi = last.hi.max(iv.hi);
                    continue;
                }
            }
            merged.push(iv);
        }
        verts.sort();
        verts.dedup();
        let mut s = ConnectedSubset { intervals: merged, vertices: verts, excluded: Vec::new() };
        let mut ex: Vec<GraphPoint> = Vec::new();
        for p in excluded {
            let p = g.canonical(p);
            if s.closure_contains(&p) && !ex.iter().any(|q| q.approx_eq(&p)) {
                ex.push(p);
            }
        }
        ex.sort_by(|a, b| {
            let (x, y) = (a.sort_key(), b.sort_key());
            x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2))
        });
        s.excluded = ex;
        s
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn whole(g: &MetricGraph) -> Self {
        Self::from_parts(
            g,
            g.edge_ids().map(|e| Interval { edge: e, lo: 0.0, hi: g.edge(e).length }),
            g.vertices(),
            [],
        )
    }

    /// A closed edge, endpoints included.
    pub fn edge(g: &MetricGraph, e: EdgeId) -> Self {
        Self::interval(g, e, 0.0, g.edge(e).length)
    }

    pub fn interval(g: &MetricGraph, e: EdgeId, lo: f64, hi: f64) -> Self {
        Self::from_parts(g, [Interval { edge: e, lo, hi }], [], [])
    }

    pub fn point(g: &MetricGraph, p: GraphPoint) -> Self {
        match g.canonical(p) {
            GraphPoint::Vertex(v) => Self::from_parts(g, [], [v], []),
            GraphPoint::OnEdge { edge, offset } => Self::interval(g, edge, offset, offset),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn closure_vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn excluded(&self) -> &[GraphPoint] {
        &self.excluded
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
            && self.vertices.iter().all(|&v| self.is_excluded(&GraphPoint::Vertex(v)))
    }

    pub fn closure(&self) -> Self {
        ConnectedSubset { excluded: Vec::new(), ..self.clone() }
    }

    /// Lebesgue length; removed points do not matter.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.hi - iv.lo).sum()
    }

    fn is_excluded(&self, p: &GraphPoint) -> bool {
        self.excluded.iter().any(|q| q.approx_eq(p))
    }

    pub fn closure_contains(&self, p: &GraphPoint) -> bool {
        match *p {
            GraphPoint::Vertex(v) => self.vertices.binary_search(&v).is_ok(),
            GraphPoint::OnEdge { edge, offset } => {
                let tol = offset_tol(offset);
                self.intervals
                    .iter()
                    .any(|iv| iv.edge == edge && iv.lo - tol <= offset && offset <= iv.hi + tol)
            }
        }
    }

    /// Membership of a canonical point.
    pub fn contains(&self, p: &GraphPoint) -> bool {
        self.closure_contains(p) && !self.is_excluded(p)
    }

    /// `self \ {p}`.
    pub fn without(&self, p: &GraphPoint) -> Self {
        if !self.contains(p) {
            return self.clone();
        }
        let mut s = self.clone();
        s.excluded.push(*p);
        s
    }

    pub fn without_all<'a>(&self, points: impl IntoIterator<Item = &'a GraphPoint>) -> Self {
        let mut s = self.clone();
        for p in points {
            if s.contains(p) {
                s.excluded.push(*p);
            }
        }
        s
    }

    /// Union of closed data; exclusions of both operands survive only where the
    /// other operand does not cover the point.
    pub fn union(&self, g: &MetricGraph, other: &Self) -> Self {
        let excluded: Vec<GraphPoint> = self
            .excluded
            .iter()
            .filter(|p| !other.contains(p))
            .chain(other.excluded.iter().filter(|p| !self.contains(p)))
            .copied()
            .collect();
        Self::from_parts(
            g,
            self.intervals.iter().chain(&other.intervals).copied(),
            self.vertices.iter().chain(&other.vertices).copied(),
            excluded,
        )
    }

    /// Finite set of points in the closure: vertices, interval endpoints, exclusions.
    pub fn closure_points(&self, g: &MetricGraph) -> Vec<GraphPoint> {
        let mut pts: Vec<GraphPoint> = self.vertices.iter().map(|&v| GraphPoint::Vertex(v)).collect();
        for iv in &self.intervals {
            pts.push(g.point(iv.edge, iv.lo));
            pts.push(g.point(iv.edge, iv.hi));
        }
        pts.extend(self.excluded.iter().copied());
        let mut out: Vec<GraphPoint> = Vec::new();
        for p in pts {
            if !out.iter().any(|q| q.approx_eq(&p)) {
                out.push(p);
            }
        }
        out
    }

    /// Connectedness in the path metric, checked on the cell decomposition.
    pub fn is_connected(&self, g: &MetricGraph) -> bool {
        let cells = Cells::new(g, std::slice::from_ref(self));
        let inside: Vec<bool> = cells.cells.iter().map(|c| cells.cell_in(c, self)).collect();
        cells.components(&inside).len() == 1
    }
}

/// An ordered family of pairwise disjoint connected subsets covering the graph.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Partition {
    pub parts: Vec<ConnectedSubset>,
}

impl Partition {
    pub fn new(parts: Vec<ConnectedSubset>) -> Self {
        Partition { parts }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Index of the part containing `p`.
    pub fn locate(&self, p: &GraphPoint) -> Option<usize> {
        self.parts.iter().position(|s| s.contains(p))
    }

    /// Every cell of the common refinement must lie in exactly one part. Returns the
    /// first offending point description on failure.
    pub fn check_exact_cover(&self, g: &MetricGraph) -> Result<(), String> {
        let cells = Cells::new(g, &self.parts);
        for c in &cells.cells {
            let n = self.parts.iter().filter(|s| cells.cell_in(c, s)).count();
            if n != 1 {
                return Err(format!("{} is covered {n} times", cells.describe(g, c)));
            }
        }
        Ok(())
    }
}

/// Maximal connected components of `g \ set`, in deterministic order.
pub fn components_of_complement(g: &MetricGraph, set: &ConnectedSubset) -> Vec<ConnectedSubset> {
    let cells = Cells::new(g, std::slice::from_ref(set));
    let outside: Vec<bool> = cells.cells.iter().map(|c| !cells.cell_in(c, set)).collect();
    cells
        .components(&outside)
        .into_iter()
        .map(|comp| cells.assemble(g, &comp))
        .collect()
}

#[derive(Clone, Copy, Debug)]
enum Cell {
    Vertex(VertexId),
    /// interior cut point `cuts[edge][k]`
    Point(EdgeId, usize),
    /// open segment between consecutive cut positions `k` and `k + 1` of the edge
    /// (position 0 is offset 0, the last is the edge length)
    Segment(EdgeId, usize),
}

/// Decomposition of the graph into vertices, interior cut points and open segments,
/// refined so that each given subset is a union of cells.
struct Cells {
    /// per edge: 0, interior cuts..., length
    stops: Vec<Vec<f64>>,
    cells: Vec<Cell>,
    /// per edge and stop position: the vertex or point cell sitting there
    endpoint_cells: Vec<Vec<usize>>,
}

impl Cells {
    fn new(g: &MetricGraph, sets: &[ConnectedSubset]) -> Self {
        let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); g.edge_count()];
        for s in sets {
            for iv in &s.intervals {
                cuts[iv.edge.0].push(iv.lo);
                cuts[iv.edge.0].push(iv.hi);
            }
            for p in &s.excluded {
                if let GraphPoint::OnEdge { edge, offset } = *p {
                    cuts[edge.0].push(offset);
                }
            }
        }
        let mut stops = Vec::with_capacity(g.edge_count());
        for (i, c) in cuts.iter_mut().enumerate() {
            let len = g.edge(EdgeId(i)).length;
            let tol = offset_tol(len);
            c.sort_by(f64::total_cmp);
            let mut st = vec![0.0];
            for &t in c.iter() {
                if t > tol && t < len - tol && t > st.last().unwrap() + tol {
                    st.push(t);
                }
            }
            st.push(len);
            stops.push(st);
        }
        let mut cells: Vec<Cell> = g.vertices().map(Cell::Vertex).collect();
        let mut endpoint_cells = Vec::with_capacity(stops.len());
        for (i, st) in stops.iter().enumerate() {
            let e = g.edge(EdgeId(i));
            let mut ends = vec![e.from.0];
            for k in 1..st.len() - 1 {
                ends.push(cells.len());
                cells.push(Cell::Point(EdgeId(i), k));
            }
            ends.push(e.to.0);
            for k in 0..st.len() - 1 {
                cells.push(Cell::Segment(EdgeId(i), k));
            }
            endpoint_cells.push(ends);
        }
        Cells { stops, cells, endpoint_cells }
    }

    fn cell_in(&self, c: &Cell, s: &ConnectedSubset) -> bool {
        match *c {
            Cell::Vertex(v) => s.contains(&GraphPoint::Vertex(v)),
            Cell::Point(e, k) => s.contains(&GraphPoint::OnEdge { edge: e, offset: self.stops[e.0][k] }),
            Cell::Segment(e, k) => {
                let mid = 0.5 * (self.stops[e.0][k] + self.stops[e.0][k + 1]);
                s.intervals.iter().any(|iv| iv.edge == e && iv.lo <= mid && mid <= iv.hi)
            }
        }
    }

    fn components(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let n = self.cells.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        // segments know their endpoint cells; edges of the union-find come from them
        let g_edges: Vec<(usize, usize, usize)> = self
            .cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match *c {
                Cell::Segment(e, k) => Some((i, e.0, k)),
                _ => None,
            })
            .collect();
        for &(i, e, k) in &g_edges {
            if !mask[i] {
                continue;
            }
            for stop in [k, k + 1] {
                let j = self.endpoint_cells[e][stop];
                if mask[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in 0..n {
            if !mask[i] {
                continue;
            }
            let r = find(&mut parent, i);
            match groups.iter_mut().find(|(root, _)| *root == r) {
                Some((_, v)) => v.push(i),
                None => groups.push((r, vec![i])),
            }
        }
        groups.into_iter().map(|(_, v)| v).collect()
    }

    fn describe(&self, g: &MetricGraph, c: &Cell) -> String {
        match *c {
            Cell::Vertex(v) => format!("vertex {}", g.vertex_name(v)),
            Cell::Point(e, k) => format!("point {}@{}", g.edge_name(e), self.stops[e.0][k]),
            Cell::Segment(e, k) => format!(
                "segment {}({}, {})",
                g.edge_name(e),
                self.stops[e.0][k],
                self.stops[e.0][k + 1]
            ),
        }
    }

    /// Turns a set of cells back into a subset: closure intervals plus removed points.
    fn assemble(&self, g: &MetricGraph, comp: &[usize]) -> ConnectedSubset {
        let member = |i: usize| comp.binary_search(&i).is_ok();
        let mut intervals = Vec::new();
        let mut vertices = Vec::new();
        let mut excluded = Vec::new();
        for &i in comp {
            match self.cells[i] {
                Cell::Vertex(v) => vertices.push(v),
                Cell::Point(e, k) => intervals.push(Interval {
                    edge: e,
                    lo: self.stops[e.0][k],
                    hi: self.stops[e.0][k],
                }),
                Cell::Segment(e, k) => {
                    let (lo, hi) = (self.stops[e.0][k], self.stops[e.0][k + 1]);
                    intervals.push(Interval { edge: e, lo, hi });
                    for stop in [k, k + 1] {
                        let j = self.endpoint_cells[e.0][stop];
                        if !member(j) {
                            excluded.push(g.point(e, self.stops[e.0][stop]));
                        }
                    }
                }
            }
        }
        ConnectedSubset::from_parts(g, intervals, vertices, excluded)
    }
}
