//! Balanced partitions under a super-additive functional.
//!
//! Cycles are cut open until the graph is a tree, the tree is split repeatedly by
//! walking a greedy path until the forward mass drops below the current threshold,
//! and the resulting tree parts are projected back onto the original graph.

use crate::embed::{extract_subgraph, Embedding};
use crate::error::{Error, Result};
use crate::functional::{
    edge_sides, interior_jumps, tilde_phi, vertex_branch, LocalFn, SetFunction, TildePhi,
};
use crate::graph::{Edge, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::subset::{ConnectedSubset, Interval, Partition};

/// Both copies of a cut point and the point itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitPair {
    pub x1: VertexId,
    pub x2: VertexId,
    pub point: GraphPoint,
}

/// A tree covering the graph, with the length-preserving projection `tau` onto it.
#[derive(Clone, Debug)]
pub struct CutResult {
    pub tree: MetricGraph,
    pub tau: Embedding,
    pub split_pairs: Vec<SplitPair>,
}

/// Cuts the smallest-id edge lying on a cycle at its midpoint, again and again,
/// until no cycle is left. The first half keeps the edge's slot, the second half is
/// appended; the two copies of the midpoint become new vertices.
pub fn cut_cycles(g: &MetricGraph) -> CutResult {
    struct Work {
        from: usize,
        to: usize,
        edge: EdgeId,
        a: f64,
        b: f64,
    }
    let mut work: Vec<Work> = g
        .edge_ids()
        .map(|e| {
            let edge = g.edge(e);
            Work { from: edge.from.0, to: edge.to.0, edge: e, a: 0.0, b: edge.length }
        })
        .collect();
    let mut names: Vec<String> = g.vertices().map(|v| g.vertex_name(v).to_string()).collect();
    let mut edge_names: Vec<String> = g.edge_ids().map(|e| g.edge_name(e).to_string()).collect();
    let mut vertex_map: Vec<GraphPoint> = g.vertices().map(GraphPoint::Vertex).collect();
    let mut split_pairs = Vec::new();
    let build = |work: &[Work], names: &[String], edge_names: &[String]| {
        MetricGraph::from_raw(
            names.to_vec(),
            edge_names.to_vec(),
            work.iter()
                .map(|w| Edge { from: VertexId(w.from), to: VertexId(w.to), length: w.b - w.a })
                .collect(),
        )
    };
    loop {
        let current = build(&work, &names, &edge_names);
        let Some(i) = current.find_noncycle_free_edge() else {
            return CutResult {
                tree: current,
                tau: Embedding { vertex_map, edge_map: work.iter().map(|w| (w.edge, w.a)).collect() },
                split_pairs,
            };
        };
        let (x1, x2) = (names.len(), names.len() + 1);
        let w = &work[i.0];
        let mid = 0.5 * (w.a + w.b);
        let point = g.point(w.edge, mid);
        let base = g.edge_name(w.edge).to_string();
        names.push(format!("{base}.x1"));
        names.push(format!("{base}.x2"));
        vertex_map.push(point);
        vertex_map.push(point);
        let tail = Work { from: x2, to: w.to, edge: w.edge, a: mid, b: w.b };
        work[i.0].to = x1;
        work[i.0].b = mid;
        edge_names[i.0] = format!("{base}/1");
        edge_names.push(format!("{base}/2"));
        work.push(tail);
        split_pairs.push(SplitPair { x1: VertexId(x1), x2: VertexId(x2), point });
    }
}

impl CutResult {
    /// Image of a tree subset on the graph: a cut point belongs to the image exactly
    /// when its first copy belongs to the set.
    pub fn project(&self, g: &MetricGraph, set: &ConnectedSubset) -> ConnectedSubset {
        let image = self.tau.map_subset(&self.tree, g, &set.closure());
        let is_cut = |q: &GraphPoint| self.split_pairs.iter().any(|s| s.point.approx_eq(q));
        let mut removed: Vec<GraphPoint> = set
            .excluded()
            .iter()
            .map(|p| self.tau.map_point(g, p))
            .filter(|q| !is_cut(q))
            .collect();
        for s in &self.split_pairs {
            if !set.contains(&GraphPoint::Vertex(s.x1)) {
                removed.push(s.point);
            }
        }
        image.without_all(&removed)
    }

    /// Tree parts whose projections are the given graph parts. A copy of a cut point
    /// goes to the part containing the point when that part reaches the copy, and
    /// otherwise to the first part reaching it.
    pub fn pull_back(&self, g: &MetricGraph, parts: &[ConnectedSubset]) -> Vec<ConnectedSubset> {
        let raw: Vec<ConnectedSubset> = parts
            .iter()
            .map(|part| {
                let mut intervals = Vec::new();
                for (i, &(e, a)) in self.tau.edge_map.iter().enumerate() {
                    let len = self.tree.edge(EdgeId(i)).length;
                    for iv in part.intervals().iter().filter(|iv| iv.edge == e) {
                        let (lo, hi) = (iv.lo.max(a), iv.hi.min(a + len));
                        if hi >= lo {
                            intervals.push(Interval { edge: EdgeId(i), lo: lo - a, hi: hi - a });
                        }
                    }
                }
                let vertices = part.closure_vertices().to_vec();
                let excluded: Vec<GraphPoint> = part
                    .excluded()
                    .iter()
                    .filter(|p| !self.split_pairs.iter().any(|s| s.point.approx_eq(p)))
                    .flat_map(|p| self.tau.preimages(&self.tree, g, p))
                    .collect();
                ConnectedSubset::from_parts(&self.tree, intervals, vertices, excluded)
            })
            .collect();
        let mut out = raw.clone();
        for s in &self.split_pairs {
            let holder = parts.iter().position(|p| p.contains(&s.point));
            for copy in [s.x1, s.x2] {
                let c = GraphPoint::Vertex(copy);
                let touching: Vec<usize> = (0..raw.len()).filter(|&j| raw[j].closure_contains(&c)).collect();
                let owner = match holder {
                    Some(h) if touching.contains(&h) => Some(h),
                    _ => touching.first().copied(),
                };
                for &j in &touching {
                    if Some(j) != owner {
                        out[j] = out[j].without(&c);
                    }
                }
            }
        }
        out
    }
}

/// The functional pulled back to the cut tree.
pub struct Lifted<'a> {
    pub graph: &'a MetricGraph,
    pub cut: &'a CutResult,
    pub inner: &'a dyn SetFunction,
}

impl SetFunction for Lifted<'_> {
    fn eval(&self, set: &ConnectedSubset) -> f64 {
        self.inner.eval(&self.cut.project(self.graph, set))
    }

    fn jump_points(&self) -> Vec<GraphPoint> {
        self.inner
            .jump_points()
            .iter()
            .flat_map(|p| self.cut.tau.preimages(&self.cut.tree, self.graph, p))
            .collect()
    }
}

/// Outcome of one application of the splitting lemma, in tree coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSplit {
    /// The part beyond the crossing point, closed.
    pub t: ConnectedSubset,
    /// The rest of the tree, closed; it meets `t` only at `x_star`.
    pub t_prime: ConnectedSubset,
    pub x_star: GraphPoint,
    pub eps: f64,
    /// Samples `(arc length along the path, F)` of the forward mass.
    pub f_trace: Vec<(f64, f64)>,
}

impl LemmaSplit {
    pub fn t_prime_minus(&self) -> ConnectedSubset {
        self.t_prime.without(&self.x_star)
    }
}

/// Splits a tree at a point `x*` such that every branch of the far part, punctured at
/// `x*`, has mass at most `eps`, while the near part keeps mass at most `Φ − eps`.
pub fn lemma_split(tree: &MetricGraph, phi: &dyn SetFunction, eps: f64) -> Result<LemmaSplit> {
    if !tree.is_tree() {
        return Err(Error::NotATree);
    }
    lemma_local(tree, phi, eps)
}

fn lemma_local(l: &MetricGraph, psi: &dyn SetFunction, eps: f64) -> Result<LemmaSplit> {
    let total = psi.eval(&ConnectedSubset::whole(l));
    if !(eps > 0.0 && eps < total) {
        return Err(Error::EpsilonOutOfRange { eps, total });
    }
    let gap = 1e-12 * total;
    let jumps = psi.jump_points();
    let v0 = l
        .vertices()
        .find(|&v| l.degree(v) == 1)
        .expect("a finite tree with an edge has a leaf");
    let mut trace = vec![(0.0, total)];
    let mut v = v0;
    let mut back: Option<EdgeId> = None;
    let mut walked = 0.0;

    // Closed part ahead of arc parameter `s` on `e`, walking away from `start`.
    let ahead = |e: EdgeId, start: VertexId, s: f64| -> ConnectedSubset {
        let edge = l.edge(e);
        if edge.from == start {
            edge_sides(l, e, s).1
        } else {
            edge_sides(l, e, edge.length - s).0
        }
    };
    let behind = |e: EdgeId, start: VertexId, s: f64| -> ConnectedSubset {
        let edge = l.edge(e);
        if edge.from == start {
            edge_sides(l, e, s).0
        } else {
            edge_sides(l, e, edge.length - s).1
        }
    };
    let at = |e: EdgeId, start: VertexId, s: f64| -> GraphPoint {
        let edge = l.edge(e);
        l.point(e, if edge.from == start { s } else { edge.length - s })
    };
    let finish = |x_star: GraphPoint, t: ConnectedSubset, t_prime: ConnectedSubset, trace| LemmaSplit {
        t,
        t_prime,
        x_star,
        eps,
        f_trace: trace,
    };

    loop {
        let here = GraphPoint::Vertex(v);
        let mut options: Vec<(f64, VertexId, EdgeId)> = l
            .incident(v)
            .iter()
            .filter(|&&e| Some(e) != back)
            .map(|&e| (psi.eval(&vertex_branch(l, v, e).without(&here)), l.edge(e).other(v), e))
            .collect();
        let top = options.iter().map(|o| o.0).fold(0.0, f64::max);
        options.retain(|o| o.0 >= top - 1e-12 * top.abs());
        options.sort_by(|a, b| a.1.cmp(&b.1).then(a.2.cmp(&b.2)));
        let Some(&(f_plus, next_v, e)) = options.first() else {
            return Err(Error::InvalidParameter("the functional does not vanish on points".into()));
        };
        let (t_here, t_prime_here) = match back {
            None => (ConnectedSubset::whole(l), ConnectedSubset::point(l, here)),
            Some(b) => {
                let prev = l.edge(b).other(v);
                (ahead(b, prev, l.edge(b).length), vertex_branch(l, v, b))
            }
        };
        if f_plus <= eps + gap {
            trace.push((walked, f_plus));
            return Ok(finish(here, t_here, t_prime_here, trace));
        }
        let len = l.edge(e).length;
        let local_jumps = interior_jumps(&jumps, e);
        let mut stops: Vec<f64> = local_jumps
            .iter()
            .map(|&t| if l.edge(e).from == v { t } else { len - t })
            .collect();
        stops.sort_by(f64::total_cmp);
        stops.push(len);
        let mut prev = 0.0;
        for &s in &stops {
            let f_s = psi.eval(&ahead(e, v, s));
            trace.push((walked + s, f_s));
            if f_s <= eps {
                let (mut lo, mut hi) = (prev, s);
                loop {
                    let mid = 0.5 * (lo + hi);
                    if !(mid > lo && mid < hi) || hi - lo <= 1e-15 * len {
                        break;
                    }
                    let f_mid = psi.eval(&ahead(e, v, mid));
                    trace.push((walked + mid, f_mid));
                    if f_mid > eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if hi >= len {
                    let w = GraphPoint::Vertex(next_v);
                    return Ok(finish(w, ahead(e, v, len), vertex_branch(l, next_v, e), trace));
                }
                return Ok(finish(at(e, v, hi), ahead(e, v, hi), behind(e, v, hi), trace));
            }
            if s < len {
                let x = at(e, v, s);
                let f_after = psi.eval(&ahead(e, v, s).without(&x));
                if f_after <= eps + gap {
                    trace.push((walked + s, f_after));
                    return Ok(finish(x, ahead(e, v, s), behind(e, v, s), trace));
                }
            }
            prev = s;
        }
        walked += len;
        back = Some(e);
        v = next_v;
    }
}

/// One recursion step of the partition: threshold, crossing point and trace.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitRecord {
    pub eps: f64,
    /// Crossing point on the cut tree.
    pub x_star: GraphPoint,
    pub f_trace: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct PartitionOutcome {
    pub cut: CutResult,
    pub tree_parts: Vec<ConnectedSubset>,
    pub parts: Partition,
    pub splits: Vec<SplitRecord>,
    pub total: f64,
    pub n: usize,
}

/// Partitions `g` into at most `n` connected parts with `Φ̃(E_j) ≤ Φ(Γ)/(n+1)` on
/// the cut tree.
pub fn partition(g: &MetricGraph, phi: &dyn SetFunction, n: usize) -> Result<PartitionOutcome> {
    if n == 0 {
        return Err(Error::InvalidParameter("the part budget n must be at least 1".into()));
    }
    let cut = cut_cycles(g);
    let lifted = Lifted { graph: g, cut: &cut, inner: phi };
    let tree = &cut.tree;
    let total = lifted.eval(&ConnectedSubset::whole(tree));
    let mut tree_parts = Vec::new();
    let mut splits = Vec::new();

    let mut local = tree.clone();
    let mut emb = Embedding::identity(tree);
    let mut excluded: Vec<GraphPoint> = Vec::new();
    let mut budget = n;
    loop {
        let psi = LocalFn { inner: &lifted, local: &local, target: tree, emb: &emb, excluded: &excluded };
        let whole = ConnectedSubset::whole(&local);
        let current = psi.eval(&whole);
        if budget == 1 || current <= 0.0 {
            tree_parts.push(emb.map_subset(&local, tree, &whole).without_all(&excluded));
            break;
        }
        let eps = current / (budget + 1) as f64;
        let split = lemma_local(&local, &psi, eps)?;
        tree_parts.push(emb.map_subset(&local, tree, &split.t).without_all(&excluded));
        let x_star = emb.map_point(tree, &split.x_star);
        splits.push(SplitRecord { eps, x_star, f_trace: split.f_trace });
        let (next, inner_emb) = extract_subgraph(&local, &split.t_prime);
        emb = inner_emb.compose(&local, tree, &emb);
        local = next;
        excluded.push(x_star);
        budget -= 1;
    }
    tree_parts.retain(|p| !p.is_empty());
    let mut paired: Vec<(ConnectedSubset, ConnectedSubset)> =
        tree_parts.into_iter().map(|p| (cut.project(g, &p), p)).collect();
    paired.sort_by(|a, b| {
        let (ka, kb) = (leftmost(&a.0), leftmost(&b.0));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let (parts, tree_parts): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
    let parts = Partition::new(parts);
    Ok(PartitionOutcome { cut, tree_parts, parts, splits, total, n })
}

/// Sort key placing parts in order of their first edge and offset; parts without
/// intervals go last, by vertex.
fn leftmost(part: &ConnectedSubset) -> (usize, f64) {
    match part.intervals().first() {
        Some(iv) => (iv.edge.0, iv.lo),
        None => (usize::MAX, part.closure_vertices().first().map_or(0.0, |v| v.0 as f64)),
    }
}

/// Per-part verification data.
#[derive(Clone, Debug, PartialEq)]
pub struct PartCheck {
    pub tilde: TildePhi,
    /// The minimizer carried over to the graph.
    pub minimizer: GraphPoint,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionReport {
    pub n: usize,
    pub total: f64,
    /// `Φ(Γ)/(n+1)`.
    pub bound: f64,
    pub parts: Vec<PartCheck>,
    pub violations: Vec<String>,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_tilde(&self) -> f64 {
        self.parts.iter().map(|p| p.tilde.value).fold(0.0, f64::max)
    }
}

impl PartitionOutcome {
    /// Checks every clause of the partition guarantee and records the Φ̃ values.
    pub fn inspect(&self, g: &MetricGraph, phi: &dyn SetFunction, tol_rel: f64) -> Result<PartitionReport> {
        inspect_with_tree(g, phi, &self.parts, &self.cut, &self.tree_parts, self.n, tol_rel)
    }
}

fn inspect_with_tree(
    g: &MetricGraph,
    phi: &dyn SetFunction,
    parts: &Partition,
    cut: &CutResult,
    tree_parts: &[ConnectedSubset],
    n: usize,
    tol_rel: f64,
) -> Result<PartitionReport> {
    let lifted = Lifted { graph: g, cut, inner: phi };
    let total = phi.eval(&ConnectedSubset::whole(g));
    let bound = total / (n + 1) as f64;
    let mut violations = Vec::new();
    if parts.len() > n {
        violations.push(format!("{} parts exceed the budget n = {n}", parts.len()));
    }
    if let Err(msg) = parts.check_exact_cover(g) {
        violations.push(format!("parts are not a partition: {msg}"));
    }
    let mut checks = Vec::new();
    for (j, (part, tp)) in parts.parts.iter().zip(tree_parts).enumerate() {
        if !part.is_connected(g) {
            violations.push(format!("part {j} is not connected"));
        }
        let tilde = match tilde_phi(&cut.tree, &lifted, tp) {
            Ok(t) => t,
            Err(Error::NotATree) => {
                violations.push(format!("part {j} does not lift to a subtree"));
                continue;
            }
            Err(e) => return Err(e),
        };
        if tilde.value > bound * (1.0 + tol_rel) {
            violations.push(format!(
                "part {j}: Φ̃ = {} exceeds Φ(Γ)/(n+1) = {bound}",
                tilde.value
            ));
        }
        checks.push(PartCheck {
            minimizer: cut.tau.map_point(g, &tilde.minimizer),
            tilde,
            length: part.length(),
        });
    }
    Ok(PartitionReport { n, total, bound, parts: checks, violations })
}

/// Report on an arbitrary candidate partition of `g`.
pub fn inspect_partition(
    g: &MetricGraph,
    phi: &dyn SetFunction,
    parts: &Partition,
    n: usize,
    tol_rel: f64,
) -> Result<PartitionReport> {
    let cut = cut_cycles(g);
    let tree_parts = cut.pull_back(g, &parts.parts);
    inspect_with_tree(g, phi, parts, &cut, &tree_parts, n, tol_rel)
}

/// Like [`inspect_partition`] but fails on the first violated clause.
pub fn verify_partition(
    g: &MetricGraph,
    phi: &dyn SetFunction,
    parts: &Partition,
    n: usize,
    tol_rel: f64,
) -> Result<PartitionReport> {
    let report = inspect_partition(g, phi, parts, n, tol_rel)?;
    match report.violations.first() {
        Some(v) => Err(Error::VerificationFailed(v.clone())),
        None => Ok(report),
    }
}
