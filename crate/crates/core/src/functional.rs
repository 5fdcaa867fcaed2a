//! Super-additive set functions on connected subsets, branch decompositions of
//! subtrees at a point, and the minimax quantity Φ̃ on trees.

use crate::embed::{extract_subgraph, Embedding};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::measure::{Measure, PiecewiseFunction};
use crate::subset::{ConnectedSubset, Interval};

/// A nonnegative set function on the connected subsets of one fixed graph.
pub trait SetFunction: Send + Sync {
    fn eval(&self, set: &ConnectedSubset) -> f64;

    /// Points at which `x ↦ Φ(E ∪ {x})` may jump (atoms, weight breakpoints).
    fn jump_points(&self) -> Vec<GraphPoint> {
        Vec::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalKind {
    Length,
    Measure,
    Product,
    PhiU,
    PhiMu,
    PhiTheta,
}

impl FunctionalKind {
    pub fn name(self) -> &'static str {
        match self {
            FunctionalKind::Length => "length",
            FunctionalKind::Measure => "measure",
            FunctionalKind::Product => "product",
            FunctionalKind::PhiU => "phi_u",
            FunctionalKind::PhiMu => "phi_mu",
            FunctionalKind::PhiTheta => "phi_theta",
        }
    }
}

/// `Φ(E) = scale · Π μ_i(E)^{α_i} · [sup* of a weight over E]`.
#[derive(Clone, Debug)]
pub struct Functional {
    kind: FunctionalKind,
    scale: f64,
    terms: Vec<(Measure, f64)>,
    sup: Option<UpperEnvelope>,
    jumps: Vec<GraphPoint>,
}

/// Supremum over a set of the upper semicontinuous envelope of a piecewise-constant
/// weight: at a breakpoint or vertex the envelope takes the largest adjacent value.
/// Null sets get 0, as an essential supremum would.
#[derive(Clone, Debug)]
struct UpperEnvelope {
    w: PiecewiseFunction,
    lengths: Vec<f64>,
    at_vertex: Vec<f64>,
}

impl UpperEnvelope {
    fn new(g: &MetricGraph, w: PiecewiseFunction) -> Self {
        let mut at_vertex = vec![0.0f64; g.vertex_count()];
        for e in g.edge_ids() {
            let edge = g.edge(e);
            let ps = w.pieces(e);
            at_vertex[edge.from.0] = at_vertex[edge.from.0].max(ps[0].start);
            at_vertex[edge.to.0] = at_vertex[edge.to.0].max(ps[ps.len() - 1].end);
        }
        UpperEnvelope { w, lengths: g.edges().iter().map(|e| e.length).collect(), at_vertex }
    }

    fn sup_over(&self, set: &ConnectedSubset) -> f64 {
        if set.length() == 0.0 {
            return 0.0;
        }
        let mut best: f64 = 0.0;
        for &v in set.closure_vertices() {
            if set.contains(&GraphPoint::Vertex(v)) {
                best = best.max(self.at_vertex[v.0]);
            }
        }
        for iv in set.intervals() {
            let len = self.lengths[iv.edge.0];
            for p in self.w.pieces(iv.edge) {
                let overlap = p.to.min(iv.hi) - p.from.max(iv.lo);
                let touch = if overlap > 0.0 {
                    true
                } else if overlap == 0.0 {
                    let t = if p.to == iv.lo { p.to } else { p.from };
                    t > 0.0 && t < len && set.contains(&GraphPoint::OnEdge { edge: iv.edge, offset: t })
                } else {
                    false
                };
                if touch {
                    best = best.max(p.start);
                }
            }
        }
        best
    }
}

/// `w_a = a^{-1/p}`, with `1/a` for `p = ∞`.
fn weight_from(g: &MetricGraph, a: &PiecewiseFunction, p: f64) -> Result<PiecewiseFunction> {
    if !a.is_piecewise_constant() {
        return Err(Error::InvalidParameter("the weight a must be piecewise constant".into()));
    }
    for e in g.edge_ids() {
        if let Some(bad) = a.pieces(e).iter().find(|q| !(q.start > 0.0 && q.start.is_finite())) {
            return Err(Error::WeightNotIntegrable(format!(
                "a = {} on edge {} gives an infinite w_a",
                bad.start,
                g.edge_name(e)
            )));
        }
    }
    let r = if p.is_infinite() { 1.0 } else { 1.0 / p };
    a.pow_abs(-r)
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} must lie in [1, ∞]")))
    }
}

impl Functional {
    fn build(
        kind: FunctionalKind,
        scale: f64,
        terms: Vec<(Measure, f64)>,
        sup: Option<UpperEnvelope>,
        g: &MetricGraph,
    ) -> Self {
        let mut jumps: Vec<GraphPoint> = Vec::new();
        for (m, alpha) in &terms {
            if *alpha > 0.0 {
                jumps.extend(m.atoms().iter().map(|(p, _)| *p));
            }
        }
        if let Some(s) = &sup {
            jumps.extend(s.w.breakpoints(g));
        }
        let mut dedup: Vec<GraphPoint> = Vec::new();
        for p in jumps {
            if !dedup.iter().any(|q| q.approx_eq(&p)) {
                dedup.push(p);
            }
        }
        Functional { kind, scale, terms, sup, jumps: dedup }
    }

    /// `Φ(E) = |E|`.
    pub fn length(g: &MetricGraph) -> Self {
        Self::build(FunctionalKind::Length, 1.0, vec![(Measure::lebesgue(g), 1.0)], None, g)
    }

    /// `Φ(E) = μ(E)` for an atom-free `μ`.
    pub fn measure(g: &MetricGraph, mu: Measure) -> Result<Self> {
        if mu.has_atoms() {
            return Err(Error::InvalidParameter(
                "the measure functional needs an atom-free measure (it must vanish on points)".into(),
            ));
        }
        Ok(Self::build(FunctionalKind::Measure, 1.0, vec![(mu, 1.0)], None, g))
    }

    /// `Φ(E) = μ1(E)^α μ2(E)^{1-α}` with `μ1` atom-free.
    pub fn product(g: &MetricGraph, mu1: Measure, mu2: Measure, alpha: f64) -> Result<Self> {
        if mu1.has_atoms() {
            return Err(Error::AtomicFirstMeasure);
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("α = {alpha} must lie in (0, 1)")));
        }
        Ok(Self::build(FunctionalKind::Product, 1.0, vec![(mu1, alpha), (mu2, 1.0 - alpha)], None, g))
    }

    /// `Φ_u(E) = ‖w_a‖_{L^{p'}(E)} ‖u'‖_{L^p(E,a)}`; for `p = ∞` the set-independent
    /// factor `‖u'‖_{∞,a}` over the whole graph is used, which makes the functional
    /// independent of the local behaviour of `u`.
    pub fn phi_u(g: &MetricGraph, u: &PiecewiseFunction, a: &PiecewiseFunction, p: f64) -> Result<Self> {
        check_p(p)?;
        u.check_continuous(g)?;
        let w = weight_from(g, a, p)?;
        let du = u.derivative();
        if p.is_infinite() {
            let gradient = du.zip_constant(a, |d, a| d.abs() * a)?;
            let sup = gradient.to_density(g)?;
            let scale = crate::measure::lp_norm(
                g,
                &PiecewiseFunction::constant(g, 1.0),
                f64::INFINITY,
                &ConnectedSubset::whole(g),
                Some(&sup),
            )?;
            return Ok(Self::build(FunctionalKind::PhiU, scale, vec![(w.to_density(g)?, 1.0)], None, g));
        }
        let energy = du.zip_constant(a, |d, a| a * d.abs().powf(p))?.to_density(g)?;
        if p == 1.0 {
            return Ok(Self::build(
                FunctionalKind::PhiU,
                1.0,
                vec![(energy, 1.0)],
                Some(UpperEnvelope::new(g, w)),
                g,
            ));
        }
        let q = p / (p - 1.0);
        let dual = w.pow_abs(q)?.to_density(g)?;
        Ok(Self::build(FunctionalKind::PhiU, 1.0, vec![(dual, 1.0 / q), (energy, 1.0 / p)], None, g))
    }

    /// `Φ_μ(E) = ‖w_a‖_{L^{p'}(E)} μ(E)^{1/p}`. For `p = ∞` only the first factor
    /// remains and `μ` must be atom-free.
    pub fn phi_mu(g: &MetricGraph, a: &PiecewiseFunction, p: f64, mu: Measure) -> Result<Self> {
        check_p(p)?;
        let w = weight_from(g, a, p)?;
        if p.is_infinite() {
            if mu.has_atoms() {
                return Err(Error::UnboundedWeight);
            }
            return Ok(Self::build(FunctionalKind::PhiMu, 1.0, vec![(w.to_density(g)?, 1.0)], None, g));
        }
        if p == 1.0 {
            return Ok(Self::build(FunctionalKind::PhiMu, 1.0, vec![(mu, 1.0)], Some(UpperEnvelope::new(g, w)), g));
        }
        let q = p / (p - 1.0);
        let dual = w.pow_abs(q)?.to_density(g)?;
        Ok(Self::build(FunctionalKind::PhiMu, 1.0, vec![(dual, 1.0 / q), (mu, 1.0 / p)], None, g))
    }

    /// `Φ(E) = |E|^{1-1/(θp)} μ(E)^{1/(θp)}`.
    pub fn phi_theta(g: &MetricGraph, theta: f64, p: f64, mu: Measure) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("θ = {theta} must lie in (0, 1)")));
        }
        if !(p.is_finite() && theta * p > 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must be finite and exceed 1/θ")));
        }
        let beta = 1.0 / (theta * p);
        Ok(Self::build(
            FunctionalKind::PhiTheta,
            1.0,
            vec![(Measure::lebesgue(g), 1.0 - beta), (mu, beta)],
            None,
            g,
        ))
    }

    pub fn kind(&self) -> FunctionalKind {
        self.kind
    }

    pub fn total(&self, g: &MetricGraph) -> f64 {
        self.eval(&ConnectedSubset::whole(g))
    }
}

impl SetFunction for Functional {
    fn eval(&self, set: &ConnectedSubset) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        let mut v = self.scale;
        for (m, alpha) in &self.terms {
            if *alpha == 0.0 {
                continue;
            }
            let x = m.measure_of(set);
            if x <= 0.0 {
                return 0.0;
            }
            v *= x.powf(*alpha);
        }
        if let Some(s) = &self.sup {
            v *= s.sup_over(set);
        }
        v
    }

    fn jump_points(&self) -> Vec<GraphPoint> {
        self.jumps.clone()
    }
}

impl<T: SetFunction + ?Sized> SetFunction for &T {
    fn eval(&self, set: &ConnectedSubset) -> f64 {
        (**self).eval(set)
    }

    fn jump_points(&self) -> Vec<GraphPoint> {
        (**self).jump_points()
    }
}

/// A set function on `local` obtained by embedding sets into `target`, removing a
/// fixed list of target points and evaluating `inner` there.
pub(crate) struct LocalFn<'a> {
    pub inner: &'a dyn SetFunction,
    pub local: &'a MetricGraph,
    pub target: &'a MetricGraph,
    pub emb: &'a Embedding,
    pub excluded: &'a [GraphPoint],
}

impl SetFunction for LocalFn<'_> {
    fn eval(&self, set: &ConnectedSubset) -> f64 {
        let image = self.emb.map_subset(self.local, self.target, set);
        self.inner.eval(&image.without_all(self.excluded))
    }

    fn jump_points(&self) -> Vec<GraphPoint> {
        self.inner
            .jump_points()
            .iter()
            .chain(self.excluded)
            .flat_map(|p| self.emb.preimages(self.local, self.target, p))
            .collect()
    }
}

/// Edges and vertices reachable from `start` without using `banned` (tree walk).
fn reach(g: &MetricGraph, start: VertexId, banned: EdgeId) -> (Vec<EdgeId>, Vec<VertexId>) {
    let mut edges = Vec::new();
    let mut verts = vec![start];
    let mut stack = vec![(start, banned)];
    while let Some((v, via)) = stack.pop() {
        for &e in g.incident(v) {
            if e == via || edges.contains(&e) || e == banned {
                continue;
            }
            edges.push(e);
            let w = g.edge(e).other(v);
            verts.push(w);
            stack.push((w, e));
        }
    }
    (edges, verts)
}

fn assemble(g: &MetricGraph, edges: &[EdgeId], verts: &[VertexId], extra: Option<Interval>) -> ConnectedSubset {
    ConnectedSubset::from_parts(
        g,
        edges
            .iter()
            .map(|&e| Interval { edge: e, lo: 0.0, hi: g.edge(e).length })
            .chain(extra),
        verts.iter().copied(),
        [],
    )
}

/// Closed branch at vertex `v` leaving through edge `e`.
pub(crate) fn vertex_branch(g: &MetricGraph, v: VertexId, e: EdgeId) -> ConnectedSubset {
    let w = g.edge(e).other(v);
    let (mut edges, mut verts) = reach(g, w, e);
    edges.push(e);
    verts.push(v);
    assemble(g, &edges, &verts, None)
}

/// The closed pieces on either side of offset `t` of edge `e`: (towards `from`, towards `to`).
pub(crate) fn edge_sides(g: &MetricGraph, e: EdgeId, t: f64) -> (ConnectedSubset, ConnectedSubset) {
    (from_side(g, e, t), to_side(g, e, t))
}

pub(crate) fn from_side(g: &MetricGraph, e: EdgeId, t: f64) -> ConnectedSubset {
    let edge = g.edge(e);
    let (edges, verts) = reach(g, edge.from, e);
    assemble(g, &edges, &verts, Some(Interval { edge: e, lo: 0.0, hi: t }))
}

pub(crate) fn to_side(g: &MetricGraph, e: EdgeId, t: f64) -> ConnectedSubset {
    let edge = g.edge(e);
    let (edges, verts) = reach(g, edge.to, e);
    assemble(g, &edges, &verts, Some(Interval { edge: e, lo: t, hi: edge.length }))
}

/// Closed branches of a tree at `x`.
pub(crate) fn branches_at(g: &MetricGraph, x: &GraphPoint) -> Vec<ConnectedSubset> {
    match *x {
        GraphPoint::Vertex(v) => g.incident(v).iter().map(|&e| vertex_branch(g, v, e)).collect(),
        GraphPoint::OnEdge { edge, offset } => {
            let (a, b) = edge_sides(g, edge, offset);
            vec![a, b]
        }
    }
}

/// `Φ°(T, x)`: the largest value of `psi` on a branch at `x` with `x` removed.
pub(crate) fn phi_circ(g: &MetricGraph, psi: &dyn SetFunction, x: &GraphPoint) -> f64 {
    branches_at(g, x)
        .iter()
        .map(|b| psi.eval(&b.without(x)))
        .fold(0.0, f64::max)
}

/// Branches of a subtree at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct PuncturedTreeSplit {
    pub base: GraphPoint,
    pub branches: Vec<ConnectedSubset>,
}

/// Splits the subtree `set` of `g` at `x` into its branches (closed at `x`, keeping
/// the other removed points of `set`).
pub fn canonical_split(g: &MetricGraph, set: &ConnectedSubset, x: &GraphPoint) -> Result<PuncturedTreeSplit> {
    let x = g.canonical(*x);
    if !set.closure_contains(&x) {
        return Err(Error::PointNotOnGraph(format!("{} is not in the closure of the set", g.describe_point(&x))));
    }
    let (l, emb) = extract_subgraph(g, &set.closure());
    if !l.is_tree() {
        return Err(Error::NotATree);
    }
    let local_x = emb.preimages(&l, g, &x)[0];
    let branches = branches_at(&l, &local_x)
        .iter()
        .map(|b| {
            let image = emb.map_subset(&l, g, b);
            image.without_all(set.excluded().iter().filter(|p| !p.approx_eq(&x)))
        })
        .collect();
    Ok(PuncturedTreeSplit { base: x, branches })
}

impl PuncturedTreeSplit {
    /// `max_j Φ(Θ_j \ {x})`.
    pub fn phi_circ(&self, phi: &dyn SetFunction) -> f64 {
        self.branches
            .iter()
            .map(|b| phi.eval(&b.without(&self.base)))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TildePhi {
    pub value: f64,
    pub minimizer: GraphPoint,
    /// The branch values have a jump at the minimizer, so the reported minimum is
    /// one of two different one-sided limits.
    pub jump_at_minimizer: bool,
}

/// `Φ̃(E) = min_{x ∈ Ē} Φ°(E, x)` for a subtree `E` of `g`.
pub fn tilde_phi(g: &MetricGraph, phi: &dyn SetFunction, set: &ConnectedSubset) -> Result<TildePhi> {
    if set.closure_vertices().is_empty() && set.intervals().is_empty() {
        return Err(Error::InvalidParameter("Φ̃ of the empty set".into()));
    }
    let (l, emb) = extract_subgraph(g, &set.closure());
    if !l.is_tree() {
        return Err(Error::NotATree);
    }
    let psi = LocalFn { inner: phi, local: &l, target: g, emb: &emb, excluded: set.excluded() };
    let r = tilde_phi_local(&l, &psi);
    Ok(TildePhi { minimizer: emb.map_point(g, &r.minimizer), ..r })
}

/// Offsets in the open interior of `e` at which `jumps` sit.
pub(crate) fn interior_jumps(jumps: &[GraphPoint], e: EdgeId) -> Vec<f64> {
    let mut ts: Vec<f64> = jumps
        .iter()
        .filter_map(|p| match *p {
            GraphPoint::OnEdge { edge, offset } if edge == e => Some(offset),
            _ => None,
        })
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

pub(crate) fn tilde_phi_local(l: &MetricGraph, psi: &dyn SetFunction) -> TildePhi {
    if l.edge_count() == 0 {
        return TildePhi { value: 0.0, minimizer: GraphPoint::Vertex(VertexId(0)), jump_at_minimizer: false };
    }
    let jumps = psi.jump_points();
    let mut best: Option<(f64, GraphPoint)> = None;
    let mut consider = |p: GraphPoint, val: f64| match best {
        Some((b, _)) if val >= b - 1e-14 * b.abs() => {}
        _ => best = Some((val, p)),
    };
    for v in l.vertices() {
        let p = GraphPoint::Vertex(v);
        consider(p, phi_circ(l, psi, &p));
    }
    for e in l.edge_ids() {
        let len = l.edge(e).length;
        let inner = interior_jumps(&jumps, e);
        for &t in &inner {
            let p = GraphPoint::OnEdge { edge: e, offset: t };
            consider(p, phi_circ(l, psi, &p));
        }
        let mut stops = vec![0.0];
        stops.extend(&inner);
        stops.push(len);
        for w in stops.windows(2) {
            let (a, b) = (w[0], w[1]);
            let at = |t: f64| {
                let p = GraphPoint::OnEdge { edge: e, offset: t };
                let (fs, ts) = edge_sides(l, e, t);
                (psi.eval(&fs.without(&p)), psi.eval(&ts.without(&p)))
            };
            let (mut lo, mut hi) = (a, b);
            loop {
                let mid = 0.5 * (lo + hi);
                if !(mid > lo && mid < hi) || hi - lo <= 1e-15 * len {
                    break;
                }
                let (gv, hv) = at(mid);
                if gv < hv {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let bracket = [lo, hi]
                .into_iter()
                .filter(|&t| t > a && t < b)
                .map(|t| {
                    let (gv, hv) = at(t);
                    (gv.max(hv), t)
                })
                .reduce(|x, y| if y.0 < x.0 { y } else { x });
            if let Some((val, t)) = bracket {
                consider(GraphPoint::OnEdge { edge: e, offset: t }, val);
            }
        }
    }
    let (value, minimizer) = best.expect("a tree with an edge has candidates");
    let jump_at_minimizer = jumps.iter().any(|q| q.approx_eq(&minimizer));
    TildePhi { value, minimizer, jump_at_minimizer }
}
