//! Step-function approximation of Sobolev functions on metric graphs.
//!
//! Both constructions partition the graph with the engine in [`crate::partition`] and
//! sample `u` at the point realizing Φ̃ on each part. The uniform construction uses
//! `Φ_u`, which depends on `u`; the weighted construction uses `Φ_μ`, which does not,
//! so it yields a linear operator of rank at most `n`.

use crate::error::{Error, Result};
use crate::functional::{Functional, SetFunction};
use crate::graph::{EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::measure::{derivative_norm, lp_norm, Measure, PiecewiseFunction};
use crate::partition::{partition, Lifted, PartitionOutcome};
use crate::subset::{ConnectedSubset, Partition};
use crate::svd::{singular_values, Matrix};

/// A function taking one value on each part of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    pub parts: Partition,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn constant(g: &MetricGraph, c: f64) -> Self {
        StepFunction { parts: Partition::new(vec![ConnectedSubset::whole(g)]), values: vec![c] }
    }

    pub fn value_at(&self, p: &GraphPoint) -> Option<f64> {
        self.parts.locate(p).map(|j| self.values[j])
    }

    pub fn rank(&self) -> usize {
        self.parts.len()
    }
}

/// A partition together with one sampling point per part.
#[derive(Clone, Debug)]
pub struct ApproxOperator {
    pub outcome: PartitionOutcome,
    /// Sampling point of each part, in the closure of the part.
    pub points: Vec<GraphPoint>,
    /// Φ̃ of each part on the cut tree.
    pub tilde: Vec<f64>,
    /// `Φ(Γ)` for the functional used.
    pub total: f64,
}

impl ApproxOperator {
    fn build(g: &MetricGraph, phi: &dyn SetFunction, n: usize) -> Result<Self> {
        let outcome = partition(g, phi, n)?;
        let lifted = Lifted { graph: g, cut: &outcome.cut, inner: phi };
        let mut points = Vec::new();
        let mut tilde = Vec::new();
        for part in &outcome.tree_parts {
            let t = crate::functional::tilde_phi(&outcome.cut.tree, &lifted, part)?;
            points.push(outcome.cut.tau.map_point(g, &t.minimizer));
            tilde.push(t.value);
        }
        let total = outcome.total;
        Ok(ApproxOperator { outcome, points, tilde, total })
    }

    pub fn rank(&self) -> usize {
        self.points.len()
    }

    /// `Σ_j u(x_j) χ_j`.
    pub fn apply(&self, g: &MetricGraph, u: &PiecewiseFunction) -> StepFunction {
        StepFunction {
            parts: self.outcome.parts.clone(),
            values: self.points.iter().map(|x| u.value_at(g, x)).collect(),
        }
    }

    pub fn max_tilde(&self) -> f64 {
        self.tilde.iter().copied().fold(0.0, f64::max)
    }
}

/// Result of the uniform construction.
#[derive(Clone, Debug)]
pub struct UniformApprox {
    pub step: StepFunction,
    pub operator: ApproxOperator,
    /// `‖w_a‖_{p'} ‖u'‖_{p,a} / (n+1)`, computed from the norms directly.
    pub bound: f64,
}

/// `‖w_a‖_{L^{p'}(Γ)}` with `w_a = a^{-1/p}`.
pub fn weight_norm(g: &MetricGraph, a: &PiecewiseFunction, p: f64) -> Result<f64> {
    let r = if p.is_infinite() { 1.0 } else { 1.0 / p };
    let w = a.pow_abs(-r)?;
    let q = dual_exponent(p);
    lp_norm(g, &w, q, &ConnectedSubset::whole(g), None)
}

pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Step function `v` with at most `n` values and
/// `‖u − v‖_∞ ≤ ‖w_a‖_{p'} ‖u'‖_{p,a} / (n+1)`.
pub fn approximate_uniform(
    g: &MetricGraph,
    u: &PiecewiseFunction,
    p: f64,
    a: &PiecewiseFunction,
    n: usize,
) -> Result<UniformApprox> {
    let phi = Functional::phi_u(g, u, a, p)?;
    let operator = ApproxOperator::build(g, &phi, n)?;
    let step = operator.apply(g, u);
    let bound = weight_norm(g, a, p)? * derivative_norm(g, u, p, a, &ConnectedSubset::whole(g))? / (n + 1) as f64;
    Ok(UniformApprox { step, operator, bound })
}

/// Rank-`n` operator with
/// `‖u − P u‖_{p,μ} ≤ ‖w_a‖_{p'} μ(Γ)^{1/p} ‖u'‖_{p,a} / (n+1)`.
/// For `p = ∞`, `μ` must have a bounded density `V` and `μ(Γ)^{1/p}` is replaced by
/// `sup V`.
pub fn build_lp_operator(
    g: &MetricGraph,
    mu: &Measure,
    a: &PiecewiseFunction,
    p: f64,
    n: usize,
) -> Result<ApproxOperator> {
    let phi = Functional::phi_mu(g, a, p, mu.clone())?;
    ApproxOperator::build(g, &phi, n)
}

/// The constant `K` with `‖u − P u‖_{p,μ} ≤ K ‖u'‖_{p,a}`.
pub fn lp_bound_factor(g: &MetricGraph, mu: &Measure, a: &PiecewiseFunction, p: f64, n: usize) -> Result<f64> {
    let mass = if p.is_infinite() {
        let one = PiecewiseFunction::constant(g, 1.0);
        lp_norm(g, &one, f64::INFINITY, &ConnectedSubset::whole(g), Some(mu))?
    } else {
        mu.total(g).powf(1.0 / p)
    };
    Ok(weight_norm(g, a, p)? * mass / (n + 1) as f64)
}

/// Points of the closure of `set` where `|u − c|` can peak: interval ends, function
/// breakpoints inside the intervals, and vertices.
fn peak_candidates(g: &MetricGraph, u: &PiecewiseFunction, set: &ConnectedSubset) -> Vec<GraphPoint> {
    let mut pts: Vec<GraphPoint> = set.closure_vertices().iter().map(|&v| GraphPoint::Vertex(v)).collect();
    for iv in set.intervals() {
        pts.push(g.point(iv.edge, iv.lo));
        pts.push(g.point(iv.edge, iv.hi));
        for piece in u.pieces(iv.edge) {
            if piece.to > iv.lo && piece.to < iv.hi {
                pts.push(g.point(iv.edge, piece.to));
            }
        }
    }
    pts
}

/// `sup_Γ |u − v|`, exact for piecewise-linear `u` (a removed point is approached
/// from inside the part, so its value counts as a limit).
pub fn sup_error(g: &MetricGraph, u: &PiecewiseFunction, v: &StepFunction) -> f64 {
    let mut worst: f64 = 0.0;
    for (part, &c) in v.parts.parts.iter().zip(&v.values) {
        for x in peak_candidates(g, u, part) {
            let val = match x {
                GraphPoint::Vertex(vid) => vertex_extremes(g, u, vid, part, c),
                GraphPoint::OnEdge { .. } => (u.value_at(g, &x) - c).abs(),
            };
            worst = worst.max(val);
        }
    }
    worst
}

/// At a vertex, `u` may be discontinuous in principle; use every incident end that
/// belongs to the part's intervals.
fn vertex_extremes(g: &MetricGraph, u: &PiecewiseFunction, v: VertexId, part: &ConnectedSubset, c: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for iv in part.intervals() {
        let edge = g.edge(iv.edge);
        let ps = u.pieces(iv.edge);
        if edge.from == v && iv.lo == 0.0 {
            worst = worst.max((ps[0].start - c).abs());
        }
        if edge.to == v && iv.hi == edge.length {
            worst = worst.max((ps[ps.len() - 1].end - c).abs());
        }
    }
    if part.intervals().iter().all(|iv| g.edge(iv.edge).from != v && g.edge(iv.edge).to != v) {
        worst = worst.max((u.value_at(g, &GraphPoint::Vertex(v)) - c).abs());
    }
    worst
}

/// `‖u − v‖_{L^p(μ)}`: density integrals in closed form plus atom sums; an atom
/// counts towards the part that contains its point.
pub fn lp_error(g: &MetricGraph, u: &PiecewiseFunction, v: &StepFunction, mu: &Measure, p: f64) -> Result<f64> {
    let mut acc: f64 = 0.0;
    for (part, &c) in v.parts.parts.iter().zip(&v.values) {
        let diff = u.map_values(|x| x - c);
        let r = lp_norm(g, &diff, p, part, Some(mu))?;
        if p.is_infinite() {
            acc = acc.max(r);
        } else {
            acc += r.powf(p);
        }
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SharpnessMode {
    Uniform,
    Lp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessReport {
    pub n_arms: usize,
    pub n: usize,
    pub p: f64,
    pub mode: SharpnessMode,
    /// `max_j Φ̃(E_j)` (uniform) or the worst residual over the test subspace (lp).
    pub achieved: f64,
    pub bound: f64,
    pub rel_error: f64,
}

impl SharpnessReport {
    pub fn attained(&self, tol_rel: f64) -> bool {
        self.rel_error <= tol_rel
    }
}

/// Equality cases on the star with `N` unit arms and `n = N − 1`.
///
/// Uniform mode partitions under arc length and compares `max Φ̃` with `|Γ|/N`.
/// Lp mode takes `μ` = unit atoms at the arm tips and `a ≡ 1`, builds the rank-`n`
/// operator and measures `sup ‖u − P u‖_{p,μ}` over functions linear on each arm,
/// vanishing at the centre, with `‖u'‖_p = 1`.
pub fn sharpness_star(n_arms: usize, p: f64, mode: SharpnessMode) -> Result<SharpnessReport> {
    if n_arms < 2 {
        return Err(Error::InvalidParameter("the star needs at least two arms".into()));
    }
    let g = MetricGraph::star(n_arms)?;
    let n = n_arms - 1;
    let (achieved, bound) = match mode {
        SharpnessMode::Uniform => {
            let phi = Functional::length(&g);
            let out = partition(&g, &phi, n)?;
            let report = out.inspect(&g, &phi, 1e-8)?;
            (report.max_tilde(), report.bound)
        }
        SharpnessMode::Lp => {
            let mut mu = Measure::zero(&g);
            for k in 1..=n_arms {
                mu.add_atom(&g, GraphPoint::Vertex(VertexId(k)), 1.0)?;
            }
            let one = PiecewiseFunction::constant(&g, 1.0);
            let op = build_lp_operator(&g, &mu, &one, p, n)?;
            let bound = lp_bound_factor(&g, &mu, &one, p, n)?;
            (star_residual_norm(&g, &op, p)?, bound)
        }
    };
    Ok(SharpnessReport { n_arms, n, p, mode, achieved, bound, rel_error: (achieved - bound).abs() / bound })
}

/// Norm on `ℓ^p` of the map from arm slopes `c` to tip residuals `u(v_k) − (P u)(v_k)`.
fn star_residual_norm(g: &MetricGraph, op: &ApproxOperator, p: f64) -> Result<f64> {
    let arms = g.edge_count();
    let basis = |m: usize| {
        let mut vals = vec![0.0; g.vertex_count()];
        vals[m + 1] = 1.0;
        PiecewiseFunction::from_vertex_values(g, &vals)
    };
    let mut r = Matrix::zeros(arms, arms);
    for m in 0..arms {
        let u = basis(m)?;
        let v = op.apply(g, &u);
        for k in 0..arms {
            let tip = GraphPoint::Vertex(VertexId(k + 1));
            let pu = v.value_at(&tip).ok_or_else(|| Error::VerificationFailed("a tip is not covered".into()))?;
            r.set(k, m, u.value_at(g, &tip) - pu);
        }
    }
    if p == 2.0 {
        return Ok(singular_values(&r)?[0]);
    }
    let norm = |x: &[f64]| -> f64 {
        if p.is_infinite() {
            x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    let mut best: f64 = 0.0;
    for m in 0..arms {
        let mut e = vec![0.0; arms];
        e[m] = 1.0;
        best = best.max(norm(&r.mul_vec(&e)));
    }
    for signs in 0..(1usize << arms.min(16)) {
        let c: Vec<f64> = (0..arms).map(|k| if signs >> k & 1 == 1 { -1.0 } else { 1.0 }).collect();
        best = best.max(norm(&r.mul_vec(&c)) / norm(&c));
    }
    Ok(best)
}

/// Convenience for tests and examples: `u` linear along one edge.
pub fn edge_coordinate(g: &MetricGraph, e: EdgeId) -> Result<PiecewiseFunction> {
    let mut vals = vec![0.0; g.vertex_count()];
    vals[g.edge(e).to.0] = g.edge(e).length;
    PiecewiseFunction::from_vertex_values(g, &vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Piece;

    fn seg() -> MetricGraph {
        MetricGraph::segment(1.0).unwrap()
    }

    #[test]
    fn segment_uniform_infinity() {
        let g = seg();
        let u = edge_coordinate(&g, EdgeId(0)).unwrap();
        let one = PiecewiseFunction::constant(&g, 1.0);
        let r = approximate_uniform(&g, &u, f64::INFINITY, &one, 1).unwrap();
        assert_eq!(r.step.values, vec![0.5]);
        assert!((sup_error(&g, &u, &r.step) - 0.5).abs() < 1e-12);
        assert!((r.bound - 0.5).abs() < 1e-15);
    }

    #[test]
    fn star_uniform_attains_bound() {
        let g = MetricGraph::star(3).unwrap();
        let u = PiecewiseFunction::from_vertex_values(&g, &[0.0, 1.0, 1.0, 1.0]).unwrap();
        let one = PiecewiseFunction::constant(&g, 1.0);
        let r = approximate_uniform(&g, &u, f64::INFINITY, &one, 2).unwrap();
        assert_eq!(r.step.rank(), 2);
        assert!((sup_error(&g, &u, &r.step) - 1.0).abs() < 1e-12);
        assert!((r.bound - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constants_are_reproduced() {
        let g = MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 2.0), ("c", "a", 0.5)]).unwrap();
        let c = PiecewiseFunction::constant(&g, 3.25);
        let one = PiecewiseFunction::constant(&g, 1.0);
        for p in [1.0, 2.0, f64::INFINITY] {
            let r = approximate_uniform(&g, &c, p, &one, 3).unwrap();
            assert_eq!(sup_error(&g, &c, &r.step), 0.0);
        }
        let op = build_lp_operator(&g, &Measure::lebesgue(&g), &one, 2.0, 3).unwrap();
        assert!(op.apply(&g, &c).values.iter().all(|&v| v == 3.25));
    }

    #[test]
    fn error_examples() {
        let g = seg();
        let u = edge_coordinate(&g, EdgeId(0)).unwrap();
        let v = StepFunction::constant(&g, 0.5);
        assert_eq!(sup_error(&g, &u, &v), 0.5);
        let e = lp_error(&g, &u, &v, &Measure::lebesgue(&g), 2.0).unwrap();
        assert!((e - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(sup_error(&g, &u, &StepFunction { parts: v.parts.clone(), values: vec![0.5] }), 0.5);

        let half = g.point(EdgeId(0), 0.5);
        let left = ConnectedSubset::interval(&g, EdgeId(0), 0.0, 0.5).without(&half);
        let right = ConnectedSubset::interval(&g, EdgeId(0), 0.5, 1.0);
        let step = StepFunction { parts: Partition::new(vec![left, right]), values: vec![0.0, 0.75] };
        let delta = Measure::new(&g, [(half, 1.0)], std::iter::empty()).unwrap();
        assert!((lp_error(&g, &u, &step, &delta, 1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lp_operator_segment_trace() {
        let g = seg();
        let one = PiecewiseFunction::constant(&g, 1.0);
        let op = build_lp_operator(&g, &Measure::lebesgue(&g), &one, 2.0, 3).unwrap();
        let mut lens: Vec<f64> = op.outcome.parts.parts.iter().map(|p| p.length()).collect();
        lens.sort_by(f64::total_cmp);
        assert!((lens[0] - 0.25).abs() < 1e-9 && (lens[2] - 0.5).abs() < 1e-9);
        assert!((op.max_tilde() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn p_one_bound_with_variable_weight() {
        let g = seg();
        let a = PiecewiseFunction::new(
            &g,
            vec![vec![
                Piece { from: 0.0, to: 0.3, start: 2.0, end: 2.0 },
                Piece { from: 0.3, to: 1.0, start: 0.5, end: 0.5 },
            ]],
        )
        .unwrap();
        let u = PiecewiseFunction::new(
            &g,
            vec![vec![
                Piece { from: 0.0, to: 0.6, start: 0.0, end: 1.2 },
                Piece { from: 0.6, to: 1.0, start: 1.2, end: -0.4 },
            ]],
        )
        .unwrap();
        for n in 1..=5 {
            let r = approximate_uniform(&g, &u, 1.0, &a, n).unwrap();
            assert!(sup_error(&g, &u, &r.step) <= r.bound * (1.0 + 1e-8));
        }
    }

    #[test]
    fn star_sharpness() {
        for arms in 2..=5 {
            let u = sharpness_star(arms, 2.0, SharpnessMode::Uniform).unwrap();
            assert!(u.attained(1e-8), "{u:?}");
            let l = sharpness_star(arms, 2.0, SharpnessMode::Lp).unwrap();
            assert!(l.attained(1e-6), "{l:?}");
        }
    }
}
