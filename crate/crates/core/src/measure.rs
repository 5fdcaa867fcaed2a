//! Finite measures (atoms plus piecewise-constant densities), piecewise-linear
//! functions, and exact weighted L^p norms over connected subsets.

use crate::error::{Error, Result};
use crate::graph::{offset_tol, EdgeId, GraphPoint, MetricGraph};
use crate::subset::ConnectedSubset;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityPiece {
    pub from: f64,
    pub to: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    atoms: Vec<(GraphPoint, f64)>,
    density: Vec<Vec<DensityPiece>>,
}

impl Measure {
    pub fn zero(g: &MetricGraph) -> Self {
        Measure { atoms: Vec::new(), density: vec![Vec::new(); g.edge_count()] }
    }

    pub fn lebesgue(g: &MetricGraph) -> Self {
        Self::uniform(g, 1.0)
    }

    pub fn uniform(g: &MetricGraph, value: f64) -> Self {
        Measure {
            atoms: Vec::new(),
            density: g
                .edges()
                .iter()
                .map(|e| vec![DensityPiece { from: 0.0, to: e.length, value }])
                .collect(),
        }
    }

    /// Validating constructor. Atoms at the same location are merged; density pieces
    /// are sorted and must not overlap. Gaps carry zero density.
    pub fn new(
        g: &MetricGraph,
        atoms: impl IntoIterator<Item = (GraphPoint, f64)>,
        density: impl IntoIterator<Item = (EdgeId, DensityPiece)>,
    ) -> Result<Self> {
        let mut m = Self::zero(g);
        for (p, mass) in atoms {
            m.add_atom(g, p, mass)?;
        }
        for (e, piece) in density {
            if e.0 >= g.edge_count() {
                return Err(Error::UnknownEdge(format!("#{}", e.0)));
            }
            let len = g.edge(e).length;
            let tol = offset_tol(len);
            if !(piece.value.is_finite() && piece.value >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "density value {} on edge {}",
                    piece.value,
                    g.edge_name(e)
                )));
            }
            if !(piece.from >= -tol && piece.to <= len + tol && piece.from < piece.to) {
                return Err(Error::InvalidParameter(format!(
                    "density piece [{}, {}] outside edge {} of length {len}",
                    piece.from,
                    piece.to,
                    g.edge_name(e)
                )));
            }
            m.density[e.0].push(DensityPiece { from: piece.from.max(0.0), to: piece.to.min(len), ..piece });
        }
        for (i, pieces) in m.density.iter_mut().enumerate() {
            pieces.sort_by(|a, b| a.from.total_cmp(&b.from));
            let tol = offset_tol(g.edge(EdgeId(i)).length);
            if pieces.windows(2).any(|w| w[1].from < w[0].to - tol) {
                return Err(Error::InvalidParameter(format!(
                    "overlapping density pieces on edge {}",
                    g.edge_name(EdgeId(i))
                )));
            }
        }
        Ok(m)
    }

    pub fn add_atom(&mut self, g: &MetricGraph, p: GraphPoint, mass: f64) -> Result<()> {
        g.check_point(&p)?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!("atom mass {mass}")));
        }
        let p = g.canonical(p);
        match self.atoms.iter_mut().find(|(q, _)| q.approx_eq(&p)) {
            Some((_, m)) => *m += mass,
            None => self.atoms.push((p, mass)),
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[(GraphPoint, f64)] {
        &self.atoms
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn density(&self, e: EdgeId) -> &[DensityPiece] {
        &self.density[e.0]
    }

    pub fn density_at(&self, e: EdgeId, t: f64) -> f64 {
        self.density[e.0].iter().find(|p| p.from <= t && t <= p.to).map_or(0.0, |p| p.value)
    }

    /// The same measure with its atoms dropped.
    pub fn without_atoms(&self) -> Self {
        Measure { atoms: Vec::new(), density: self.density.clone() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Measure {
            atoms: self.atoms.iter().map(|&(p, m)| (p, m * c)).collect(),
            density: self
                .density
                .iter()
                .map(|ps| ps.iter().map(|p| DensityPiece { value: p.value * c, ..*p }).collect())
                .collect(),
        }
    }

    pub fn total(&self, g: &MetricGraph) -> f64 {
        self.measure_of(&ConnectedSubset::whole(g))
    }

    /// `μ(E)`: the density integral over the intervals of `E` plus the atoms that are
    /// points of `E` (an atom at a removed point does not count).
    pub fn measure_of(&self, set: &ConnectedSubset) -> f64 {
        let mut s: f64 = self.atoms.iter().filter(|(p, _)| set.contains(p)).map(|(_, m)| m).sum();
        for iv in set.intervals() {
            for piece in &self.density[iv.edge.0] {
                let overlap = piece.to.min(iv.hi) - piece.from.max(iv.lo);
                if overlap > 0.0 {
                    s += overlap * piece.value;
                }
            }
        }
        s
    }
}

/// A linear piece `start + (end - start)(t - from)/(to - from)` on `[from, to]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    pub start: f64,
    pub end: f64,
}

impl Piece {
    pub fn at(&self, t: f64) -> f64 {
        if t <= self.from {
            self.start
        } else if t >= self.to {
            self.end
        } else {
            let s = (t - self.from) / (self.to - self.from);
            self.start + (self.end - self.start) * s
        }
    }

    pub fn slope(&self) -> f64 {
        (self.end - self.start) / (self.to - self.from)
    }
}

/// Piecewise-linear function on a metric graph, one sorted piece list per edge
/// covering the whole edge.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFunction {
    pieces: Vec<Vec<Piece>>,
}

impl PiecewiseFunction {
    pub fn constant(g: &MetricGraph, c: f64) -> Self {
        PiecewiseFunction {
            pieces: g
                .edges()
                .iter()
                .map(|e| vec![Piece { from: 0.0, to: e.length, start: c, end: c }])
                .collect(),
        }
    }

    /// Linear on every edge with the given vertex values.
    pub fn from_vertex_values(g: &MetricGraph, values: &[f64]) -> Result<Self> {
        if values.len() != g.vertex_count() {
            return Err(Error::InvalidParameter(format!(
                "{} vertex values for {} vertices",
                values.len(),
                g.vertex_count()
            )));
        }
        Ok(PiecewiseFunction {
            pieces: g
                .edges()
                .iter()
                .map(|e| vec![Piece { from: 0.0, to: e.length, start: values[e.from.0], end: values[e.to.0] }])
                .collect(),
        })
    }

    /// Pieces per edge must be contiguous, increasing and cover the edge.
    pub fn new(g: &MetricGraph, pieces: Vec<Vec<Piece>>) -> Result<Self> {
        if pieces.len() != g.edge_count() {
            return Err(Error::InvalidParameter(format!(
                "function given on {} edges, graph has {}",
                pieces.len(),
                g.edge_count()
            )));
        }
        let mut out = Vec::with_capacity(pieces.len());
        for (i, mut ps) in pieces.into_iter().enumerate() {
            let e = EdgeId(i);
            let len = g.edge(e).length;
            let tol = offset_tol(len);
            ps.sort_by(|a, b| a.from.total_cmp(&b.from));
            let bad = |msg: &str| Error::InvalidParameter(format!("edge {}: {msg}", g.edge_name(e)));
            if ps.is_empty() {
                return Err(bad("no pieces"));
            }
            if ps.iter().any(|p| !(p.start.is_finite() && p.end.is_finite())) {
                return Err(bad("non-finite value"));
            }
            if ps.iter().any(|p| p.to <= p.from) {
                return Err(bad("breakpoints must be strictly increasing"));
            }
            if ps[0].from.abs() > tol || (ps[ps.len() - 1].to - len).abs() > tol {
                return Err(bad("pieces do not cover the edge"));
            }
            if ps.windows(2).any(|w| (w[1].from - w[0].to).abs() > tol) {
                return Err(bad("pieces are not contiguous"));
            }
            ps[0].from = 0.0;
            let last = ps.len() - 1;
            ps[last].to = len;
            for k in 1..ps.len() {
                ps[k].from = ps[k - 1].to;
            }
            out.push(ps);
        }
        Ok(PiecewiseFunction { pieces: out })
    }

    pub fn pieces(&self, e: EdgeId) -> &[Piece] {
        &self.pieces[e.0]
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces.iter().flatten().all(|p| p.start == p.end)
    }

    /// Value at a point; at a vertex the first incident edge decides.
    pub fn value_at(&self, g: &MetricGraph, p: &GraphPoint) -> f64 {
        match g.canonical(*p) {
            GraphPoint::Vertex(v) => {
                let e = g.incident(v)[0];
                if g.edge(e).from == v {
                    self.pieces[e.0][0].start
                } else {
                    self.pieces[e.0].last().unwrap().end
                }
            }
            GraphPoint::OnEdge { edge, offset } => self.value_on_edge(edge, offset),
        }
    }

    pub fn value_on_edge(&self, e: EdgeId, t: f64) -> f64 {
        let ps = &self.pieces[e.0];
        let k = ps.partition_point(|p| p.to < t).min(ps.len() - 1);
        ps[k].at(t)
    }

    /// Agreement at interior breakpoints and at shared vertices.
    pub fn check_continuous(&self, g: &MetricGraph) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        for e in g.edge_ids() {
            for w in self.pieces[e.0].windows(2) {
                if !close(w[0].end, w[1].start) {
                    return Err(Error::DiscontinuousInput(format!(
                        "jump at {}",
                        g.describe_point(&g.point(e, w[0].to))
                    )));
                }
            }
        }
        for v in g.vertices() {
            let mut vals = g.incident(v).iter().flat_map(|&e| {
                let edge = g.edge(e);
                let ps = &self.pieces[e.0];
                let mut out = Vec::new();
                if edge.from == v {
                    out.push(ps[0].start);
                }
                if edge.to == v {
                    out.push(ps[ps.len() - 1].end);
                }
                out
            });
            if let Some(first) = vals.next() {
                if vals.any(|x| !close(x, first)) {
                    return Err(Error::DiscontinuousInput(format!("values disagree at vertex {}", g.vertex_name(v))));
                }
            }
        }
        Ok(())
    }

    /// Edge-wise derivative (piecewise constant).
    pub fn derivative(&self) -> Self {
        PiecewiseFunction {
            pieces: self
                .pieces
                .iter()
                .map(|ps| {
                    ps.iter()
                        .map(|p| {
                            let s = p.slope();
                            Piece { start: s, end: s, ..*p }
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `|f|^r` for a piecewise-constant `f`.
    pub fn pow_abs(&self, r: f64) -> Result<Self> {
        if !self.is_piecewise_constant() {
            return Err(Error::InvalidParameter("power of a non-constant piece".into()));
        }
        Ok(self.map_values(|x| x.abs().powf(r)))
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        PiecewiseFunction {
            pieces: self
                .pieces
                .iter()
                .map(|ps| ps.iter().map(|p| Piece { start: f(p.start), end: f(p.end), ..*p }).collect())
                .collect(),
        }
    }

    /// `α·self + other` on the common refinement of the breakpoints.
    pub fn combine(&self, alpha: f64, other: &Self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(a, b)| {
                let mut cuts: Vec<f64> = a.iter().chain(b).flat_map(|p| [p.from, p.to]).collect();
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                cuts.windows(2)
                    .map(|w| {
                        let (s, t) = (w[0], w[1]);
                        let m = 0.5 * (s + t);
                        let pa = a.iter().find(|p| p.from <= m && m <= p.to).unwrap();
                        let pb = b.iter().find(|p| p.from <= m && m <= p.to).unwrap();
                        Piece { from: s, to: t, start: alpha * pa.at(s) + pb.at(s), end: alpha * pa.at(t) + pb.at(t) }
                    })
                    .collect()
            })
            .collect();
        PiecewiseFunction { pieces }
    }

    /// Pointwise `op(self, other)` for two piecewise-constant functions.
    pub fn zip_constant(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.is_piecewise_constant() || !other.is_piecewise_constant() {
            return Err(Error::InvalidParameter("expected piecewise-constant functions".into()));
        }
        let refined = self.combine(0.0, &PiecewiseFunction { pieces: other.pieces.clone() });
        let pieces = refined
            .pieces
            .iter()
            .enumerate()
            .map(|(i, ps)| {
                ps.iter()
                    .map(|p| {
                        let m = 0.5 * (p.from + p.to);
                        let v = op(self.value_on_edge(EdgeId(i), m), other.value_on_edge(EdgeId(i), m));
                        Piece { start: v, end: v, ..*p }
                    })
                    .collect()
            })
            .collect();
        Ok(PiecewiseFunction { pieces })
    }

    /// Density measure with this (nonnegative, piecewise-constant) function as density.
    pub fn to_density(&self, g: &MetricGraph) -> Result<Measure> {
        if !self.is_piecewise_constant() {
            return Err(Error::InvalidParameter("density must be piecewise constant".into()));
        }
        Measure::new(
            g,
            [],
            self.pieces.iter().enumerate().flat_map(|(i, ps)| {
                ps.iter().map(move |p| (EdgeId(i), DensityPiece { from: p.from, to: p.to, value: p.start }))
            }),
        )
    }

    /// Breakpoints strictly inside edges.
    pub fn breakpoints(&self, g: &MetricGraph) -> Vec<GraphPoint> {
        self.pieces
            .iter()
            .enumerate()
            .flat_map(|(i, ps)| ps[..ps.len() - 1].iter().map(move |p| g.point(EdgeId(i), p.to)))
            .collect()
    }
}

/// `∫_0^len |f0 + (f1 - f0) t / len|^p dt` in closed form.
pub(crate) fn integral_abs_pow(f0: f64, f1: f64, len: f64, p: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if f0 * f1 < 0.0 {
        let r = len * f0.abs() / (f0.abs() + f1.abs());
        return integral_abs_pow(f0, 0.0, r, p) + integral_abs_pow(0.0, f1, len - r, p);
    }
    let (a, b) = (f0.abs(), f1.abs());
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return if p == 0.0 { len } else { 0.0 };
    }
    let d = (hi - lo) / hi;
    let q = p + 1.0;
    let shape = if d == 0.0 { 1.0 } else { -(q * (-d).ln_1p()).exp_m1() / (q * d) };
    len * hi.powf(p) * shape
}

/// `(∫_E |f|^p dμ)^{1/p}`, or for `p = ∞` the essential supremum of `|f|` times the
/// density. `weight = None` means arc length.
pub fn lp_norm(
    g: &MetricGraph,
    f: &PiecewiseFunction,
    p: f64,
    set: &ConnectedSubset,
    weight: Option<&Measure>,
) -> Result<f64> {
    let lebesgue;
    let mu = match weight {
        Some(m) => m,
        None => {
            lebesgue = Measure::lebesgue(g);
            &lebesgue
        }
    };
    if p.is_infinite() {
        if mu.has_atoms() {
            return Err(Error::UnboundedWeight);
        }
        let mut best: f64 = 0.0;
        each_overlap(f, mu, set, |fp, dp, s, t| {
            if dp.value > 0.0 {
                best = best.max(fp.at(s).abs().max(fp.at(t).abs()) * dp.value);
            }
        });
        return Ok(best);
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("exponent {p}")));
    }
    let mut s: f64 = mu
        .atoms()
        .iter()
        .filter(|(x, _)| set.contains(x))
        .map(|(x, m)| m * f.value_at(g, x).abs().powf(p))
        .sum();
    each_overlap(f, mu, set, |fp, dp, a, b| {
        if dp.value > 0.0 {
            s += dp.value * integral_abs_pow(fp.at(a), fp.at(b), b - a, p);
        }
    });
    Ok(s.powf(1.0 / p))
}

/// Calls `visit` for every maximal sub-interval of `set` on which both the function
/// piece and the density piece are fixed.
fn each_overlap(
    f: &PiecewiseFunction,
    mu: &Measure,
    set: &ConnectedSubset,
    mut visit: impl FnMut(&Piece, &DensityPiece, f64, f64),
) {
    for iv in set.intervals() {
        for dp in mu.density(iv.edge) {
            let (lo, hi) = (dp.from.max(iv.lo), dp.to.min(iv.hi));
            if hi <= lo {
                continue;
            }
            for fp in f.pieces(iv.edge) {
                let (a, b) = (fp.from.max(lo), fp.to.min(hi));
                if b > a {
                    visit(fp, dp, a, b);
                }
            }
        }
    }
}

/// `‖u'‖_{L^p(E, a)}` for continuous piecewise-linear `u` and piecewise-constant `a > 0`.
pub fn derivative_norm(
    g: &MetricGraph,
    u: &PiecewiseFunction,
    p: f64,
    a: &PiecewiseFunction,
    set: &ConnectedSubset,
) -> Result<f64> {
    u.check_continuous(g)?;
    lp_norm(g, &u.derivative(), p, set, Some(&a.to_density(g)?))
}
