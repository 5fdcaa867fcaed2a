//! Hardy-type operators `(H f)(x) = v(x) ∫_{⟨o,x⟩} f w` on rooted metric trees:
//! an L²-faithful discretization, its singular values, and checks of the `1/n`
//! bound and of the asymptotics of `n·s_n`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MetricGraph, VertexId};
use crate::measure::{Piece, PiecewiseFunction};
use crate::subset::ConnectedSubset;
use crate::svd::{top_singular_values, Matrix};

/// A metric tree with a root vertex and piecewise-constant weights `v`, `w`.
#[derive(Clone, Debug)]
pub struct RootedTree {
    pub graph: MetricGraph,
    pub root: VertexId,
    pub v: PiecewiseFunction,
    pub w: PiecewiseFunction,
}

impl RootedTree {
    pub fn new(graph: MetricGraph, root: VertexId, v: PiecewiseFunction, w: PiecewiseFunction) -> Result<Self> {
        if !graph.is_tree() {
            return Err(Error::NotATree);
        }
        if root.0 >= graph.vertex_count() {
            return Err(Error::UnknownVertex(format!("#{}", root.0)));
        }
        if !v.is_piecewise_constant() || !w.is_piecewise_constant() {
            return Err(Error::InvalidParameter("v and w must be piecewise constant".into()));
        }
        Ok(RootedTree { graph, root, v, w })
    }

    /// `v ≡ w ≡ 1`.
    pub fn unweighted(graph: MetricGraph, root: VertexId) -> Result<Self> {
        let one = PiecewiseFunction::constant(&graph, 1.0);
        Self::new(graph, root, one.clone(), one)
    }

    /// For every edge, whether its `from` end is the one nearer the root, and the
    /// edges on the path from the root to that end.
    fn orientation(&self) -> (Vec<bool>, Vec<Vec<EdgeId>>) {
        let g = &self.graph;
        let mut from_is_parent = vec![false; g.edge_count()];
        let mut ancestors = vec![Vec::new(); g.edge_count()];
        let mut path_to: Vec<Option<Vec<EdgeId>>> = vec![None; g.vertex_count()];
        path_to[self.root.0] = Some(Vec::new());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            let here = path_to[u.0].clone().unwrap_or_default();
            for &e in g.incident(u) {
                let x = g.edge(e).other(u);
                if path_to[x.0].is_some() {
                    continue;
                }
                from_is_parent[e.0] = g.edge(e).from == u;
                ancestors[e.0] = here.clone();
                let mut next = here.clone();
                next.push(e);
                path_to[x.0] = Some(next);
                stack.push(x);
            }
        }
        (from_is_parent, ancestors)
    }

    pub fn norm_v(&self) -> Result<f64> {
        crate::measure::lp_norm(&self.graph, &self.v, 2.0, &ConnectedSubset::whole(&self.graph), None)
    }

    pub fn norm_w(&self) -> Result<f64> {
        crate::measure::lp_norm(&self.graph, &self.w, 2.0, &ConnectedSubset::whole(&self.graph), None)
    }

    /// `∫ |v w| dx`, which equals `∫ w_a V^{1/2}` for `V = v²`, `a = w^{-2}`.
    pub fn weight_integral(&self) -> Result<f64> {
        let vw = self.v.zip_constant(&self.w, |a, b| (a * b).abs())?;
        Ok(vw.to_density(&self.graph)?.total(&self.graph))
    }
}

/// One cell of the uniform mesh; `index` counts from the end nearer the root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshCell {
    pub edge: EdgeId,
    pub index: usize,
    /// Offset of the centre on the edge.
    pub center: f64,
    pub h: f64,
}

/// Matrix acting on `(f_j √h_j)` whose output is `((H f)(x_i) √h_i)`, so its singular
/// values approximate those of `H` on `L²`.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub matrix: Matrix,
    pub cells: Vec<MeshCell>,
}

pub fn discretize(t: &RootedTree, cells_per_unit: usize) -> Result<DiscreteOperator> {
    let g = &t.graph;
    let (from_is_parent, ancestors) = t.orientation();
    let mut cells = Vec::new();
    let mut first_cell = vec![0; g.edge_count()];
    for e in g.edge_ids() {
        let len = g.edge(e).length;
        let count = (cells_per_unit as f64 * len).ceil() as usize;
        if count < 4 {
            return Err(Error::MeshTooCoarse { edge: g.edge_name(e).to_string(), cells: count });
        }
        let h = len / count as f64;
        first_cell[e.0] = cells.len();
        for k in 0..count {
            let d = (k as f64 + 0.5) * h;
            let center = if from_is_parent[e.0] { d } else { len - d };
            cells.push(MeshCell { edge: e, index: k, center, h });
        }
    }
    let vs: Vec<f64> = cells.iter().map(|c| t.v.value_on_edge(c.edge, c.center)).collect();
    let ws: Vec<f64> = cells.iter().map(|c| t.w.value_on_edge(c.edge, c.center)).collect();
    let n = cells.len();
    let mut m = Matrix::zeros(n, n);
    for (i, ci) in cells.iter().enumerate() {
        let upstream = ancestors[ci.edge.0]
            .iter()
            .flat_map(|&f| {
                let start = first_cell[f.0];
                start..start + cells.iter().skip(start).take_while(|c| c.edge == f).count()
            })
            .chain(first_cell[ci.edge.0]..i);
        for j in upstream {
            m.set(i, j, (ci.h * cells[j].h).sqrt() * vs[i] * ws[j]);
        }
        m.set(i, i, 0.5 * ci.h * vs[i] * ws[i]);
    }
    Ok(DiscreteOperator { matrix: m, cells })
}

impl DiscreteOperator {
    /// The `count` largest singular values, descending.
    pub fn singular_values(&self, count: usize) -> Result<Vec<f64>> {
        top_singular_values(&self.matrix, count, 0x5eed)
    }

    /// `‖H f‖_2` for `f` constant on each cell.
    pub fn apply_norm(&self, f: &[f64]) -> f64 {
        let scaled: Vec<f64> = f.iter().zip(&self.cells).map(|(x, c)| x * c.h.sqrt()).collect();
        self.matrix.mul_vec(&scaled).iter().map(|y| y * y).sum::<f64>().sqrt()
    }
}

/// `Q_w f(x) = ∫_{⟨o,x⟩} f w` for `f` constant on each mesh cell, with `w` taken at the
/// cell centres; the result is continuous and linear on each cell.
pub fn primitive(t: &RootedTree, op: &DiscreteOperator, f: &[f64]) -> Result<PiecewiseFunction> {
    let g = &t.graph;
    let (from_is_parent, ancestors) = t.orientation();
    let mut at_end = vec![0.0; g.edge_count()];
    let mut pieces: Vec<Vec<Piece>> = vec![Vec::new(); g.edge_count()];
    let mut order: Vec<EdgeId> = g.edge_ids().collect();
    order.sort_by_key(|e| ancestors[e.0].len());
    for e in order {
        let start = ancestors[e.0].last().map_or(0.0, |p| at_end[p.0]);
        let mut acc = start;
        let mut ps = Vec::new();
        for (j, c) in op.cells.iter().enumerate().filter(|(_, c)| c.edge == e) {
            let next = acc + f[j] * t.w.value_on_edge(e, c.center) * c.h;
            let d0 = c.index as f64 * c.h;
            ps.push((d0, d0 + c.h, acc, next));
            acc = next;
        }
        at_end[e.0] = acc;
        let len = g.edge(e).length;
        pieces[e.0] = if from_is_parent[e.0] {
            ps.iter().map(|&(a, b, s, t)| Piece { from: a, to: b, start: s, end: t }).collect()
        } else {
            ps.iter()
                .rev()
                .map(|&(a, b, s, t)| Piece { from: len - b, to: len - a, start: t, end: s })
                .collect()
        };
    }
    PiecewiseFunction::new(g, pieces)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub n: usize,
    pub s_n: f64,
    pub s_n_fine: f64,
    /// Estimated discretization error, `|s_n(h) − s_n(h/2)|`.
    pub slack: f64,
    /// `‖v‖_2 ‖w‖_2 / n`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub norm_v: f64,
    pub norm_w: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Checks `s_n ≤ ‖v‖_2 ‖w‖_2 / n` for `n ≤ n_max` at two meshes.
pub fn check_bound(t: &RootedTree, n_max: usize, cells_per_unit: usize) -> Result<BoundReport> {
    let coarse = discretize(t, cells_per_unit)?.singular_values(n_max)?;
    let fine = discretize(t, 2 * cells_per_unit)?.singular_values(n_max)?;
    let (norm_v, norm_w) = (t.norm_v()?, t.norm_w()?);
    let rows = (1..=n_max.min(coarse.len()).min(fine.len()))
        .map(|n| {
            let (s, sf) = (coarse[n - 1], fine[n - 1]);
            let slack = (s - sf).abs();
            let bound = norm_v * norm_w / n as f64;
            BoundRow { n, s_n: s, s_n_fine: sf, slack, bound, holds: sf <= bound + slack }
        })
        .collect();
    Ok(BoundReport { norm_v, norm_w, rows })
}

/// Least-squares fit of `L + c/n + d/n²`; returns `L`.
pub fn extrapolate_limit(ns: &[usize], values: &[f64]) -> f64 {
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for (&n, &y) in ns.iter().zip(values) {
        let x = 1.0 / n as f64;
        let basis = [1.0, x, x * x];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += basis[r] * basis[c];
            }
            b[r] += basis[r] * y;
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 normal equations.
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x[0]
}

/// `n·s_n` over a range and the extrapolated `lim n·s_n`.
///
/// The limit is read off the cumulative sums `S(n) = Σ_{k≤n} 1/s_k ≈ n²/(2L)`: fitting
/// `S(n)/n²` in powers of `1/n` keeps periodic clustering of the spectrum (as on a
/// symmetric star) out of the leading coefficient.
pub fn scaled_singular_values(
    t: &RootedTree,
    ns: RangeInclusive<usize>,
    cells_per_unit: usize,
) -> Result<(Vec<usize>, Vec<f64>, f64)> {
    let op = discretize(t, cells_per_unit)?;
    let s = op.singular_values(*ns.end())?;
    if s.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidParameter("weights must be strictly positive".into()));
    }
    let ns: Vec<usize> = ns.filter(|&n| n >= 1 && n <= s.len()).collect();
    let scaled: Vec<f64> = ns.iter().map(|&n| n as f64 * s[n - 1]).collect();
    let mut cumulative = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    for x in &s {
        acc += 1.0 / x;
        cumulative.push(acc);
    }
    let normalized: Vec<f64> = ns.iter().map(|&n| cumulative[n - 1] / (n * n) as f64).collect();
    let limit = 1.0 / (2.0 * extrapolate_limit(&ns, &normalized));
    Ok((ns, scaled, limit))
}

/// `lim n·s_n` for the unweighted operator on the unit interval, computed numerically.
pub fn volterra_constant(ns: RangeInclusive<usize>, cells_per_unit: usize) -> Result<f64> {
    let t = RootedTree::unweighted(MetricGraph::segment(1.0)?, VertexId(0))?;
    Ok(scaled_singular_values(&t, ns, cells_per_unit)?.2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticsReport {
    pub ns: Vec<usize>,
    pub scaled: Vec<f64>,
    pub limit: f64,
    pub alpha: f64,
    pub weight_integral: f64,
    pub predicted: f64,
    pub rel_error: f64,
}

impl AsymptoticsReport {
    pub fn passed(&self, rel_tol: f64) -> bool {
        self.rel_error <= rel_tol
    }
}

/// Compares the extrapolated `lim n·s_n` with `alpha · ∫ |v w|`. `alpha` is the interval
/// constant, normally obtained from [`volterra_constant`].
pub fn check_asymptotics(
    t: &RootedTree,
    ns: RangeInclusive<usize>,
    cells_per_unit: usize,
    alpha: f64,
) -> Result<AsymptoticsReport> {
    let (ns, scaled, limit) = scaled_singular_values(t, ns, cells_per_unit)?;
    let weight_integral = t.weight_integral()?;
    let predicted = alpha * weight_integral;
    Ok(AsymptoticsReport {
        ns,
        scaled,
        limit,
        alpha,
        weight_integral,
        predicted,
        rel_error: (limit - predicted).abs() / predicted,
    })
}
