//! Seeded random instances for property sweeps. Every generator is a pure function of
//! the RNG state, so a sweep is reproducible from its seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

use crate::error::Result;
use crate::functional::Functional;
use crate::graph::{EdgeId, EdgeSpec, GraphPoint, GraphSpec, MetricGraph, VertexId};
use crate::measure::{DensityPiece, Measure, Piece, PiecewiseFunction};

pub type Rng8 = ChaCha8Rng;

/// RNG for instance `index` of a sweep started from `seed`.
pub fn instance_rng(seed: u64, index: u64) -> Rng8 {
    let mut rng = Rng8::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn length(rng: &mut Rng8) -> f64 {
    rng.gen_range(0.25..2.0)
}

fn spec(vertices: usize, edges: Vec<(usize, usize, f64)>) -> GraphSpec {
    GraphSpec {
        vertices: (0..vertices).map(|i| format!("v{i}")).collect(),
        edges: edges
            .into_iter()
            .enumerate()
            .map(|(k, (a, b, len))| EdgeSpec { id: format!("e{k}"), from: format!("v{a}"), to: format!("v{b}"), length: len })
            .collect(),
    }
}

/// Random spanning tree on `vertices` vertices.
fn tree_edges(rng: &mut Rng8, vertices: usize) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..vertices).collect();
    order[1..].shuffle(rng);
    (1..vertices)
        .map(|i| {
            let parent = order[rng.gen_range(0..i)];
            let (a, b) = if rng.gen_bool(0.5) { (parent, order[i]) } else { (order[i], parent) };
            (a, b, length(rng))
        })
        .collect()
}

/// Connected graph with at most `max_edges` edges; cycles, multi-edges and loops occur.
pub fn graph(rng: &mut Rng8, max_edges: usize) -> Result<MetricGraph> {
    let max_edges = max_edges.max(1);
    let vertices = rng.gen_range(1..=max_edges.min(8));
    let mut edges = tree_edges(rng, vertices);
    let extra_max = max_edges - edges.len();
    let extra = if edges.is_empty() { rng.gen_range(1..=extra_max.clamp(1, 3)) } else { rng.gen_range(0..=extra_max.min(4)) };
    for _ in 0..extra {
        let a = rng.gen_range(0..vertices);
        let b = if rng.gen_bool(0.25) { a } else { rng.gen_range(0..vertices) };
        edges.push((a, b, length(rng)));
    }
    MetricGraph::from_spec(&spec(vertices, edges))
}

/// Tree with exactly `edges` edges.
pub fn tree(rng: &mut Rng8, edges: usize) -> Result<MetricGraph> {
    MetricGraph::from_spec(&spec(edges + 1, tree_edges(rng, edges + 1)))
}

/// Sorted cut offsets splitting an edge of length `len` into 1 to `max_pieces` pieces.
fn cuts(rng: &mut Rng8, len: f64, max_pieces: usize) -> Vec<f64> {
    let inner = rng.gen_range(0..max_pieces);
    let mut c: Vec<f64> = (0..inner).map(|_| rng.gen_range(0.1..0.9) * len).collect();
    c.sort_by(f64::total_cmp);
    c.dedup_by(|a, b| (*a - *b).abs() < 1e-3 * len);
    let mut out = vec![0.0];
    out.extend(c);
    out.push(len);
    out
}

fn random_point(rng: &mut Rng8, g: &MetricGraph) -> GraphPoint {
    if rng.gen_bool(0.4) {
        GraphPoint::Vertex(VertexId(rng.gen_range(0..g.vertex_count())))
    } else {
        let e = EdgeId(rng.gen_range(0..g.edge_count()));
        g.point(e, rng.gen_range(0.05..0.95) * g.edge(e).length)
    }
}

/// Finite measure with a piecewise-constant density (some pieces zero) and up to
/// `max_atoms` atoms.
pub fn measure(rng: &mut Rng8, g: &MetricGraph, max_atoms: usize) -> Result<Measure> {
    let atoms: Vec<(GraphPoint, f64)> =
        (0..rng.gen_range(0..=max_atoms)).map(|_| (random_point(rng, g), rng.gen_range(0.1..1.0))).collect();
    let mut density = Vec::new();
    for e in g.edge_ids() {
        let c = cuts(rng, g.edge(e).length, 3);
        for w in c.windows(2) {
            let value = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.1..2.0) };
            density.push((e, DensityPiece { from: w[0], to: w[1], value }));
        }
    }
    Measure::new(g, atoms, density)
}

/// Continuous piecewise-linear function with random vertex values and interior breaks.
pub fn piecewise_linear(rng: &mut Rng8, g: &MetricGraph) -> Result<PiecewiseFunction> {
    let at_vertex: Vec<f64> = (0..g.vertex_count()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let pieces = g
        .edge_ids()
        .map(|e| {
            let edge = g.edge(e);
            let c = cuts(rng, edge.length, 3);
            let mut values: Vec<f64> = c.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
            values[0] = at_vertex[edge.from.0];
            *values.last_mut().unwrap() = at_vertex[edge.to.0];
            c.windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| Piece { from: t[0], to: t[1], start: v[0], end: v[1] })
                .collect()
        })
        .collect();
    PiecewiseFunction::new(g, pieces)
}

/// Piecewise-constant function with values in `lo..hi`.
pub fn piecewise_constant(rng: &mut Rng8, g: &MetricGraph, lo: f64, hi: f64) -> Result<PiecewiseFunction> {
    let pieces = g
        .edge_ids()
        .map(|e| {
            let c = cuts(rng, g.edge(e).length, 3);
            c.windows(2)
                .map(|t| {
                    let v = rng.gen_range(lo..hi);
                    Piece { from: t[0], to: t[1], start: v, end: v }
                })
                .collect()
        })
        .collect();
    PiecewiseFunction::new(g, pieces)
}

/// One of: length, a product with an atomic second factor, `Φ_μ`, or `Φ_θ` with
/// `θ ∈ {0.6, 0.75}`.
pub fn functional(rng: &mut Rng8, g: &MetricGraph) -> Result<Functional> {
    match rng.gen_range(0..4) {
        0 => Ok(Functional::length(g)),
        1 => {
            let mu1 = measure(rng, g, 0)?;
            let mu2 = measure(rng, g, 3)?;
            let alpha = rng.gen_range(0.2..0.8);
            Functional::product(g, mu1, mu2, alpha)
        }
        2 => {
            let a = piecewise_constant(rng, g, 0.2, 3.0)?;
            let p = *[1.0, 2.0, 3.0].choose(rng).unwrap();
            Functional::phi_mu(g, &a, p, measure(rng, g, 3)?)
        }
        _ => {
            let theta = *[0.6, 0.75].choose(rng).unwrap();
            let p = *[2.0, 3.0].choose(rng).unwrap();
            Functional::phi_theta(g, theta, p, measure(rng, g, 3)?)
        }
    }
}
