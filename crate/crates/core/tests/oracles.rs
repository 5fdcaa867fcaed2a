//! Hand-computed reference values for each module, checked through the public API.

use metgraph::approx::{approximate_uniform, build_lp_operator, lp_error, sharpness_star, sup_error, SharpnessMode, StepFunction};
use metgraph::functional::canonical_split;
use metgraph::measure::{derivative_norm, lp_norm, DensityPiece};
use metgraph::partition::{cut_cycles, lemma_split, partition, verify_partition};
use metgraph::subset::components_of_complement;
use metgraph::{
    ConnectedSubset, EdgeId, Error, Functional, GraphPoint, Measure, MetricGraph, Partition, PiecewiseFunction,
    SetFunction, VertexId,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn seg() -> MetricGraph {
    MetricGraph::segment(1.0).unwrap()
}

fn triangle() -> MetricGraph {
    MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]).unwrap()
}

#[test]
fn graph_core() {
    let g = seg();
    assert_eq!(g.total_length(), 1.0);
    assert_eq!(g.boundary().len(), 2);

    let star = MetricGraph::star(3).unwrap();
    assert_eq!(star.total_length(), 3.0);
    assert_eq!(star.degree(VertexId(0)), 3);
    assert_eq!(star.boundary(), vec![VertexId(1), VertexId(2), VertexId(3)]);
    assert!(star.is_tree());

    let tri = triangle();
    assert!(tri.boundary().is_empty());
    assert!(!tri.is_tree());
    assert_eq!(tri.find_noncycle_free_edge(), Some(EdgeId(0)));

    let d = g.distance(&g.point(EdgeId(0), 0.2), &g.point(EdgeId(0), 0.9)).unwrap();
    assert!(close(d, 0.7, 1e-15));
    let d = star.distance(&star.point(EdgeId(0), 0.5), &star.point(EdgeId(1), 0.5)).unwrap();
    assert!(close(d, 1.0, 1e-15));
    let d = tri.distance(&tri.point(EdgeId(0), 0.5), &GraphPoint::Vertex(VertexId(2))).unwrap();
    assert!(close(d, 1.5, 1e-15));

    let pendant = MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0), ("c", "d", 1.0)]).unwrap();
    let e = pendant.find_noncycle_free_edge().unwrap();
    assert_ne!(e, EdgeId(3));

    let half_open = ConnectedSubset::interval(&g, EdgeId(0), 0.0, 0.75).without(&g.point(EdgeId(0), 0.75));
    assert_eq!(half_open.length(), 0.75);
    let o = GraphPoint::Vertex(VertexId(0));
    let minus_edge = ConnectedSubset::edge(&star, EdgeId(1)).union(&star, &ConnectedSubset::edge(&star, EdgeId(2)));
    assert_eq!(minus_edge.length(), 2.0);
    assert!(minus_edge.contains(&o));

    let comps = components_of_complement(&g, &ConnectedSubset::interval(&g, EdgeId(0), 0.25, 0.5));
    assert_eq!(comps.len(), 2);
    assert!(close(comps.iter().map(ConnectedSubset::length).sum(), 0.75, 1e-15));
    let comps = components_of_complement(&star, &ConnectedSubset::point(&star, o));
    assert_eq!(comps.len(), 3);
    assert!(comps.iter().all(|c| c.length() == 1.0 && !c.contains(&o)));
    let comps = components_of_complement(&tri, &ConnectedSubset::edge(&tri, EdgeId(0)));
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0].length(), 2.0);
}

#[test]
fn measures_and_norms() {
    let g = seg();
    let whole = ConnectedSubset::whole(&g);
    assert_eq!(Measure::lebesgue(&g).measure_of(&ConnectedSubset::interval(&g, EdgeId(0), 0.0, 0.5)), 0.5);

    let star = MetricGraph::star(3).unwrap();
    let v1 = GraphPoint::Vertex(VertexId(1));
    let delta = Measure::new(&star, [(v1, 1.0)], std::iter::empty()).unwrap();
    let e1 = ConnectedSubset::edge(&star, EdgeId(0));
    assert_eq!(delta.measure_of(&e1), 1.0);
    assert_eq!(delta.measure_of(&e1.without(&v1)), 0.0);

    let mixed = Measure::new(
        &g,
        [(g.point(EdgeId(0), 0.25), 0.5)],
        [(EdgeId(0), DensityPiece { from: 0.0, to: 1.0, value: 2.0 })],
    )
    .unwrap();
    let e = ConnectedSubset::interval(&g, EdgeId(0), 0.0, 0.25).without(&g.point(EdgeId(0), 0.25));
    assert!(close(mixed.measure_of(&e), 0.5, 1e-15));

    let one = PiecewiseFunction::constant(&g, 1.0);
    let x = PiecewiseFunction::from_vertex_values(&g, &[0.0, 1.0]).unwrap();
    assert!(close(lp_norm(&g, &one, 2.0, &whole, None).unwrap(), 1.0, 1e-15));
    assert!(close(lp_norm(&g, &x, 2.0, &whole, None).unwrap(), (1.0f64 / 3.0).sqrt(), 1e-14));
    assert!(close(lp_norm(&g, &x, 3.0, &whole, None).unwrap(), 0.25f64.powf(1.0 / 3.0), 1e-14));

    assert!(close(derivative_norm(&g, &x, 2.0, &one, &whole).unwrap(), 1.0, 1e-14));
    let four = PiecewiseFunction::constant(&g, 4.0);
    assert!(close(derivative_norm(&g, &x, 2.0, &four, &whole).unwrap(), 2.0, 1e-14));
    let rho = PiecewiseFunction::from_vertex_values(&star, &[0.0, 1.0, 1.0, 1.0]).unwrap();
    let one_star = PiecewiseFunction::constant(&star, 1.0);
    let d = derivative_norm(&star, &rho, f64::INFINITY, &one_star, &ConnectedSubset::whole(&star)).unwrap();
    assert!(close(d, 1.0, 1e-15));
}

#[test]
fn functionals() {
    let g = seg();
    let leb = Measure::lebesgue(&g);
    let iv = |a: f64, b: f64| ConnectedSubset::interval(&g, EdgeId(0), a, b);

    let prod = Functional::product(&g, leb.clone(), leb.clone(), 0.5).unwrap();
    assert!(close(prod.eval(&iv(0.0, 0.4)), 0.4, 1e-15));

    let star = MetricGraph::star(3).unwrap();
    let tips = Measure::new(&star, (1..=3).map(|k| (GraphPoint::Vertex(VertexId(k)), 1.0)), std::iter::empty()).unwrap();
    let p = Functional::product(&star, Measure::lebesgue(&star), tips.clone(), 0.5).unwrap();
    assert!(close(p.total(&star), 3.0, 1e-14));
    assert!(matches!(Functional::product(&star, tips, Measure::lebesgue(&star), 0.5), Err(Error::AtomicFirstMeasure)));

    let four = Measure::uniform(&g, 4.0);
    let p = Functional::product(&g, leb.clone(), four, 0.5).unwrap();
    assert!(close(p.eval(&iv(0.0, 0.5)), 1.0, 1e-15));

    let one = PiecewiseFunction::constant(&g, 1.0);
    let x = PiecewiseFunction::from_vertex_values(&g, &[0.0, 1.0]).unwrap();
    let phi_u = Functional::phi_u(&g, &x, &one, 2.0).unwrap();
    let phi_mu = Functional::phi_mu(&g, &one, 2.0, leb.clone()).unwrap();
    let phi_theta = Functional::phi_theta(&g, 0.75, 2.0, leb.clone()).unwrap();
    for t in [0.1, 0.37, 0.8, 1.0] {
        assert!(close(phi_u.eval(&iv(0.0, t)), t, 1e-14));
        assert!(close(phi_mu.eval(&iv(0.0, t)), t, 1e-14));
        assert!(close(phi_theta.eval(&iv(0.0, t)), t, 1e-14));
    }
    let zero = PiecewiseFunction::constant(&g, 0.0);
    assert!(matches!(Functional::phi_mu(&g, &zero, 2.0, leb), Err(Error::WeightNotIntegrable(_))));

    let split = canonical_split(&g, &ConnectedSubset::whole(&g), &g.point(EdgeId(0), 0.5)).unwrap();
    assert_eq!(split.branches.len(), 2);
    assert!(split.branches.iter().all(|b| close(b.length(), 0.5, 1e-15)));
    let o = GraphPoint::Vertex(VertexId(0));
    let split = canonical_split(&star, &ConnectedSubset::whole(&star), &o).unwrap();
    assert_eq!(split.branches.len(), 3);
    assert!(split.branches.iter().all(|b| b.length() == 1.0));
    let split = canonical_split(&star, &ConnectedSubset::whole(&star), &star.point(EdgeId(0), 0.5)).unwrap();
    let mut lens: Vec<f64> = split.branches.iter().map(ConnectedSubset::length).collect();
    lens.sort_by(f64::total_cmp);
    assert_eq!(lens, vec![0.5, 2.5]);

    let length = Functional::length(&g);
    let t = metgraph::functional::tilde_phi(&g, &length, &ConnectedSubset::whole(&g)).unwrap();
    assert!(close(t.value, 0.5, 1e-10) && t.minimizer.approx_eq(&g.point(EdgeId(0), 0.5)));
    let len_star = Functional::length(&star);
    let t = metgraph::functional::tilde_phi(&star, &len_star, &ConnectedSubset::whole(&star)).unwrap();
    assert!(close(t.value, 1.0, 1e-12) && t.minimizer == o);
    let single = ConnectedSubset::point(&g, g.point(EdgeId(0), 0.3));
    let t = metgraph::functional::tilde_phi(&g, &length, &single).unwrap();
    assert_eq!(t.value, 0.0);
}

#[test]
fn cutting_and_lemma() {
    let star = MetricGraph::star(3).unwrap();
    assert!(cut_cycles(&star).split_pairs.is_empty());
    let tri = triangle();
    let c = cut_cycles(&tri);
    assert!(c.tree.is_tree());
    assert_eq!((c.tree.edge_count(), c.tree.vertex_count(), c.split_pairs.len()), (4, 5, 1));
    assert!(close(c.tree.total_length(), 3.0, 1e-15));
    let lp = MetricGraph::from_edges(&[("a", "a", 1.0)]).unwrap();
    let c = cut_cycles(&lp);
    assert_eq!((c.tree.edge_count(), c.split_pairs.len()), (2, 1));

    let g = seg();
    let phi = Functional::length(&g);
    let s = lemma_split(&g, &phi, 0.25).unwrap();
    assert!(s.x_star.approx_eq(&g.point(EdgeId(0), 0.75)));
    assert!(close(s.t.length(), 0.25, 1e-12) && close(s.t_prime_minus().length(), 0.75, 1e-12));

    let phi = Functional::length(&star);
    let s = lemma_split(&star, &phi, 1.0).unwrap();
    assert_eq!(s.x_star, GraphPoint::Vertex(VertexId(0)));
    assert_eq!(s.t.length(), 2.0);
    assert!(!s.t_prime_minus().contains(&GraphPoint::Vertex(VertexId(0))));

    let delta = Measure::new(&g, [(g.point(EdgeId(0), 0.5), 1.0)], std::iter::empty()).unwrap();
    let phi = Functional::product(&g, Measure::lebesgue(&g), delta, 0.5).unwrap();
    let eps = 0.5 * phi.total(&g);
    let s = lemma_split(&g, &phi, eps).unwrap();
    assert!(s.x_star.approx_eq(&g.point(EdgeId(0), 0.5)));
    assert!(phi.eval(&s.t) >= eps);
    assert!(phi.eval(&s.t.without(&s.x_star)) <= eps);
}

#[test]
fn partitions() {
    let g = seg();
    let phi = Functional::length(&g);
    let out = partition(&g, &phi, 3).unwrap();
    let report = out.inspect(&g, &phi, 1e-8).unwrap();
    let got: Vec<(f64, f64, f64)> = out
        .parts
        .parts
        .iter()
        .zip(&report.parts)
        .map(|(p, c)| (p.intervals()[0].lo, p.intervals()[0].hi, c.tilde.value))
        .collect();
    for (g, w) in got.iter().zip([(0.0, 0.5, 0.25), (0.5, 0.75, 0.125), (0.75, 1.0, 0.125)]) {
        assert!(close(g.0, w.0, 1e-9) && close(g.1, w.1, 1e-9) && close(g.2, w.2, 1e-9), "{got:?}");
    }

    let star = MetricGraph::star(3).unwrap();
    let phi = Functional::length(&star);
    let out = partition(&star, &phi, 2).unwrap();
    let report = out.inspect(&star, &phi, 1e-8).unwrap();
    let mut tildes: Vec<f64> = report.parts.iter().map(|p| p.tilde.value).collect();
    tildes.sort_by(f64::total_cmp);
    assert!(close(tildes[0], 0.5, 1e-9) && close(tildes[1], 1.0, 1e-9));

    let tri = triangle();
    let phi = Functional::length(&tri);
    let out = partition(&tri, &phi, 1).unwrap();
    assert_eq!(out.parts.len(), 1);
    assert!(out.inspect(&tri, &phi, 1e-8).unwrap().max_tilde() <= phi.total(&tri) / 2.0 * (1.0 + 1e-8));

    let phi = Functional::length(&g);
    let bad = Partition::new(vec![
        ConnectedSubset::interval(&g, EdgeId(0), 0.0, 0.9).without(&g.point(EdgeId(0), 0.9)),
        ConnectedSubset::interval(&g, EdgeId(0), 0.9, 1.0),
    ]);
    assert!(matches!(verify_partition(&g, &phi, &bad, 3, 1e-8), Err(Error::VerificationFailed(_))));
    let whole = Partition::new(vec![ConnectedSubset::whole(&g)]);
    assert!(verify_partition(&g, &phi, &whole, 1, 1e-8).is_ok());
}

#[test]
fn approximation() {
    let g = seg();
    let one = PiecewiseFunction::constant(&g, 1.0);
    let x = PiecewiseFunction::from_vertex_values(&g, &[0.0, 1.0]).unwrap();
    let r = approximate_uniform(&g, &x, f64::INFINITY, &one, 1).unwrap();
    assert!(close(sup_error(&g, &x, &r.step), 0.5, 1e-12));
    assert!(close(r.step.values[0], 0.5, 1e-12));

    let star = MetricGraph::star(3).unwrap();
    let rho = PiecewiseFunction::from_vertex_values(&star, &[0.0, 1.0, 1.0, 1.0]).unwrap();
    let r = approximate_uniform(&star, &rho, f64::INFINITY, &PiecewiseFunction::constant(&star, 1.0), 2).unwrap();
    assert!(close(sup_error(&star, &rho, &r.step), 1.0, 1e-9));
    assert!(close(r.bound, 1.0, 1e-12));

    let c = PiecewiseFunction::constant(&g, 2.5);
    for p in [1.0, 2.0, f64::INFINITY] {
        let r = approximate_uniform(&g, &c, p, &one, 3).unwrap();
        assert_eq!(sup_error(&g, &c, &r.step), 0.0);
    }

    let op = build_lp_operator(&g, &Measure::lebesgue(&g), &one, 2.0, 3).unwrap();
    let cuts: Vec<f64> = op.outcome.parts.parts.iter().map(|p| p.intervals()[0].hi).collect();
    assert!(close(cuts[0], 0.5, 1e-9) && close(cuts[1], 0.75, 1e-9));

    let half = StepFunction::constant(&g, 0.5);
    assert!(close(sup_error(&g, &x, &half), 0.5, 1e-15));
    assert!(close(lp_error(&g, &x, &half, &Measure::lebesgue(&g), 2.0).unwrap(), (1.0f64 / 12.0).sqrt(), 1e-14));
    let m = g.point(EdgeId(0), 0.5);
    let two = StepFunction {
        parts: Partition::new(vec![
            ConnectedSubset::interval(&g, EdgeId(0), 0.0, 0.5).without(&m),
            ConnectedSubset::interval(&g, EdgeId(0), 0.5, 1.0),
        ]),
        values: vec![0.0, 0.75],
    };
    let delta = Measure::new(&g, [(m, 1.0)], std::iter::empty()).unwrap();
    assert!(close(lp_error(&g, &x, &two, &delta, 1.0).unwrap(), 0.25, 1e-15));

    let r = sharpness_star(3, 2.0, SharpnessMode::Uniform).unwrap();
    assert!(close(r.achieved, 1.0, 1e-9));
    let r = sharpness_star(2, 2.0, SharpnessMode::Uniform).unwrap();
    assert!(close(r.achieved, 1.0, 1e-9));
    let r = sharpness_star(4, 2.0, SharpnessMode::Lp).unwrap();
    assert!(close(r.achieved, 1.0, 1e-6));
}
