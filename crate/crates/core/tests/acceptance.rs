//! Acceptance suite. Runs without the libtest harness so that every criterion prints
//! exactly one PASS/FAIL line; the process fails if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use metgraph::approx::{
    approximate_uniform, build_lp_operator, lp_bound_factor, lp_error, sharpness_star, sup_error, SharpnessMode,
};
use metgraph::hardy::{check_asymptotics, check_bound, discretize, volterra_constant, RootedTree};
use metgraph::measure::derivative_norm;
use metgraph::partition::partition;
use metgraph::random::{self, instance_rng};
use metgraph::{ConnectedSubset, EdgeId, Functional, GraphPoint, MetricGraph, PiecewiseFunction, VertexId};
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = MetricGraph::segment(1.0).map_err(|e| e.to_string())?;
    let phi = Functional::length(&g);
    let out = partition(&g, &phi, 3).map_err(|e| e.to_string())?;
    let report = out.inspect(&g, &phi, 1e-8).map_err(|e| e.to_string())?;
    ensure(out.parts.len() == 3, || format!("{} parts", out.parts.len()))?;
    let want = [(0.0, 0.5, 0.25, true), (0.5, 0.75, 0.125, true), (0.75, 1.0, 0.125, false)];
    for (j, (part, (lo, hi, tilde, open_right))) in out.parts.parts.iter().zip(want).enumerate() {
        let iv = part.intervals();
        ensure(iv.len() == 1, || format!("part {j} has {} intervals", iv.len()))?;
        ensure((iv[0].lo - lo).abs() <= 1e-9 && (iv[0].hi - hi).abs() <= 1e-9, || {
            format!("part {j} is [{}, {}], expected [{lo}, {hi}]", iv[0].lo, iv[0].hi)
        })?;
        let right = if hi == 1.0 { GraphPoint::Vertex(VertexId(1)) } else { g.point(EdgeId(0), iv[0].hi) };
        ensure(part.contains(&right) != open_right, || format!("part {j}: wrong right endpoint"))?;
        let t = report.parts[j].tilde.value;
        ensure((t - tilde).abs() <= 1e-9, || format!("part {j}: Φ̃ = {t}, expected {tilde}"))?;
    }
    ensure(report.passed(), || report.violations.join("; "))?;
    within_time(start.elapsed(), 1.0)?;
    let t: Vec<String> = report.parts.iter().map(|p| format!("{:.12}", p.tilde.value)).collect();
    Ok(format!("parts [0,1/2) [1/2,3/4) [3/4,1], Φ̃ = ({})", t.join(", ")))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let results: Vec<Result<(usize, bool, String), String>> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(20_240_601, i);
            let g = random::graph(&mut rng, 12).map_err(|e| e.to_string())?;
            let phi = random::functional(&mut rng, &g).map_err(|e| e.to_string())?;
            let cyclic = !g.is_tree();
            for n in 1..=8 {
                let out = partition(&g, &phi, n).map_err(|e| format!("instance {i}, n = {n}: {e}"))?;
                let report = out.inspect(&g, &phi, 1e-8).map_err(|e| format!("instance {i}, n = {n}: {e}"))?;
                ensure(report.passed(), || format!("instance {i}, n = {n}: {}", report.violations.join("; ")))?;
                let covered: f64 = out.parts.parts.iter().map(ConnectedSubset::length).sum();
                let gap = (covered - g.total_length()).abs() / g.total_length();
                ensure(gap <= 1e-12, || format!("instance {i}, n = {n}: Σ|E_j| off by {gap:e}"))?;
            }
            Ok((g.edge_count(), cyclic, phi.kind().name().to_string()))
        })
        .collect();
    let mut kinds = std::collections::BTreeSet::new();
    let (mut cyclic, mut loops_seen, mut max_edges) = (0, 0, 0);
    for (i, r) in results.into_iter().enumerate() {
        let (edges, cyc, kind) = r?;
        max_edges = max_edges.max(edges);
        cyclic += usize::from(cyc);
        kinds.insert(kind);
        let mut rng = instance_rng(20_240_601, i as u64);
        let g = random::graph(&mut rng, 12).map_err(|e| e.to_string())?;
        loops_seen += usize::from(g.edges().iter().any(|e| e.is_loop()));
    }
    ensure(cyclic > 0 && loops_seen > 0, || "sweep produced no cycles or no loops".into())?;
    ensure(kinds.len() == 4, || format!("functional kinds covered: {kinds:?}"))?;
    within_time(start.elapsed(), 60.0)?;
    Ok(format!(
        "200 graphs × n=1..8 ({cyclic} cyclic, {loops_seen} with loops, ≤ {max_edges} edges, kinds {kinds:?})"
    ))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for arms in 2..=6 {
        let r = sharpness_star(arms, 2.0, SharpnessMode::Uniform).map_err(|e| e.to_string())?;
        ensure(r.rel_error <= 1e-8, || format!("N = {arms}: max Φ̃ = {}, bound {}", r.achieved, r.bound))?;
        worst = worst.max(r.rel_error);
    }
    Ok(format!("N = 2..6, max Φ̃ = Φ(Γ_N)/N, worst relative error {worst:.1e}"))
}

const EXPONENTS: [f64; 4] = [1.0, 2.0, 3.0, f64::INFINITY];

fn criterion_4() -> Outcome {
    let checked: Vec<Result<usize, String>> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(4_040, i);
            let g = random::graph(&mut rng, 12).map_err(|e| e.to_string())?;
            let u = random::piecewise_linear(&mut rng, &g).map_err(|e| e.to_string())?;
            let a = random::piecewise_constant(&mut rng, &g, 0.2, 3.0).map_err(|e| e.to_string())?;
            let mut count = 0;
            for p in EXPONENTS {
                for n in 1..=6 {
                    let r = approximate_uniform(&g, &u, p, &a, n).map_err(|e| format!("instance {i}: {e}"))?;
                    let err = sup_error(&g, &u, &r.step);
                    ensure(err <= r.bound * (1.0 + 1e-8), || {
                        format!("instance {i}, p = {p}, n = {n}: error {err} > bound {}", r.bound)
                    })?;
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect();
    let mut total = 0;
    for c in checked {
        total += c?;
    }
    let g = MetricGraph::segment(1.0).map_err(|e| e.to_string())?;
    let x = PiecewiseFunction::from_vertex_values(&g, &[0.0, 1.0]).map_err(|e| e.to_string())?;
    let one = PiecewiseFunction::constant(&g, 1.0);
    let r = approximate_uniform(&g, &x, f64::INFINITY, &one, 1).map_err(|e| e.to_string())?;
    let err = sup_error(&g, &x, &r.step);
    ensure((err - 0.5).abs() <= 1e-12 && (r.bound - 0.5).abs() <= 1e-12, || {
        format!("segment equality case: error {err}, bound {}", r.bound)
    })?;
    Ok(format!("{total} bound checks hold; segment p=∞, n=1 error = {err}"))
}

fn criterion_5() -> Outcome {
    let checked: Vec<Result<usize, String>> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(5_050, i);
            let g = random::graph(&mut rng, 12).map_err(|e| e.to_string())?;
            let u = random::piecewise_linear(&mut rng, &g).map_err(|e| e.to_string())?;
            let a = random::piecewise_constant(&mut rng, &g, 0.2, 3.0).map_err(|e| e.to_string())?;
            let mu = random::measure(&mut rng, &g, 3).map_err(|e| e.to_string())?;
            let whole = ConnectedSubset::whole(&g);
            let mut count = 0;
            for p in EXPONENTS {
                let mu = if p.is_infinite() { mu.without_atoms() } else { mu.clone() };
                let du = derivative_norm(&g, &u, p, &a, &whole).map_err(|e| e.to_string())?;
                for n in 1..=6 {
                    let op = build_lp_operator(&g, &mu, &a, p, n).map_err(|e| format!("instance {i}: {e}"))?;
                    let err = lp_error(&g, &u, &op.apply(&g, &u), &mu, p).map_err(|e| e.to_string())?;
                    let bound = lp_bound_factor(&g, &mu, &a, p, n).map_err(|e| e.to_string())? * du;
                    ensure(err <= bound * (1.0 + 1e-8), || {
                        format!("instance {i}, p = {p}, n = {n}: error {err} > bound {bound}")
                    })?;
                    ensure(op.rank() <= n, || format!("instance {i}: rank {} > {n}", op.rank()))?;
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect();
    let mut total = 0;
    for c in checked {
        total += c?;
    }

    let mut linear_worst: f64 = 0.0;
    for i in 0..50u64 {
        let mut rng = instance_rng(5_151, i);
        let g = random::graph(&mut rng, 12).map_err(|e| e.to_string())?;
        let u = random::piecewise_linear(&mut rng, &g).map_err(|e| e.to_string())?;
        let v = random::piecewise_linear(&mut rng, &g).map_err(|e| e.to_string())?;
        let a = random::piecewise_constant(&mut rng, &g, 0.2, 3.0).map_err(|e| e.to_string())?;
        let mu = random::measure(&mut rng, &g, 3).map_err(|e| e.to_string())?;
        let p = EXPONENTS[(i % 3) as usize];
        let op = build_lp_operator(&g, &mu, &a, p, 1 + (i as usize % 6)).map_err(|e| e.to_string())?;
        let (alpha, beta) = (1.5, -0.75);
        let combo = u.combine(alpha, &v.map_values(|t| beta * t));
        let (pu, pv, pc) = (op.apply(&g, &u), op.apply(&g, &v), op.apply(&g, &combo));
        for j in 0..op.rank() {
            let want = alpha * pu.values[j] + beta * pv.values[j];
            let scale = 1.0 + alpha.abs() * pu.values[j].abs() + beta.abs() * pv.values[j].abs();
            linear_worst = linear_worst.max((pc.values[j] - want).abs() / scale);
        }
        ensure(pc.parts == pu.parts && pu.parts == pv.parts, || format!("pair {i}: operator depends on u"))?;
        let c = PiecewiseFunction::constant(&g, -3.25);
        let pc = op.apply(&g, &c);
        ensure(pc.values.iter().all(|&x| x == -3.25), || format!("pair {i}: constants not reproduced"))?;
        ensure(lp_error(&g, &c, &pc, &mu, p).map_err(|e| e.to_string())? == 0.0, || format!("pair {i}: error on a constant"))?;
    }
    ensure(linear_worst <= 4.0 * f64::EPSILON, || format!("linearity defect {linear_worst:e}"))?;
    Ok(format!("{total} bound checks hold; 50 pairs linear (defect {linear_worst:.1e}) and reproduce constants exactly"))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for arms in 2..=5 {
        let r = sharpness_star(arms, 2.0, SharpnessMode::Lp).map_err(|e| e.to_string())?;
        ensure(r.rel_error <= 1e-6 && (r.bound - 1.0).abs() <= 1e-12, || {
            format!("N = {arms}: residual {}, bound {}", r.achieved, r.bound)
        })?;
        worst = worst.max((r.achieved - 1.0).abs());
    }
    Ok(format!("N = 2..5, worst residual equals 1 within {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let seg = RootedTree::unweighted(MetricGraph::segment(1.0).map_err(|e| e.to_string())?, VertexId(0))
        .map_err(|e| e.to_string())?;
    let s = discretize(&seg, 2000).and_then(|op| op.singular_values(5)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (k, &sk) in s.iter().enumerate() {
        let n = k + 1;
        let oracle = 2.0 / ((2 * n - 1) as f64 * PI);
        let rel = (sk - oracle).abs() / oracle;
        worst = worst.max(rel);
        ensure(rel <= 0.005, || format!("Volterra s_{n} = {sk}, oracle {oracle}"))?;
        ensure(sk <= 1.0 / n as f64, || format!("Volterra s_{n} = {sk} > 1/{n}"))?;
    }
    let sweep: Vec<Result<(), String>> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(7_070, i);
            let edges = 2 + (i as usize % 5);
            let g = random::tree(&mut rng, edges).map_err(|e| e.to_string())?;
            let v = random::piecewise_constant(&mut rng, &g, 0.2, 2.0).map_err(|e| e.to_string())?;
            let w = random::piecewise_constant(&mut rng, &g, 0.2, 2.0).map_err(|e| e.to_string())?;
            let root = VertexId(i as usize % g.vertex_count());
            let t = RootedTree::new(g, root, v, w).map_err(|e| e.to_string())?;
            let r = check_bound(&t, 10, 40).map_err(|e| e.to_string())?;
            ensure(r.passed() && r.rows.len() == 10, || format!("tree {i}: {:?}", r.rows.iter().find(|x| !x.holds)))
        })
        .collect();
    for r in sweep {
        r?;
    }
    within_time(start.elapsed(), 120.0)?;
    Ok(format!("Volterra s_1..s_5 match 2/((2n−1)π) to relative {worst:.1e} and are ≤ 1/n; 20 random trees satisfy the bound"))
}

fn criterion_8() -> Outcome {
    let alpha = volterra_constant(10..=40, 2000).map_err(|e| e.to_string())?;
    let mut lines = vec![format!("α = {alpha:.5} from the interval")];
    let cases = [
        ("[0,1]", MetricGraph::segment(1.0)),
        ("[0,2]", MetricGraph::segment(2.0)),
        ("star Γ_3", MetricGraph::star(3)),
    ];
    for (name, g) in cases {
        let t = RootedTree::unweighted(g.map_err(|e| e.to_string())?, VertexId(0)).map_err(|e| e.to_string())?;
        let r = check_asymptotics(&t, 10..=40, 500, alpha).map_err(|e| e.to_string())?;
        ensure(r.passed(0.05), || format!("{name}: limit {}, predicted {}", r.limit, r.predicted))?;
        lines.push(format!("{name}: {:.5} vs {:.5} ({:.2}%)", r.limit, r.predicted, 100.0 * r.rel_error));
    }
    Ok(lines.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("segment golden trace", criterion_1),
        ("partition property sweep", criterion_2),
        ("uniform sharpness on stars", criterion_3),
        ("uniform approximation bound", criterion_4),
        ("weighted L^p approximation bound", criterion_5),
        ("L^2 sharpness on stars", criterion_6),
        ("Hardy operator bound", criterion_7),
        ("Hardy operator asymptotics", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({secs:.2} s) {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({secs:.2} s) {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
