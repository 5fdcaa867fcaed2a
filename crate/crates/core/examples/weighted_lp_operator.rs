//! Builds the rank-`n` sampling operator for a measure with atoms and density, checks
//! its error bound in `L^p(μ)` and shows that it acts linearly.
//!
//! Run with `cargo run --example weighted_lp_operator`.

use std::path::Path;

use metgraph::approx::{build_lp_operator, lp_bound_factor, lp_error};
use metgraph::io::{load_function, load_graph};
use metgraph::measure::derivative_norm;
use metgraph::{ConnectedSubset, PiecewiseFunction};

fn main() -> metgraph::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (g, mu, _) = load_graph(&data.join("theta_graph.json"))?;
    let mu = mu.expect("the data file carries a measure");
    let (u, _) = load_function(&data.join("theta_u.json"), &g)?;
    let a = PiecewiseFunction::constant(&g, 2.0);
    let whole = ConnectedSubset::whole(&g);
    let p = 2.0;

    for n in [1, 3, 6, 12] {
        let op = build_lp_operator(&g, &mu, &a, p, n)?;
        let err = lp_error(&g, &u, &op.apply(&g, &u), &mu, p)?;
        let bound = lp_bound_factor(&g, &mu, &a, p, n)? * derivative_norm(&g, &u, p, &a, &whole)?;
        println!("n = {n:>2}: rank {}, ‖u − Pu‖ = {err:.5} ≤ {bound:.5}", op.rank());
    }

    let op = build_lp_operator(&g, &mu, &a, p, 5)?;
    let v = u.map_values(|t| t * t - 1.0);
    let combo = u.combine(3.0, &v.map_values(|t| -0.5 * t));
    let (pu, pv, pc) = (op.apply(&g, &u), op.apply(&g, &v), op.apply(&g, &combo));
    let defect = (0..op.rank())
        .map(|j| (pc.values[j] - (3.0 * pu.values[j] - 0.5 * pv.values[j])).abs())
        .fold(0.0, f64::max);
    println!("P(3u − v/2) versus 3Pu − Pv/2: largest difference {defect:.1e}");
    for (x, t) in op.points.iter().zip(&op.tilde) {
        println!("  samples at {:<12} Φ̃ = {t:.5}", g.describe_point(x));
    }
    Ok(())
}
