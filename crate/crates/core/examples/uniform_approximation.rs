//! Approximates a piecewise-linear function on a graph with cycles by step functions
//! with at most `n` values and checks the sup-norm error against its bound.
//!
//! Run with `cargo run --example uniform_approximation`.

use std::path::Path;

use metgraph::approx::{approximate_uniform, sup_error};
use metgraph::io::{load_function, load_graph};
use metgraph::PiecewiseFunction;

fn main() -> metgraph::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (g, _, _) = load_graph(&data.join("theta_graph.json"))?;
    let (u, _) = load_function(&data.join("theta_u.json"), &g)?;
    let a = PiecewiseFunction::constant(&g, 1.0);

    for p in [1.0, 2.0, f64::INFINITY] {
        println!("p = {p}");
        for n in [1, 2, 4, 8, 16] {
            let r = approximate_uniform(&g, &u, p, &a, n)?;
            let err = sup_error(&g, &u, &r.step);
            println!("  n = {n:>2}: {} steps, error {err:.5} ≤ {:.5}", r.step.rank(), r.bound);
            assert!(err <= r.bound * (1.0 + 1e-9));
        }
    }
    Ok(())
}
