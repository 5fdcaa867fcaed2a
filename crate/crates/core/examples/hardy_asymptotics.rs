//! Estimates `lim n·s_n` for the Hardy operator on a few trees and compares it with
//! `α ∫ |v w|`, where `α` is measured once on the unit interval.
//!
//! Run with `cargo run --release --example hardy_asymptotics`.

use std::f64::consts::PI;

use metgraph::hardy::{check_asymptotics, volterra_constant, RootedTree};
use metgraph::{MetricGraph, VertexId};

fn main() -> metgraph::Result<()> {
    let alpha = volterra_constant(10..=40, 2000)?;
    println!("α = {alpha:.6} (1/π = {:.6})", 1.0 / PI);
    let cases = [
        ("interval of length 1", MetricGraph::segment(1.0)?),
        ("interval of length 2", MetricGraph::segment(2.0)?),
        ("star with 3 arms", MetricGraph::star(3)?),
    ];
    for (name, g) in cases {
        let t = RootedTree::unweighted(g, VertexId(0))?;
        let r = check_asymptotics(&t, 10..=40, 500, alpha)?;
        println!(
            "{name}: lim n·s_n ≈ {:.5}, predicted {:.5}, relative error {:.2e}",
            r.limit, r.predicted, r.rel_error
        );
    }
    Ok(())
}
