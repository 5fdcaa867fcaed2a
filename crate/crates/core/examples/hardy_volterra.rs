//! Singular values of the Hardy operator. On the unit interval they are known in
//! closed form, `2/((2n−1)π)`. On a weighted tree they stay below `‖v‖₂‖w‖₂/n`.
//!
//! Run with `cargo run --release --example hardy_volterra`.

use std::f64::consts::PI;
use std::path::Path;

use metgraph::hardy::{check_bound, discretize, RootedTree};
use metgraph::io::{load_function, load_graph};
use metgraph::{MetricGraph, VertexId};

fn main() -> metgraph::Result<()> {
    let t = RootedTree::unweighted(MetricGraph::segment(1.0)?, VertexId(0))?;
    let s = discretize(&t, 1000)?.singular_values(8)?;
    println!("unit interval, 1000 cells");
    for (k, s) in s.iter().enumerate() {
        let exact = 2.0 / ((2 * k + 1) as f64 * PI);
        println!("  s_{} = {s:.6}  exact {exact:.6}  rel {:.1e}", k + 1, (s - exact).abs() / exact);
    }

    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (g, _, _) = load_graph(&data.join("tree.json"))?;
    let (v, _) = load_function(&data.join("tree_v.json"), &g)?;
    let (w, _) = load_function(&data.join("tree_w.json"), &g)?;
    let root = g.vertex_by_name("root")?;
    let tree = RootedTree::new(g, root, v, w)?;
    let report = check_bound(&tree, 8, 100)?;
    println!("weighted tree, ‖v‖₂ = {:.4}, ‖w‖₂ = {:.4}", report.norm_v, report.norm_w);
    for row in &report.rows {
        println!(
            "  n = {}: s_n = {:.6} ≤ {:.6} {}",
            row.n,
            row.s_n_fine,
            row.bound,
            if row.holds { "ok" } else { "VIOLATED" }
        );
    }
    Ok(())
}
