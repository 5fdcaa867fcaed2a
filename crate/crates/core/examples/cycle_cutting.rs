//! Cuts the cycles of a graph with parallel edges and a loop, then partitions it under
//! a product functional and prints the parts together with a Graphviz rendering.
//!
//! Run with `cargo run --example cycle_cutting`.

use std::path::Path;

use metgraph::io::{load_graph, to_dot};
use metgraph::partition::{cut_cycles, partition};
use metgraph::{Functional, Measure};

fn main() -> metgraph::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/theta_graph.json");
    let (g, mu, _) = load_graph(&path)?;
    let mu = mu.expect("the data file carries a measure");

    let cut = cut_cycles(&g);
    println!(
        "{} vertices and {} edges become a tree with {} vertices and {} edges",
        g.vertex_count(),
        g.edge_count(),
        cut.tree.vertex_count(),
        cut.tree.edge_count()
    );
    for pair in &cut.split_pairs {
        println!(
            "  cut at {} into {} and {}",
            g.describe_point(&pair.point),
            cut.tree.vertex_name(pair.x1),
            cut.tree.vertex_name(pair.x2)
        );
    }

    let phi = Functional::product(&g, Measure::lebesgue(&g), mu, 0.5)?;
    let outcome = partition(&g, &phi, 4)?;
    let report = outcome.inspect(&g, &phi, 1e-9)?;
    println!("Φ(Γ) = {:.5}, bound {:.5}", report.total, report.bound);
    for (j, check) in report.parts.iter().enumerate() {
        println!("  part {j}: length {:.4}, Φ̃ {:.5}", check.length, check.tilde.value);
    }
    println!("\n{}", to_dot(&g, &outcome.parts));
    Ok(())
}
