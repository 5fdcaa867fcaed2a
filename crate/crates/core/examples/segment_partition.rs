//! Partitions the unit interval under arc length for growing part budgets and
//! compares each part's Φ̃ with the guaranteed bound `Φ(Γ)/(n+1)`.
//!
//! Run with `cargo run --example segment_partition`.

use metgraph::partition::partition;
use metgraph::{ConnectedSubset, Functional, MetricGraph};

fn describe(g: &MetricGraph, set: &ConnectedSubset) -> String {
    let pieces: Vec<String> = set
        .intervals()
        .iter()
        .map(|iv| format!("{}[{:.4}, {:.4}]", g.edge_name(iv.edge), iv.lo, iv.hi))
        .collect();
    let holes: Vec<String> = set.excluded().iter().map(|p| g.describe_point(p)).collect();
    if holes.is_empty() {
        pieces.join(" ∪ ")
    } else {
        format!("{} minus {{{}}}", pieces.join(" ∪ "), holes.join(", "))
    }
}

fn main() -> metgraph::Result<()> {
    let g = MetricGraph::segment(1.0)?;
    let phi = Functional::length(&g);
    for n in 1..=5 {
        let outcome = partition(&g, &phi, n)?;
        let report = outcome.inspect(&g, &phi, 1e-12)?;
        println!("n = {n}: bound Φ(Γ)/(n+1) = {:.4}", report.bound);
        for (part, check) in outcome.parts.parts.iter().zip(&report.parts) {
            println!(
                "  {:<40} Φ̃ = {:.4} at {}",
                describe(&g, part),
                check.tilde.value,
                g.describe_point(&check.minimizer)
            );
        }
        assert!(report.passed(), "{:?}", report.violations);
    }
    Ok(())
}
