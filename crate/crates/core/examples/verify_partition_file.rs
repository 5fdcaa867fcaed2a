//! Reads candidate partitions from JSON and checks them against the guarantees for a
//! given part budget, the way the `verify` subcommand does.
//!
//! Run with `cargo run --example verify_partition_file`.

use std::path::Path;

use metgraph::io::{load_graph, load_parts};
use metgraph::partition::inspect_partition;
use metgraph::Functional;

fn main() -> metgraph::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (g, _, _) = load_graph(&data.join("segment.json"))?;
    let phi = Functional::length(&g);
    for file in ["segment_parts.json", "segment_parts_unbalanced.json"] {
        let (parts, digest) = load_parts(&data.join(file), &g)?;
        let report = inspect_partition(&g, &phi, &parts, 3, 1e-9)?;
        println!("{file} (sha256 {}…)", &digest[..12]);
        for (j, check) in report.parts.iter().enumerate() {
            println!("  part {j}: length {:.3}, Φ̃ {:.4} (bound {:.4})", check.length, check.tilde.value, report.bound);
        }
        match report.violations.as_slice() {
            [] => println!("  all checks pass"),
            vs => vs.iter().for_each(|v| println!("  violation: {v}")),
        }
    }
    Ok(())
}
