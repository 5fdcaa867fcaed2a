//! Partitions a star whose mass sits in atoms at the arm tips. The functional
//! `Φ_μ` combines the atoms with the weighted length, and every part keeps Φ̃ under
//! `Φ(Γ)/(n+1)` even though single points carry mass.
//!
//! Run with `cargo run --example atomic_measure_partition`.

use std::path::Path;

use metgraph::io::load_graph;
use metgraph::partition::partition;
use metgraph::{Functional, PiecewiseFunction};

fn main() -> metgraph::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/star3.json");
    let (g, mu, _) = load_graph(&path)?;
    let mu = mu.expect("the data file carries a measure");
    for (p, weight) in [(1.0, 1.0), (2.0, 0.25)] {
        let a = PiecewiseFunction::constant(&g, weight);
        let phi = Functional::phi_mu(&g, &a, p, mu.clone())?;
        println!("p = {p}, a = {weight}: Φ(Γ) = {:.4}", phi.total(&g));
        for n in 1..=4 {
            let outcome = partition(&g, &phi, n)?;
            let report = outcome.inspect(&g, &phi, 1e-9)?;
            let tildes: Vec<String> = report.parts.iter().map(|c| format!("{:.4}", c.tilde.value)).collect();
            let masses: Vec<String> =
                outcome.parts.parts.iter().map(|s| format!("{:.1}", mu.measure_of(s))).collect();
            println!(
                "  n = {n}: bound {:.4}, Φ̃ [{}], atom mass per part [{}]",
                report.bound,
                tildes.join(", "),
                masses.join(", ")
            );
        }
    }
    Ok(())
}
