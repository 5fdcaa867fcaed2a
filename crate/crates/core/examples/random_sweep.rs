//! Partitions a batch of random graphs under random functionals and checks every
//! guarantee. The batch is reproducible from the seed.
//!
//! Run with `cargo run --release --example random_sweep -- [seed] [instances]`.

use metgraph::partition::partition;
use metgraph::random::{functional, graph, instance_rng};
use rayon::prelude::*;

fn main() -> metgraph::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    let count: u64 = args.next().map_or(200, |s| s.parse().expect("count must be an integer"));

    let failures: Vec<String> = (0..count)
        .into_par_iter()
        .map(|i| -> metgraph::Result<Vec<String>> {
            let mut rng = instance_rng(seed, i);
            let g = graph(&mut rng, 12)?;
            let phi = functional(&mut rng, &g)?;
            let mut out = Vec::new();
            for n in 1..=8 {
                let outcome = partition(&g, &phi, n)?;
                let report = outcome.inspect(&g, &phi, 1e-8)?;
                out.extend(report.violations.into_iter().map(|v| format!("instance {i}, n = {n}: {v}")));
            }
            Ok(out)
        })
        .collect::<metgraph::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    for f in failures.iter().take(20) {
        println!("{f}");
    }
    println!("seed {seed}: {count} graphs, {} violations", failures.len());
    Ok(())
}
