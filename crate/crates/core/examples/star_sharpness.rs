//! The star with `N` unit arms and `n = N − 1` parts attains both approximation
//! bounds with equality. This prints the achieved value next to the bound.
//!
//! Run with `cargo run --example star_sharpness`.

use metgraph::approx::{sharpness_star, SharpnessMode};

fn main() -> metgraph::Result<()> {
    println!("{:>4} {:>8} {:>6} {:>12} {:>12} {:>10}", "arms", "mode", "p", "achieved", "bound", "rel error");
    for arms in 2..=6 {
        for (mode, p) in [(SharpnessMode::Uniform, 1.0), (SharpnessMode::Lp, 2.0), (SharpnessMode::Lp, 4.0)] {
            let r = sharpness_star(arms, p, mode)?;
            println!(
                "{:>4} {:>8} {:>6} {:>12.8} {:>12.8} {:>10.1e}",
                arms,
                format!("{mode:?}"),
                p,
                r.achieved,
                r.bound,
                r.rel_error
            );
        }
    }
    Ok(())
}
