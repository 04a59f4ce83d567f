//! Convergence of level and share losses under the default generator.
//!
//! Run with `cargo run --release --example convergence_experiment [replicates]`.

use levelshare::{fit_rate, run_convergence, EpsilonSchedule, GeneratorSpec, LossSpec, RateField};

fn main() -> levelshare::Result<()> {
    let replicates = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100);
    let gen = GeneratorSpec::default().with_seed(2024);
    let grid = [100, 1_000, 10_000, 100_000];
    let points = run_convergence(
        &gen,
        &LossSpec::absolute(),
        &grid,
        replicates,
        &EpsilonSchedule::default(),
    )?;

    println!("{:>8}  {:>12}  {:>12}  {:>12}  {:>8}", "n", "|diff|", "|keydiff|", "c_error", "sparse");
    let diff = points.medians(RateField::Diff);
    let key = points.medians(RateField::Keydiff);
    let cerr = points.medians(RateField::CError);
    let sparse = points.medians(RateField::SparseFraction);
    for k in 0..grid.len() {
        println!(
            "{:>8}  {:>12.4e}  {:>12.4e}  {:>12.4e}  {:>8.4}",
            diff[k].0, diff[k].1, key[k].1, cerr[k].1, sparse[k].1
        );
    }
    for field in [RateField::CError, RateField::Diff, RateField::Keydiff] {
        let fit = fit_rate(&points, field)?;
        println!("{field}: slope {:.3} ± {:.3}", fit.slope, fit.stderr);
    }
    Ok(())
}
