//! Log-log slope of a convergence experiment, from the library and from a
//! rate points CSV.

use levelshare::io::{read_rate_points, write_rate_points};
use levelshare::simulate::fit_power_law;
use levelshare::{fit_rate, run_convergence, EpsilonSchedule, GeneratorSpec, LossSpec, RateField};

fn main() -> levelshare::Result<()> {
    let exact: Vec<(usize, f64)> = [100, 1_000, 10_000]
        .iter()
        .map(|&n| (n, 3.0 / (n as f64).sqrt()))
        .collect();
    let fit = fit_power_law(&exact)?;
    println!("exact n^-1/2: slope {:.3}, intercept {:.3}", fit.slope, fit.intercept);

    let spec = LossSpec::absolute();
    let points = run_convergence(
        &GeneratorSpec::default().with_seed(9),
        &spec,
        &[100, 1_000, 10_000],
        30,
        &EpsilonSchedule::default(),
    )?;
    let mut csv = Vec::new();
    write_rate_points(&[(spec.label(), points)], &mut csv)?;
    for (label, points) in read_rate_points(csv.as_slice())? {
        for field in [RateField::CError, RateField::Diff, RateField::Keydiff] {
            let fit = fit_rate(&points, field)?;
            println!("{label} {field}: slope {:.3} ± {:.3}", fit.slope, fit.stderr);
        }
    }
    Ok(())
}
