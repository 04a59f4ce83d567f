//! Regularity diagnostics on a compliant and a violating synthetic series.

use levelshare::simulate::Injection;
use levelshare::{
    assumption_report, full_report, generate, DiagnosticConfig, EpsilonSchedule, GeneratorSpec,
    LossSpec,
};

fn main() -> levelshare::Result<()> {
    let spec = LossSpec::absolute();
    let eps = EpsilonSchedule::default();
    let compliant = GeneratorSpec::default().with_seed(1);
    let violating = GeneratorSpec {
        injection: Some(Injection {
            b: 0.05,
            beta: 0.0,
            shock_lo: 2.0,
            shock_hi: 10.0,
        }),
        ..compliant
    };
    for (name, gen) in [("vanishing deviants", compliant), ("constant 5% deviants", violating)] {
        let series = generate(&gen, 50_000)?;
        let report = assumption_report(&series, &spec, &eps, &DiagnosticConfig::default())?;
        let eq = full_report(&spec, &series, &eps)?;
        println!("{name}:");
        println!("  verdicts {:?}", report.verdicts.all());
        println!(
            "  sparse fraction {:.4} -> {:.4}",
            report.a5_sparse_trajectory[0].fraction,
            report.a5_sparse_trajectory.last().unwrap().fraction
        );
        println!("  c_n {:.4}, difference {:.4e}, keydiff {:.4e}", eq.c_n, eq.difference, eq.keydiff);
    }
    Ok(())
}
