//! Named members of the loss family evaluated on one dataset.

use levelshare::loss::ArgumentMode;
use levelshare::{named_measure, IdNormalization, Measure, PairedSeries};

fn main() -> levelshare::Result<()> {
    let series = PairedSeries::from_values(
        vec![120.0, 340.0, 95.0, 610.0, 48.0],
        vec![110.0, 355.0, 101.0, 590.0, 52.0],
    )?;
    let measures = [
        Measure::TotalAbsoluteDifference,
        Measure::MeanAbsoluteDifference,
        Measure::IndexOfDissimilarity(IdNormalization::PerUnit),
        Measure::IndexOfDissimilarity(IdNormalization::Conventional),
        Measure::TotalAbsoluteErrorOfShares,
        Measure::ChiSquare,
        Measure::PearsonChiSquareDivergence,
        Measure::HuntingtonHill,
        Measure::CobbDouglas {
            p: 1.5,
            q: -0.5,
            mode: ArgumentMode::Level,
        },
    ];
    for m in &measures {
        let (spec, mode, norm) = m.definition()?;
        let v = named_measure(m, &series)?;
        println!(
            "{:<40} {:>14.6}   ({spec}, {mode:?}, {norm:?})",
            m.name(),
            v.value
        );
    }
    Ok(())
}
