//! Share differences are level differences after rescaling the target by
//! the ratio of totals.

use levelshare::{c_ratio, lemma1_check, PairedSeries};

fn main() -> levelshare::Result<()> {
    let series = PairedSeries::from_values(
        vec![1_204.0, 18_930.0, 402.0, 7_715.0],
        vec![1_150.0, 19_400.0, 389.0, 7_100.0],
    )?;
    println!("c_n = S_x / S_y = {:.6}", c_ratio(&series)?);
    for p in [0.5, 1.0, 2.0] {
        for i in 0..series.len() {
            let (lhs, rhs) = lemma1_check(&series, i, p)?;
            println!("p={p} unit {i}: |x-y|^p = {lhs:.6e}  |X-cY|^p/S_x^p = {rhs:.6e}");
        }
    }
    Ok(())
}
