//! Compare two sets of estimates against the same targets, as the
//! `compute` command does.
//!
//! `cargo run --example csv_compare [first.csv second.csv]`

use std::path::PathBuf;

use levelshare::io::{comparison_table, read_dataset};
use levelshare::Measure;

fn main() -> levelshare::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let mut paths: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if paths.is_empty() {
        paths = vec![dir.join("postcensal.csv"), dir.join("extrapolated.csv")];
    }
    let inputs = paths
        .iter()
        .map(|p| {
            let label = p.file_stem().unwrap().to_string_lossy().into_owned();
            read_dataset(p).map(|s| (label, s))
        })
        .collect::<levelshare::Result<Vec<_>>>()?;
    print!("{}", comparison_table(&Measure::COMPARISON_SET, &inputs)?);
    Ok(())
}
