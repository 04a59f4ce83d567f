//! Dataset files, experiment configuration, report documents and table
//! rendering.
//!
//! Dataset files are UTF-8 CSV with the exact header `id,target,realized`,
//! one row per unit, plain decimal numbers and no thousands separators.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assumptions::{AssumptionReport, DiagnosticConfig, EpsilonSchedule, Thresholds};
use crate::equivalence::EquivalenceReport;
use crate::error::{Error, Result};
use crate::loss::{named_measure, Measure, PairedSeries};
use crate::simulate::{GeneratorSpec, RatePoint, RatePoints, SmallSampleDemo};

pub const DATASET_HEADER: [&str; 3] = ["id", "target", "realized"];

pub fn read_dataset(path: impl AsRef<Path>) -> Result<PairedSeries> {
    parse_dataset(File::open(path)?)
}

/// Parses a dataset, keeping row order. Rows are numbered from 1 for the
/// first data row.
pub fn parse_dataset<R: Read>(reader: R) -> Result<PairedSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    if header.iter().collect::<Vec<_>>() != DATASET_HEADER {
        return Err(Error::Parse {
            row: 0,
            message: format!(
                "expected header `{}`, found `{}`",
                DATASET_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut ids = Vec::new();
    let mut target = Vec::new();
    let mut realized = Vec::new();
    let mut seen = HashSet::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(Error::Parse {
                row,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(Error::Parse {
                row,
                message: "empty id".into(),
            });
        }
        let y = parse_cell(&record[1], row, "target")?;
        let x = parse_cell(&record[2], row, "realized")?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId { row, id });
        }
        ids.push(id);
        target.push(y);
        realized.push(x);
    }
    if ids.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "no data rows".into(),
        });
    }
    PairedSeries::new(ids, realized, target)
}

fn parse_cell(cell: &str, row: usize, column: &'static str) -> Result<f64> {
    let cell = cell.trim();
    let value: f64 = cell.parse().map_err(|_| Error::Parse {
        row,
        message: format!("`{cell}` in column `{column}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            row,
            message: format!("`{cell}` in column `{column}` is not finite"),
        });
    }
    if value < 0.0 {
        return Err(Error::NegativeCell { row, column, value });
    }
    Ok(value)
}

/// Writes values at full precision; reading the output back yields an
/// identical series.
pub fn write_dataset<W: Write>(series: &PairedSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DATASET_HEADER).map_err(csv_io)?;
    for ((id, y), x) in series.ids().iter().zip(series.target()).zip(series.realized()) {
        w.write_record([id.as_str(), &y.to_string(), &x.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub points_file: String,
    pub summary_file: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            points_file: "rate_points.csv".into(),
            summary_file: "summary.json".into(),
        }
    }
}

/// Experiment configuration, read from TOML.
///
/// ```toml
/// seed = 7
/// replicates = 100
/// n_grid = [100, 1000, 10000, 100000]
///
/// [generator]
/// base = { family = "skewed_heavy", shape = 1.0, scale = 1.0 }
/// noise = { s0 = 0.1, gamma = 0.25 }
/// injection = { b = 1.0, beta = 0.5, shock_lo = 2.0, shock_hi = 10.0 }
///
/// [[specs]]
/// p = 1.0
/// q = 0.0
/// weight_side = "realized"
///
/// [epsilon]
/// eps0 = 1.0
/// alpha = 0.25
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; replaces `generator.seed`.
    #[serde(default)]
    pub seed: u64,
    pub replicates: usize,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub generator: GeneratorSpec,
    #[serde(default = "default_specs")]
    pub specs: Vec<crate::loss::LossSpec>,
    #[serde(default)]
    pub epsilon: EpsilonSchedule,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_specs() -> Vec<crate::loss::LossSpec> {
    vec![crate::loss::LossSpec::absolute()]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "n_grid must be nonempty, positive and strictly ascending".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.specs.is_empty() {
            return Err(Error::Config("at least one loss spec is required".into()));
        }
        for spec in &self.specs {
            spec.validate()?;
        }
        self.generator.validate()?;
        self.epsilon.validate()
    }

    /// Generator with the master seed applied.
    pub fn seeded_generator(&self) -> GeneratorSpec {
        self.generator.with_seed(self.seed)
    }

    pub fn diagnostic_config(&self) -> DiagnosticConfig {
        DiagnosticConfig {
            seed: self.seed,
            thresholds: self.thresholds,
            ..DiagnosticConfig::default()
        }
    }
}

/// The `diagnose` output document.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosisDocument {
    pub spec: crate::loss::LossSpec,
    pub epsilon: EpsilonSchedule,
    pub equivalence: EquivalenceReport,
    pub assumptions: AssumptionReport,
}

impl DiagnosisDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub const RATE_POINTS_HEADER: [&str; 8] = [
    "spec",
    "n",
    "replicate",
    "seed",
    "c_error",
    "diff",
    "keydiff",
    "sparse_fraction",
];

/// Writes one row per cell, tagged with the loss spec label, at full
/// precision.
pub fn write_rate_points<W: Write>(sets: &[(String, RatePoints)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RATE_POINTS_HEADER).map_err(csv_io)?;
    for (label, points) in sets {
        for p in &points.points {
            w.write_record([
                label.clone(),
                p.n.to_string(),
                p.replicate.to_string(),
                p.seed.to_string(),
                p.c_error.to_string(),
                p.diff.to_string(),
                p.keydiff.to_string(),
                p.sparse_fraction.to_string(),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct RateRow {
    #[serde(default)]
    spec: Option<String>,
    n: usize,
    replicate: usize,
    #[serde(default)]
    seed: u64,
    c_error: f64,
    diff: f64,
    keydiff: f64,
    #[serde(default)]
    sparse_fraction: f64,
}

/// Reads rate points grouped by spec label, in order of first appearance.
/// A file without a `spec` column yields a single group labelled `""`.
pub fn read_rate_points<R: Read>(reader: R) -> Result<Vec<(String, RatePoints)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut groups: Vec<(String, RatePoints)> = Vec::new();
    for (k, row) in rdr.deserialize::<RateRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            row: k + 1,
            message: e.to_string(),
        })?;
        let label = row.spec.unwrap_or_default();
        let point = RatePoint {
            n: row.n,
            replicate: row.replicate,
            seed: row.seed,
            c_error: row.c_error,
            diff: row.diff,
            keydiff: row.keydiff,
            sparse_fraction: row.sparse_fraction,
        };
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.points.push(point),
            None => groups.push((label, RatePoints { points: vec![point] })),
        }
    }
    if groups.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "no rate points".into(),
        });
    }
    Ok(groups)
}

/// Rounds to 4 decimals and drops trailing zeros: `10`, `0.0004`, `0.9891`.
pub fn display_value(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn render_rows(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Measure-by-input table. With two inputs a third column holds
/// `first / second` at 4 decimals.
pub fn comparison_table(measures: &[Measure], inputs: &[(String, PairedSeries)]) -> Result<String> {
    if inputs.is_empty() || inputs.len() > 2 {
        return Err(Error::InvalidParameters(format!(
            "expected one or two inputs, got {}",
            inputs.len()
        )));
    }
    let mut header = vec!["Measure".to_string()];
    header.extend(inputs.iter().map(|(l, _)| l.clone()));
    if inputs.len() == 2 {
        header.push(format!("{}/{}", inputs[0].0, inputs[1].0));
    }
    let mut rows = vec![header];
    for m in measures {
        let values = inputs
            .iter()
            .map(|(_, s)| named_measure(m, s).map(|v| v.value))
            .collect::<Result<Vec<f64>>>()?;
        let mut row = vec![m.name()];
        row.extend(values.iter().map(|&v| display_value(v)));
        if values.len() == 2 {
            row.push(if values[1] == 0.0 {
                "undefined".into()
            } else {
                format!("{:.4}", values[0] / values[1])
            });
        }
        rows.push(row);
    }
    Ok(render_rows(&rows))
}

/// The two-unit example: the data table followed by the summary table.
pub fn render_small_sample(demo: &SmallSampleDemo) -> String {
    let target = demo.sets[0].target();
    let y_shares = demo.sets[0].target_shares().expect("positive totals").into_inner();
    let pair = |a: f64, b: f64| vec![display_value(a), display_value(b)];
    let row = |label: &str, vals: Vec<String>| {
        let mut r = vec![label.to_string()];
        r.extend(vals);
        r
    };

    let mut rows = vec![
        row("", vec!["Unit 1".into(), "Unit 2".into()]),
        row("y_i", pair(target[0], target[1])),
        row("Share of Total", pair(y_shares[0], y_shares[1])),
    ];
    for (j, set) in demo.sets.iter().enumerate() {
        let x = set.realized();
        let xs = set.realized_shares().expect("positive totals").into_inner();
        rows.push(row(&format!("x_i{}", j + 1), pair(x[0], x[1])));
        rows.push(row("Share of Total", pair(xs[0], xs[1])));
        rows.push(row(
            "Absolute Difference",
            pair((x[0] - target[0]).abs(), (x[1] - target[1]).abs()),
        ));
        rows.push(row(
            "Absolute Share Difference",
            pair((xs[0] - y_shares[0]).abs(), (xs[1] - y_shares[1]).abs()),
        ));
    }

    let summary = vec![
        row("", vec!["Set 1".into(), "Set 2".into()]),
        row(
            "Total Absolute Difference",
            pair(demo.total_absolute_difference[0], demo.total_absolute_difference[1]),
        ),
        row(
            "Index of Dissimilarity",
            pair(demo.index_of_dissimilarity[0], demo.index_of_dissimilarity[1]),
        ),
    ];

    let mut out = String::from("Small Sample Example\n");
    out.push_str(&render_rows(&rows));
    out.push_str("\nSmall Sample Summary Statistics\n");
    out.push_str(&render_rows(&summary));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_small_sample_file() {
        let s = parse_dataset("id,target,realized\na,10,11\nb,990,999\n".as_bytes()).unwrap();
        assert_eq!(s.realized(), &[11.0, 999.0]);
        assert_eq!(s.target(), &[10.0, 990.0]);
        assert_eq!(s.ids(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_dataset("id,target,realized\n".as_bytes()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_dataset("id,target,realized\na,10,-1\n".as_bytes()),
            Err(Error::NegativeCell { row: 1, column: "realized", .. })
        ));
        assert!(matches!(
            parse_dataset("id,target,realized\na,10,1\na,3,4\n".as_bytes()),
            Err(Error::DuplicateId { row: 2, .. })
        ));
        assert!(matches!(
            parse_dataset("id,target,realized\na,ten,1\n".as_bytes()),
            Err(Error::Parse { row: 1, .. })
        ));
        assert!(matches!(
            parse_dataset("id,target,realized\na,NaN,1\n".as_bytes()),
            Err(Error::Parse { row: 1, .. })
        ));
        assert!(matches!(
            parse_dataset("id,realized,target\na,1,1\n".as_bytes()),
            Err(Error::Parse { row: 0, .. })
        ));
        assert!(matches!(
            parse_dataset("id,target,realized\na,\"1,000\",1\n".as_bytes()),
            Err(Error::Parse { row: 1, .. })
        ));
        assert!(matches!(
            parse_dataset("id,target,realized\na,1\n".as_bytes()),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn display_rounding() {
        assert_eq!(display_value(10.0), "10");
        assert_eq!(display_value(0.000_445_5), "0.0004");
        assert_eq!(display_value(0.989_108_9), "0.9891");
        assert_eq!(display_value(0.01), "0.01");
        assert_eq!(display_value(5_604_178.0), "5604178");
        assert_eq!(display_value(-0.000_01), "0");
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ExperimentConfig::from_toml("replicates = 3\nn_grid = [10, 100]\n").unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.generator, GeneratorSpec::default());
        assert_eq!(cfg.specs, vec![crate::loss::LossSpec::absolute()]);
        assert!(ExperimentConfig::from_toml("replicates = 3\nn_grid = [100, 10]\n").is_err());
        assert!(ExperimentConfig::from_toml("replicates = 0\nn_grid = [10]\n").is_err());
        assert!(ExperimentConfig::from_toml("replicates = 1\nn_grid = [10]\nbogus = 1\n").is_err());
        let cfg = ExperimentConfig::from_toml(
            "replicates = 1\nn_grid = [10]\n[[specs]]\np = 2\nq = -1\nweight_side = \"target\"\n",
        )
        .unwrap();
        assert_eq!(cfg.specs, vec![crate::loss::LossSpec::webster()]);
    }

    #[test]
    fn rate_points_without_spec_column() {
        let text = "n,replicate,c_error,diff,keydiff\n10,0,0.1,0.2,0.3\n100,0,0.01,0.02,0.03\n";
        let groups = read_rate_points(text.as_bytes()).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].0, "");
        assert_eq!(groups[0].1.points.len(), 2);
    }
}
