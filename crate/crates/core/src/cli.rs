//! Command-line surface. Exit codes: 0 success, 1 usage or validation
//! error, 2 runtime error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::assumptions::{assumption_report, DiagnosticConfig, EpsilonSchedule};
use crate::equivalence::full_report;
use crate::error::{Error, Result};
use crate::io::{
    comparison_table, read_dataset, read_rate_points, render_small_sample, write_rate_points,
    DiagnosisDocument, ExperimentConfig,
};
use crate::loss::{IdNormalization, LossSpec, Measure};
use crate::simulate::{
    fit_rate, run_convergence, small_sample_demo, RateField, RateFit, RatePoints,
};

#[derive(Debug, Parser)]
#[command(name = "levelshare", version, about = "Level and share loss measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate named measures for one or two dataset files
    /// (columns `id,target,realized`).
    Compute {
        /// Dataset file; give twice for a two-column comparison with ratio.
        #[arg(long, required = true, num_args = 1)]
        input: Vec<PathBuf>,
        /// Measure: tad, mad, id, taes, chi2, pearson, hh or
        /// cobb-douglas:p,q[,level|share]. Repeatable.
        #[arg(long)]
        measure: Vec<String>,
        /// Index of dissimilarity scaling: paper (1/(2n)) or conventional (1/2).
        #[arg(long, default_value = "paper")]
        id_normalization: IdNormalization,
    },
    /// Write equivalence and assumption diagnostics as JSON.
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        /// Loss spec as `p,q[,realized|target]`.
        #[arg(long, default_value = "1,0,realized", allow_hyphen_values = true)]
        spec: LossSpec,
        #[arg(long, default_value_t = 1.0)]
        eps0: f64,
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        /// Seed for the random subset probe.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of prefix lengths in the diagnostic grid.
        #[arg(long, default_value_t = 20)]
        grid_points: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded convergence experiment and write rate points as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed; overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the log-log convergence slope of a rate points file.
    Rate {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        field: RateField,
        /// Only fit rows with this spec label.
        #[arg(long)]
        spec: Option<String>,
    },
    /// Print the two-unit example tables.
    DemoSmallSample,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let _ = writeln!(stderr, "  caused by: {s}");
                source = s.source();
            }
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Compute {
            input,
            measure,
            id_normalization,
        } => compute(&input, &measure, id_normalization, out),
        Command::Diagnose {
            input,
            spec,
            eps0,
            alpha,
            seed,
            grid_points,
            out: path,
        } => {
            let series = read_dataset(&input)?;
            let eps = EpsilonSchedule::new(eps0, alpha)?;
            let config = DiagnosticConfig {
                seed,
                grid_points,
                ..DiagnosticConfig::default()
            };
            let doc = DiagnosisDocument {
                spec,
                epsilon: eps,
                equivalence: full_report(&spec, &series, &eps)?,
                assumptions: assumption_report(&series, &spec, &eps, &config)?,
            };
            let json = doc.to_json()?;
            match path {
                Some(p) => std::fs::write(p, json + "\n")?,
                None => writeln!(out, "{json}")?,
            }
            Ok(())
        }
        Command::Simulate { config, out: dir, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let dir = dir.or_else(|| cfg.output.dir.clone()).ok_or_else(|| {
                Error::Config("no output directory: pass --out or set output.dir".into())
            })?;
            simulate(&cfg, &dir, out)
        }
        Command::Rate {
            points,
            field,
            spec,
        } => rate(&points, field, spec.as_deref(), out),
        Command::DemoSmallSample => {
            write!(out, "{}", render_small_sample(&small_sample_demo()))?;
            Ok(())
        }
    }
}

fn compute(
    inputs: &[PathBuf],
    measures: &[String],
    id_normalization: IdNormalization,
    out: &mut dyn Write,
) -> Result<()> {
    if inputs.len() > 2 {
        return Err(Error::InvalidParameters(format!(
            "compute takes one or two inputs, got {}",
            inputs.len()
        )));
    }
    let measures: Vec<Measure> = if measures.is_empty() {
        Measure::COMPARISON_SET.to_vec()
    } else {
        measures.iter().map(|m| m.parse()).collect::<Result<_>>()?
    };
    let measures: Vec<Measure> = measures
        .into_iter()
        .map(|m| m.with_id_normalization(id_normalization))
        .collect();
    let series = inputs
        .iter()
        .map(|p| {
            let label = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            read_dataset(p).map(|s| (label, s))
        })
        .collect::<Result<Vec<_>>>()?;
    write!(out, "{}", comparison_table(&measures, &series)?)?;
    Ok(())
}

#[derive(Serialize)]
struct FieldFit {
    field: RateField,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct SpecSummary {
    spec: String,
    fits: Vec<FieldFit>,
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    config: &'a ExperimentConfig,
    points_file: &'a str,
    specs: Vec<SpecSummary>,
}

fn simulate(cfg: &ExperimentConfig, dir: &std::path::Path, out: &mut dyn Write) -> Result<()> {
    let gen = cfg.seeded_generator();
    let sets = cfg
        .specs
        .iter()
        .map(|spec| {
            run_convergence(&gen, spec, &cfg.n_grid, cfg.replicates, &cfg.epsilon)
                .map(|points| (spec.label(), points))
        })
        .collect::<Result<Vec<(String, RatePoints)>>>()?;

    std::fs::create_dir_all(dir)?;
    let points_path = dir.join(&cfg.output.points_file);
    let file = BufWriter::new(File::create(&points_path)?);
    write_rate_points(&sets, file)?;

    let fields = [RateField::CError, RateField::Diff, RateField::Keydiff];
    let specs = sets
        .iter()
        .map(|(label, points)| SpecSummary {
            spec: label.clone(),
            fits: fields
                .iter()
                .map(|&field| match fit_rate(points, field) {
                    Ok(fit) => FieldFit {
                        field,
                        fit: Some(fit),
                        error: None,
                    },
                    Err(e) => FieldFit {
                        field,
                        fit: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect(),
        })
        .collect();
    let summary = SimulationSummary {
        config: cfg,
        points_file: &cfg.output.points_file,
        specs,
    };
    std::fs::write(
        dir.join(&cfg.output.summary_file),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;

    writeln!(out, "wrote {}", points_path.display())?;
    for s in &summary.specs {
        for f in &s.fits {
            if let Some(fit) = &f.fit {
                writeln!(
                    out,
                    "{} {}: slope {:.3} ± {:.3}",
                    s.spec, f.field, fit.slope, fit.stderr
                )?;
            }
        }
    }
    Ok(())
}

fn rate(
    path: &std::path::Path,
    field: RateField,
    spec: Option<&str>,
    out: &mut dyn Write,
) -> Result<()> {
    let groups = read_rate_points(File::open(path)?)?;
    let groups: Vec<_> = match spec {
        Some(label) => {
            let g: Vec<_> = groups.into_iter().filter(|(l, _)| l == label).collect();
            if g.is_empty() {
                return Err(Error::InvalidParameters(format!(
                    "no rate points with spec `{label}`"
                )));
            }
            g
        }
        None => groups,
    };
    let labelled = groups.len() > 1;
    for (label, points) in &groups {
        let fit = fit_rate(points, field)?;
        if labelled {
            writeln!(out, "spec: {label}")?;
        }
        writeln!(out, "slope: {:.3} ± {:.3}", fit.slope, fit.stderr)?;
        writeln!(out, "intercept: {:.3}", fit.intercept)?;
        writeln!(out, "levels: {}", fit.levels.len())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("levelshare").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_one() {
        let (code, _, err) = run_args(&["frobnicate"]);
        assert_eq!(code, 1);
        assert!(err.contains("Usage"));
        let (code, _, _) = run_args(&["demo-small-sample", "--bogus"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("compute"));
    }

    #[test]
    fn missing_file_is_runtime_error() {
        let (code, _, err) = run_args(&["compute", "--input", "/nonexistent/file.csv"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn demo_prints_tables() {
        let (code, out, _) = run_args(&["demo-small-sample"]);
        assert_eq!(code, 0);
        let flat = out.split_whitespace().collect::<Vec<_>>().join(" ");
        assert!(flat.contains("Total Absolute Difference 10 10"));
        assert!(flat.contains("Index of Dissimilarity 0.0004 0.0024"));
    }
}
