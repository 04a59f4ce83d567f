//! Finite-sample diagnostics for the five regularity conditions behind
//! level/share equivalence.
//!
//! The conditions are statements about limits, so nothing here certifies
//! them. Each checker evaluates the relevant quantity along a grid of prefix
//! sizes and issues a heuristic verdict against a configurable threshold.
//! Every trajectory value at prefix `m` depends only on the first `m` units;
//! shares inside a prefix are taken relative to the prefix totals.
//!
//! | check | quantity along the prefix grid                              | default verdict rule |
//! |-------|-------------------------------------------------------------|----------------------|
//! | A1    | sample p-th moments of `X` and `Y`                          | Warn if tail range > 20% of tail median |
//! | A2    | mean `w(s_i)` and mean `w(s_i)(X_i^p + Y_i^p)`; subset probes | Warn if worst subset average > 3x full average |
//! | A3    | `S_x/m`, `S_y/m`                                            | Fail if tail oscillation >= 5% |
//! | A4    | mean `w(x_i)`, mean `w(y_i)`                                | Warn if tail drift > 5% |
//! | A5    | `|B_m|`, `|B_m|/m` for the sparse deviation set              | see [`check_a5_sparse`] |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{LossSpec, PairedSeries};
use crate::numeric;

/// `eps_n = eps0 * n^(-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub eps0: f64,
    pub alpha: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            eps0: 1.0,
            alpha: 0.25,
        }
    }
}

impl EpsilonSchedule {
    pub fn new(eps0: f64, alpha: f64) -> Result<Self> {
        let s = Self { eps0, alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0.is_finite() && self.eps0 > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "eps0 must be positive, got {}",
                self.eps0
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn at(&self, n: usize) -> f64 {
        self.eps0 * (n as f64).powf(-self.alpha)
    }
}

/// Zero-based indices `i < at_n` with `|Y_i - c X_i| > threshold`, where
/// `c = S_x / S_y` over the first `at_n` units.
pub fn sparse_set_at(series: &PairedSeries, threshold: f64, at_n: usize) -> Result<Vec<usize>> {
    if at_n == 0 || at_n > series.len() {
        return Err(Error::IndexOutOfRange {
            index: at_n,
            n: series.len(),
        });
    }
    let x = &series.realized()[..at_n];
    let y = &series.target()[..at_n];
    let sx = numeric::sum(x);
    let sy = numeric::sum(y);
    if sx <= 0.0 || sy <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    let c = sx / sy;
    Ok(x.iter()
        .zip(y)
        .enumerate()
        .filter(|(_, (&xi, &yi))| (yi - c * xi).abs() > threshold)
        .map(|(i, _)| i)
        .collect())
}

/// The sparse deviation set at prefix `at_n`, thresholded at `eps.at(at_n)`.
pub fn sparse_set(series: &PairedSeries, eps: &EpsilonSchedule, at_n: usize) -> Result<Vec<usize>> {
    eps.validate()?;
    sparse_set_at(series, eps.at(at_n), at_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

/// Verdict thresholds; see the module table for how each one is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub a1_moment_range: f64,
    pub a2_subset_multiple: f64,
    pub a3_oscillation: f64,
    pub a4_drift: f64,
    pub a5_pass_fraction: f64,
    pub a5_decay_factor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            a1_moment_range: 0.20,
            a2_subset_multiple: 3.0,
            a3_oscillation: 0.05,
            a4_drift: 0.05,
            a5_pass_fraction: 0.01,
            a5_decay_factor: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticConfig {
    /// Explicit prefix sizes; a geometric grid is used when absent.
    pub grid: Option<Vec<usize>>,
    pub grid_points: usize,
    /// Portion of the grid span, measured from the end, used for tail
    /// statistics (range, oscillation, drift).
    pub tail_fraction: f64,
    pub delta: f64,
    pub probes: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl Default for DiagnosticConfig {
    fn default() -> Self {
        Self {
            grid: None,
            grid_points: 20,
            tail_fraction: 0.25,
            delta: 0.5,
            probes: 200,
            seed: 0,
            thresholds: Thresholds::default(),
        }
    }
}

impl DiagnosticConfig {
    pub fn grid_for(&self, n: usize) -> Result<Vec<usize>> {
        match &self.grid {
            Some(grid) => {
                validate_grid(grid, n)?;
                Ok(grid.clone())
            }
            None => Ok(prefix_grid(n, self.grid_points)),
        }
    }
}

/// Roughly geometric prefix sizes from `min(10, n)` to `n`, deduplicated
/// and strictly increasing. Always ends at `n`.
pub fn prefix_grid(n: usize, points: usize) -> Vec<usize> {
    let start = n.clamp(1, 10);
    let points = points.max(2);
    let ratio = (n as f64 / start as f64).ln() / (points - 1) as f64;
    let mut grid: Vec<usize> = (0..points)
        .map(|k| ((start as f64) * (ratio * k as f64).exp()).round() as usize)
        .map(|m| m.clamp(1, n))
        .collect();
    grid.push(n);
    grid.sort_unstable();
    grid.dedup();
    grid
}

pub fn validate_grid(grid: &[usize], n: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameters("prefix grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters(
            "prefix grid must be strictly increasing".into(),
        ));
    }
    if grid[0] == 0 || *grid.last().unwrap() > n {
        return Err(Error::InvalidParameters(format!(
            "prefix grid must lie within [1, {n}]"
        )));
    }
    Ok(())
}

/// Positions of grid points in the final `tail_fraction` of the grid span.
/// Always contains the last point.
fn tail_positions(grid: &[usize], tail_fraction: f64) -> Vec<usize> {
    let last = *grid.last().expect("grid validated non-empty") as f64;
    let cutoff = (1.0 - tail_fraction.clamp(0.0, 1.0)) * last;
    let tail: Vec<usize> = (0..grid.len()).filter(|&k| grid[k] as f64 >= cutoff).collect();
    if tail.is_empty() {
        vec![grid.len() - 1]
    } else {
        tail
    }
}

/// `(max - min) / median` of the selected values; zero for a flat tail,
/// infinite for a nonflat tail with zero median.
fn relative_range(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range == 0.0 {
        return 0.0;
    }
    match numeric::median(values) {
        Some(m) if m != 0.0 => range / m.abs(),
        _ => f64::INFINITY,
    }
}

fn pick(values: &[f64], positions: &[usize]) -> Vec<f64> {
    positions.iter().map(|&k| values[k]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidePoint {
    pub n: usize,
    pub realized: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub trajectory: Vec<SidePoint>,
    pub range_ratio: f64,
    pub verdict: Verdict,
}

/// Sample p-th moments over each prefix.
pub fn check_a1_moments(
    series: &PairedSeries,
    p: f64,
    grid: &[usize],
    tail_fraction: f64,
    thresholds: &Thresholds,
) -> Result<MomentCheck> {
    validate_grid(grid, series.len())?;
    let xp: Vec<f64> = series.realized().iter().map(|v| v.powf(p)).collect();
    let yp: Vec<f64> = series.target().iter().map(|v| v.powf(p)).collect();
    let trajectory: Vec<SidePoint> = grid
        .iter()
        .map(|&m| SidePoint {
            n: m,
            realized: numeric::mean(&xp[..m]),
            target: numeric::mean(&yp[..m]),
        })
        .collect();
    let tail = tail_positions(grid, tail_fraction);
    let rx: Vec<f64> = trajectory.iter().map(|t| t.realized).collect();
    let ry: Vec<f64> = trajectory.iter().map(|t| t.target).collect();
    let range_ratio = relative_range(&pick(&rx, &tail)).max(relative_range(&pick(&ry, &tail)));
    let verdict = if range_ratio > thresholds.a1_moment_range {
        Verdict::Warn
    } else {
        Verdict::Pass
    };
    Ok(MomentCheck {
        trajectory,
        range_ratio,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub n: usize,
    pub weight_avg: f64,
    pub weighted_moment_avg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetProbe {
    pub delta: f64,
    pub probes: usize,
    pub seed: u64,
    pub full_average: f64,
    pub worst_subset_average: f64,
    /// Largest prefix average of the weights along the grid.
    pub weight_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroCheck {
    pub trajectory: Vec<WeightedPoint>,
    pub probe: SubsetProbe,
    pub verdict: Verdict,
}

/// Weights on the spec's weight side of the share vectors of the first `m`
/// units, as `(weight, weighted p-moment)` for counted units.
fn weighted_moments(spec: &LossSpec, series: &PairedSeries, m: usize) -> Result<Vec<(f64, f64)>> {
    let x = &series.realized()[..m];
    let y = &series.target()[..m];
    let weights = if spec.has_unit_weights() {
        vec![Some(1.0); m]
    } else {
        let sx = numeric::sum(x);
        let sy = numeric::sum(y);
        if sx <= 0.0 || sy <= 0.0 {
            return Err(Error::ZeroTotal);
        }
        let xs: Vec<f64> = x.iter().map(|v| v / sx).collect();
        let ys: Vec<f64> = y.iter().map(|v| v / sy).collect();
        spec.weights(&xs, &ys)?
    };
    Ok(x.iter()
        .zip(y)
        .zip(weights)
        .filter_map(|((&xi, &yi), w)| w.map(|w| (w, w * (xi.powf(spec.p) + yi.powf(spec.p)))))
        .collect())
}

/// Prefix averages of the weights and weighted moments, plus the worst
/// average over `probes` random subsets of size `ceil(delta * n)`.
///
/// Probe `k` draws its subset from a generator seeded with `seed + k`, so the
/// result does not depend on evaluation order.
pub fn check_a2_cesaro(
    series: &PairedSeries,
    spec: &LossSpec,
    delta: f64,
    probes: usize,
    seed: u64,
    grid: &[usize],
    thresholds: &Thresholds,
) -> Result<CesaroCheck> {
    spec.validate()?;
    validate_grid(grid, series.len())?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if probes == 0 {
        return Err(Error::InvalidParameters("probes must be at least 1".into()));
    }
    let mut trajectory = Vec::with_capacity(grid.len());
    for &m in grid {
        let pairs = weighted_moments(spec, series, m)?;
        let w: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let v: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        trajectory.push(WeightedPoint {
            n: m,
            weight_avg: numeric::mean(&w),
            weighted_moment_avg: numeric::mean(&v),
        });
    }

    let values: Vec<f64> = weighted_moments(spec, series, series.len())?
        .into_iter()
        .map(|p| p.1)
        .collect();
    let full_average = numeric::mean(&values);
    let size = ((delta * values.len() as f64).ceil() as usize).clamp(1, values.len());
    let worst_subset_average = (0..probes)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let picked: Vec<f64> = rand::seq::index::sample(&mut rng, values.len(), size)
                .into_iter()
                .map(|i| values[i])
                .collect();
            numeric::mean(&picked)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);

    let weight_bound = trajectory
        .iter()
        .map(|t| t.weight_avg)
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if worst_subset_average <= thresholds.a2_subset_multiple * full_average {
        Verdict::Pass
    } else {
        Verdict::Warn
    };
    Ok(CesaroCheck {
        trajectory,
        probe: SubsetProbe {
            delta,
            probes,
            seed,
            full_average,
            worst_subset_average,
            weight_bound,
        },
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCheck {
    pub trajectory: Vec<SidePoint>,
    pub oscillation: f64,
    pub verdict: Verdict,
}

/// `S_x/m` and `S_y/m` along the grid; oscillation is the larger of the two
/// sides' tail `(max - min) / median`.
pub fn check_a3_means(
    series: &PairedSeries,
    grid: &[usize],
    tail_fraction: f64,
    thresholds: &Thresholds,
) -> Result<MeanCheck> {
    validate_grid(grid, series.len())?;
    let trajectory: Vec<SidePoint> = grid
        .iter()
        .map(|&m| SidePoint {
            n: m,
            realized: numeric::mean(&series.realized()[..m]),
            target: numeric::mean(&series.target()[..m]),
        })
        .collect();
    let tail = tail_positions(grid, tail_fraction);
    let rx: Vec<f64> = trajectory.iter().map(|t| t.realized).collect();
    let ry: Vec<f64> = trajectory.iter().map(|t| t.target).collect();
    let oscillation = relative_range(&pick(&rx, &tail)).max(relative_range(&pick(&ry, &tail)));
    let verdict = if oscillation < thresholds.a3_oscillation {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(MeanCheck {
        trajectory,
        oscillation,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightCheck {
    pub trajectory: Vec<SidePoint>,
    pub w_bar_x: f64,
    pub w_bar_y: f64,
    pub drift: f64,
    pub verdict: Verdict,
}

/// Prefix averages of `w(x_i)` and `w(y_i)` (shares within the prefix).
/// Drift is the larger relative change between the first tail point and
/// the last point.
pub fn check_a4_weights(
    series: &PairedSeries,
    spec: &LossSpec,
    grid: &[usize],
    tail_fraction: f64,
    thresholds: &Thresholds,
) -> Result<WeightCheck> {
    spec.validate()?;
    validate_grid(grid, series.len())?;
    let mut trajectory = Vec::with_capacity(grid.len());
    for &m in grid {
        let point = if spec.has_unit_weights() {
            SidePoint {
                n: m,
                realized: 1.0,
                target: 1.0,
            }
        } else {
            let x = &series.realized()[..m];
            let y = &series.target()[..m];
            let sx = numeric::sum(x);
            let sy = numeric::sum(y);
            if sx <= 0.0 || sy <= 0.0 {
                return Err(Error::ZeroTotal);
            }
            let wx: Vec<Option<f64>> = x.iter().map(|v| spec.weight(v / sx)).collect();
            let wy: Vec<Option<f64>> = y.iter().map(|v| spec.weight(v / sy)).collect();
            spec.enforce_policy(&wx)?;
            spec.enforce_policy(&wy)?;
            let wx: Vec<f64> = wx.into_iter().flatten().collect();
            let wy: Vec<f64> = wy.into_iter().flatten().collect();
            SidePoint {
                n: m,
                realized: numeric::mean(&wx),
                target: numeric::mean(&wy),
            }
        };
        trajectory.push(point);
    }
    let tail = tail_positions(grid, tail_fraction);
    let first = trajectory[tail[0]];
    let last = *trajectory.last().unwrap();
    let rel = |a: f64, b: f64| if b == 0.0 { 0.0 } else { ((b - a) / b).abs() };
    let drift = rel(first.realized, last.realized).max(rel(first.target, last.target));
    let verdict = if drift <= thresholds.a4_drift {
        Verdict::Pass
    } else {
        Verdict::Warn
    };
    Ok(WeightCheck {
        trajectory,
        w_bar_x: last.realized,
        w_bar_y: last.target,
        drift,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsePoint {
    pub n: usize,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseCheck {
    pub trajectory: Vec<SparsePoint>,
    pub verdict: Verdict,
}

/// `|B_m|` and `|B_m|/m` along the grid.
///
/// Verdict, with `f_last` the final fraction and `f_mid` the fraction at the
/// grid point closest to the geometric middle of the grid:
/// Pass if `f_last <= a5_pass_fraction` or `f_last < a5_decay_factor * f_mid`;
/// Fail if `f_last >= f_mid`; Warn otherwise.
pub fn check_a5_sparse(
    series: &PairedSeries,
    eps: &EpsilonSchedule,
    grid: &[usize],
    thresholds: &Thresholds,
) -> Result<SparseCheck> {
    validate_grid(grid, series.len())?;
    let mut trajectory = Vec::with_capacity(grid.len());
    for &m in grid {
        let count = sparse_set(series, eps, m)?.len();
        trajectory.push(SparsePoint {
            n: m,
            count,
            fraction: count as f64 / m as f64,
        });
    }
    let f_last = trajectory.last().unwrap().fraction;
    let mid_target = ((grid[0] as f64).ln() + (*grid.last().unwrap() as f64).ln()) / 2.0;
    let f_mid = trajectory
        .iter()
        .min_by(|a, b| {
            let da = ((a.n as f64).ln() - mid_target).abs();
            let db = ((b.n as f64).ln() - mid_target).abs();
            da.total_cmp(&db)
        })
        .unwrap()
        .fraction;
    let verdict = if f_last <= thresholds.a5_pass_fraction
        || f_last < thresholds.a5_decay_factor * f_mid
    {
        Verdict::Pass
    } else if f_last >= f_mid {
        Verdict::Fail
    } else {
        Verdict::Warn
    };
    Ok(SparseCheck {
        trajectory,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub a1: Verdict,
    pub a2: Verdict,
    pub a3: Verdict,
    pub a4: Verdict,
    pub a5: Verdict,
}

impl Verdicts {
    pub fn all(&self) -> [Verdict; 5] {
        [self.a1, self.a2, self.a3, self.a4, self.a5]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightLimits {
    pub w_bar_x: f64,
    pub w_bar_y: f64,
    pub drift: f64,
    pub trajectory: Vec<SidePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub grid: Vec<usize>,
    pub a1_moment_trajectory: Vec<SidePoint>,
    pub a1_range_ratio: f64,
    pub a2_weight_avg_trajectory: Vec<WeightedPoint>,
    pub a2_subset_probe: SubsetProbe,
    pub a3_mean_trajectory: Vec<SidePoint>,
    pub a3_oscillation: f64,
    pub a4_weight_limits: WeightLimits,
    pub a5_sparse_trajectory: Vec<SparsePoint>,
    pub verdicts: Verdicts,
    pub thresholds: Thresholds,
}

pub fn assumption_report(
    series: &PairedSeries,
    spec: &LossSpec,
    eps: &EpsilonSchedule,
    config: &DiagnosticConfig,
) -> Result<AssumptionReport> {
    spec.validate()?;
    eps.validate()?;
    let grid = config.grid_for(series.len())?;
    let th = &config.thresholds;
    let a1 = check_a1_moments(series, spec.p, &grid, config.tail_fraction, th)?;
    let a2 = check_a2_cesaro(
        series,
        spec,
        config.delta,
        config.probes,
        config.seed,
        &grid,
        th,
    )?;
    let a3 = check_a3_means(series, &grid, config.tail_fraction, th)?;
    let a4 = check_a4_weights(series, spec, &grid, config.tail_fraction, th)?;
    let a5 = check_a5_sparse(series, eps, &grid, th)?;
    Ok(AssumptionReport {
        grid,
        a1_moment_trajectory: a1.trajectory,
        a1_range_ratio: a1.range_ratio,
        a2_weight_avg_trajectory: a2.trajectory,
        a2_subset_probe: a2.probe,
        a3_mean_trajectory: a3.trajectory,
        a3_oscillation: a3.oscillation,
        a4_weight_limits: WeightLimits {
            w_bar_x: a4.w_bar_x,
            w_bar_y: a4.w_bar_y,
            drift: a4.drift,
            trajectory: a4.trajectory,
        },
        a5_sparse_trajectory: a5.trajectory,
        verdicts: Verdicts {
            a1: a1.verdict,
            a2: a2.verdict,
            a3: a3.verdict,
            a4: a4.verdict,
            a5: a5.verdict,
        },
        thresholds: *th,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(x: Vec<f64>, y: Vec<f64>) -> PairedSeries {
        PairedSeries::from_values(x, y).unwrap()
    }

    #[test]
    fn sparse_set_examples() {
        let s = series(vec![1.0; 4], vec![1.0, 1.0, 1.0, 10.0]);
        assert_eq!(sparse_set_at(&s, 1.0, 4).unwrap(), vec![3]);
        assert_eq!(sparse_set_at(&s, 0.5, 4).unwrap(), vec![0, 1, 2, 3]);
        let same = series(vec![2.0, 3.0, 9.0], vec![2.0, 3.0, 9.0]);
        assert!(sparse_set_at(&same, 1e-9, 3).unwrap().is_empty());
        assert!(sparse_set(&same, &EpsilonSchedule::default(), 2).unwrap().is_empty());
    }

    #[test]
    fn sparse_set_errors() {
        let s = series(vec![0.0, 1.0], vec![1.0, 1.0]);
        assert!(matches!(sparse_set_at(&s, 1.0, 1), Err(Error::ZeroTotal)));
        assert!(sparse_set_at(&s, 1.0, 3).is_err());
        assert!(sparse_set_at(&s, 1.0, 0).is_err());
    }

    #[test]
    fn epsilon_schedule_validation() {
        assert!(EpsilonSchedule::new(0.0, 0.5).is_err());
        assert!(EpsilonSchedule::new(1.0, 0.0).is_err());
        assert!(EpsilonSchedule::new(1.0, 1.5).is_err());
        let e = EpsilonSchedule::new(2.0, 0.5).unwrap();
        assert_eq!(e.at(4), 1.0);
        assert!(e.at(100) < e.at(99));
    }

    #[test]
    fn grid_shape() {
        let g = prefix_grid(10_000, 20);
        assert_eq!(g[0], 10);
        assert_eq!(*g.last().unwrap(), 10_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(prefix_grid(1, 20), vec![1]);
        assert_eq!(prefix_grid(3, 5), vec![3]);
        assert_eq!(prefix_grid(30, 3), vec![10, 17, 30]);
        assert!(validate_grid(&[2, 2], 5).is_err());
        assert!(validate_grid(&[1, 6], 5).is_err());
        assert!(validate_grid(&[], 5).is_err());
    }

    #[test]
    fn a1_constant_series_passes() {
        let s = series(vec![3.0; 200], vec![3.0; 200]);
        let grid = prefix_grid(200, 10);
        let c = check_a1_moments(&s, 2.0, &grid, 0.25, &Thresholds::default()).unwrap();
        assert!(c.trajectory.iter().all(|t| t.realized == 9.0 && t.target == 9.0));
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn a1_late_outlier_warns() {
        let mut x = vec![1.0; 400];
        x[399] = 1e6;
        let s = series(x.clone(), vec![1.0; 400]);
        let grid: Vec<usize> = (1..=40).map(|k| k * 10).collect();
        let c = check_a1_moments(&s, 1.0, &grid, 0.25, &Thresholds::default()).unwrap();
        let last = c.trajectory.last().unwrap();
        assert_eq!(last.realized, (399.0 + 1e6) / 400.0);
        assert_eq!(c.trajectory[38].realized, 1.0);
        assert_eq!(c.verdict, Verdict::Warn);
    }

    #[test]
    fn a1_small_sample_prefixes() {
        let s = series(vec![11.0, 999.0], vec![10.0, 990.0]);
        let c = check_a1_moments(&s, 1.0, &[1, 2], 0.25, &Thresholds::default()).unwrap();
        assert_eq!(c.trajectory[0].realized, 11.0);
        assert_eq!(c.trajectory[1].realized, 505.0);
    }

    #[test]
    fn a2_unit_weights_on_ones() {
        let s = series(vec![1.0; 50], vec![1.0; 50]);
        let grid = prefix_grid(50, 6);
        let c = check_a2_cesaro(&s, &LossSpec::squared(), 0.3, 20, 7, &grid, &Thresholds::default())
            .unwrap();
        assert!(c
            .trajectory
            .iter()
            .all(|t| t.weight_avg == 1.0 && t.weighted_moment_avg == 2.0));
        assert_eq!(c.probe.full_average, 2.0);
        assert_eq!(c.probe.worst_subset_average, 2.0);
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn a2_single_huge_unit_is_bounded_by_delta() {
        let mut x = vec![1.0; 100];
        x[17] = 1e5;
        let s = series(x, vec![1.0; 100]);
        let grid = prefix_grid(100, 5);
        let c = check_a2_cesaro(&s, &LossSpec::absolute(), 0.9, 50, 3, &grid, &Thresholds::default())
            .unwrap();
        // A subset of 90 units averages at most sum / 90.
        let bound = c.probe.full_average * 100.0 / 90.0;
        assert!(c.probe.worst_subset_average <= bound * (1.0 + 1e-12));
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn a2_rejects_bad_parameters() {
        let s = series(vec![1.0; 5], vec![1.0; 5]);
        let spec = LossSpec::absolute();
        let th = Thresholds::default();
        assert!(check_a2_cesaro(&s, &spec, 0.0, 5, 0, &[5], &th).is_err());
        assert!(check_a2_cesaro(&s, &spec, 1.0, 5, 0, &[5], &th).is_err());
        assert!(check_a2_cesaro(&s, &spec, 0.5, 0, 0, &[5], &th).is_err());
    }

    #[test]
    fn a3_constant_and_linear() {
        let th = Thresholds::default();
        let s = series(vec![4.0; 1000], vec![4.0; 1000]);
        let grid = prefix_grid(1000, 15);
        let c = check_a3_means(&s, &grid, 0.25, &th).unwrap();
        assert_eq!(c.oscillation, 0.0);
        assert_eq!(c.verdict, Verdict::Pass);

        let lin: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        let s = series(lin.clone(), lin);
        let grid = prefix_grid(1000, 40);
        let c = check_a3_means(&s, &grid, 0.25, &th).unwrap();
        for t in &c.trajectory {
            assert_eq!(t.realized, (t.n as f64 + 1.0) / 2.0);
        }
        assert!(c.oscillation > 0.05);
        assert_eq!(c.verdict, Verdict::Fail);
    }

    #[test]
    fn a4_unit_weights() {
        let s = series(vec![1.0, 5.0, 2.0], vec![2.0, 2.0, 2.0]);
        let c = check_a4_weights(&s, &LossSpec::absolute(), &[1, 2, 3], 0.25, &Thresholds::default())
            .unwrap();
        assert_eq!((c.w_bar_x, c.w_bar_y, c.drift), (1.0, 1.0, 0.0));
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn a4_inverse_weights_on_equal_shares_track_prefix_size() {
        let s = series(vec![7.0; 100], vec![7.0; 100]);
        let grid = vec![10, 50, 75, 100];
        let c = check_a4_weights(&s, &LossSpec::webster(), &grid, 0.25, &Thresholds::default())
            .unwrap();
        for t in &c.trajectory {
            assert!((t.realized - t.n as f64).abs() < 1e-9);
            assert!((t.target - t.n as f64).abs() < 1e-9);
        }
        assert!((c.w_bar_x - 100.0).abs() < 1e-9);
        // grows linearly: (100 - 75) / 100
        assert!((c.drift - 0.25).abs() < 1e-9);
        assert_eq!(c.verdict, Verdict::Warn);

        // At a single prefix the weights are exactly flat.
        let c = check_a4_weights(&s, &LossSpec::webster(), &[100], 0.25, &Thresholds::default())
            .unwrap();
        assert_eq!(c.drift, 0.0);
    }

    #[test]
    fn a4_skewed_series_matches_direct_evaluation() {
        let x: Vec<f64> = (1..=40).map(|i| (i * i) as f64).collect();
        let y: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let s = series(x.clone(), y.clone());
        let grid = vec![10, 20, 30, 40];
        let c = check_a4_weights(&s, &LossSpec::webster(), &grid, 0.25, &Thresholds::default())
            .unwrap();
        let direct = |v: &[f64], m: usize| {
            let tot: f64 = v[..m].iter().sum();
            v[..m].iter().map(|a| tot / a).sum::<f64>() / m as f64
        };
        for t in &c.trajectory {
            assert!((t.realized - direct(&x, t.n)).abs() / t.realized < 1e-12);
            assert!((t.target - direct(&y, t.n)).abs() / t.target < 1e-12);
        }
        let expected = ((direct(&x, 40) - direct(&x, 30)) / direct(&x, 40))
            .abs()
            .max(((direct(&y, 40) - direct(&y, 30)) / direct(&y, 40)).abs());
        assert!((c.drift - expected).abs() < 1e-12);
    }

    #[test]
    fn report_for_identical_constant_series() {
        let s = series(vec![5.0; 300], vec![5.0; 300]);
        let r = assumption_report(
            &s,
            &LossSpec::absolute(),
            &EpsilonSchedule::default(),
            &DiagnosticConfig::default(),
        )
        .unwrap();
        assert!(r.verdicts.all().iter().all(|v| *v == Verdict::Pass));
        assert!(r.a5_sparse_trajectory.iter().all(|p| p.count == 0));
        assert!(r.grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn report_linear_growth_fails_a3() {
        let lin: Vec<f64> = (1..=2000).map(|i| i as f64).collect();
        let s = series(lin.clone(), lin);
        let r = assumption_report(
            &s,
            &LossSpec::absolute(),
            &EpsilonSchedule::default(),
            &DiagnosticConfig::default(),
        )
        .unwrap();
        assert_eq!(r.verdicts.a3, Verdict::Fail);
    }
}
