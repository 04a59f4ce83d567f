//! Seeded synthetic data and convergence experiments.
//!
//! A generated unit `i` of a length-`n` series is
//!
//! ```text
//! b_i ~ base family
//! X_i = theta * b_i
//! Y_i = b_i * max(0, 1 + sigma_n * zeta_i) * (shock_i if i is a deviant)
//! ```
//!
//! with `sigma_n = s0 * n^(-gamma)`, `zeta_i ~ U(-1, 1)` and `theta` drawn
//! once per series from the latent mixing distribution. Deviants are placed
//! by the counting schedule `D(i) = round(b * i^(1 - beta))`: unit `i` is a
//! deviant when `D(i) > D(i - 1)`, so every prefix of length `m` holds
//! exactly `D(m)` deviants and the full series `round(b * n^(1 - beta))`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assumptions::EpsilonSchedule;
use crate::equivalence::{full_report, EquivalenceReport};
use crate::error::{Error, Result};
use crate::loss::{LossSpec, PairedSeries};
use crate::numeric;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BaseFamily {
    /// `U(lo, hi)` with `0 <= lo < hi`.
    UniformPositive { lo: f64, hi: f64 },
    /// Log-normal with log-scale standard deviation `shape` and median
    /// `scale`; right-skewed like populations of areas drawn without regard
    /// to population.
    SkewedHeavy { shape: f64, scale: f64 },
    /// `level + spread * U(-1, 1)` with `0 <= spread <= level`.
    ConstantPlusNoise { level: f64, spread: f64 },
}

impl BaseFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BaseFamily::UniformPositive { lo, hi } => lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi,
            BaseFamily::SkewedHeavy { shape, scale } => {
                shape.is_finite() && scale.is_finite() && shape > 0.0 && scale > 0.0
            }
            BaseFamily::ConstantPlusNoise { level, spread } => {
                level.is_finite() && level > 0.0 && spread >= 0.0 && spread <= level
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("invalid base family {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            BaseFamily::UniformPositive { lo, hi } => 0.5 * (lo + hi),
            BaseFamily::SkewedHeavy { shape, scale } => scale * (0.5 * shape * shape).exp(),
            BaseFamily::ConstantPlusNoise { level, .. } => level,
        }
    }

    pub fn std_dev(&self) -> f64 {
        match *self {
            BaseFamily::UniformPositive { lo, hi } => (hi - lo) / 12f64.sqrt(),
            BaseFamily::SkewedHeavy { shape, scale } => {
                let s2 = shape * shape;
                scale * ((s2.exp() - 1.0) * s2.exp()).sqrt()
            }
            BaseFamily::ConstantPlusNoise { spread, .. } => spread / 3f64.sqrt(),
        }
    }
}

/// Distribution of the latent scale `theta` multiplying every `X_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatentMixing {
    /// `theta = 1`.
    #[default]
    Degenerate,
    /// `theta = high` with probability `p_high`, else `low`.
    TwoPoint { low: f64, high: f64, p_high: f64 },
}

impl LatentMixing {
    fn validate(&self) -> Result<()> {
        match *self {
            LatentMixing::Degenerate => Ok(()),
            LatentMixing::TwoPoint { low, high, p_high } => {
                if low > 0.0 && high > 0.0 && low.is_finite() && high.is_finite() && (0.0..=1.0).contains(&p_high) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameters(format!("invalid latent mixing {self:?}")))
                }
            }
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            LatentMixing::Degenerate => 1.0,
            LatentMixing::TwoPoint { low, high, p_high } => {
                if rng.random::<f64>() < p_high {
                    high
                } else {
                    low
                }
            }
        }
    }
}

/// Relative noise `sigma_n = s0 * n^(-gamma)` on the targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub s0: f64,
    pub gamma: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { s0: 0.0, gamma: 0.0 }
    }

    pub fn sigma(&self, n: usize) -> f64 {
        self.s0 * (n as f64).powf(-self.gamma)
    }

    /// `E[max(0, 1 + sigma * zeta)]` in the limit `n -> infinity`.
    fn limit_mean(&self) -> f64 {
        if self.gamma > 0.0 || self.s0 <= 1.0 {
            1.0
        } else {
            (self.s0 + 1.0).powi(2) / (4.0 * self.s0)
        }
    }
}

/// Multiplicative shocks on a fraction `b * n^(-beta)` of the targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub b: f64,
    pub beta: f64,
    pub shock_lo: f64,
    pub shock_hi: f64,
}

impl Injection {
    fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.b)
            && (0.0..=1.0).contains(&self.beta)
            && self.shock_lo > 0.0
            && self.shock_lo <= self.shock_hi
            && self.shock_hi.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("invalid injection {self:?}")))
        }
    }

    /// `D(i) = round(b * i^(1 - beta))`.
    pub fn cumulative(&self, i: usize) -> usize {
        (self.b * (i as f64).powf(1.0 - self.beta)).round() as usize
    }

    /// Deviant fraction `b * n^(-beta)`.
    pub fn fraction(&self, n: usize) -> f64 {
        self.b * (n as f64).powf(-self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub base: BaseFamily,
    #[serde(default)]
    pub mixing: LatentMixing,
    pub noise: NoiseModel,
    #[serde(default)]
    pub injection: Option<Injection>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GeneratorSpec {
    /// Skewed base, `sigma_n = 0.1 n^(-1/4)`, shocks in `[2, 10]` on an
    /// `n^(-1/2)` fraction of units.
    fn default() -> Self {
        Self {
            base: BaseFamily::SkewedHeavy {
                shape: 1.0,
                scale: 1.0,
            },
            mixing: LatentMixing::Degenerate,
            noise: NoiseModel {
                s0: 0.1,
                gamma: 0.25,
            },
            injection: Some(Injection {
                b: 1.0,
                beta: 0.5,
                shock_lo: 2.0,
                shock_hi: 10.0,
            }),
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.mixing.validate()?;
        if !(self.noise.s0 >= 0.0 && self.noise.s0.is_finite() && self.noise.gamma >= 0.0) {
            return Err(Error::InvalidParameters(format!("invalid noise {:?}", self.noise)));
        }
        if let Some(inj) = &self.injection {
            inj.validate()?;
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of deviants in a series of length `n`.
    pub fn deviant_count(&self, n: usize) -> usize {
        self.injection.map_or(0, |inj| inj.cumulative(n))
    }

    /// `mu_x(theta) / mu_y(theta)`: the limit of `S_x / S_y` given `theta`.
    pub fn limit_ratio(&self, theta: f64) -> f64 {
        let shock_excess = match self.injection {
            Some(inj) if inj.beta == 0.0 => inj.b * (0.5 * (inj.shock_lo + inj.shock_hi) - 1.0),
            _ => 0.0,
        };
        theta / (self.noise.limit_mean() * (1.0 + shock_excess))
    }
}

/// A generated series with its latent draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub series: PairedSeries,
    pub theta: f64,
    pub deviants: usize,
    pub limit_ratio: f64,
}

pub fn sample(gen: &GeneratorSpec, n: usize) -> Result<Sample> {
    gen.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameters("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);
    let theta = gen.mixing.draw(&mut rng);
    let sigma = gen.noise.sigma(n);
    let lognormal = match gen.base {
        BaseFamily::SkewedHeavy { shape, scale } => Some(
            LogNormal::new(scale.ln(), shape)
                .map_err(|e| Error::InvalidParameters(e.to_string()))?,
        ),
        _ => None,
    };

    let mut realized = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    let mut deviants = 0;
    for i in 1..=n {
        let base = match gen.base {
            BaseFamily::UniformPositive { lo, hi } => rng.random_range(lo..hi),
            BaseFamily::SkewedHeavy { .. } => lognormal.as_ref().unwrap().sample(&mut rng),
            BaseFamily::ConstantPlusNoise { level, spread } => {
                level + spread * rng.random_range(-1.0..=1.0)
            }
        };
        let zeta: f64 = rng.random_range(-1.0..=1.0);
        let mut y = base * (1.0 + sigma * zeta).max(0.0);
        if let Some(inj) = &gen.injection {
            if inj.cumulative(i) > inj.cumulative(i - 1) {
                let shock = if inj.shock_lo == inj.shock_hi {
                    inj.shock_lo
                } else {
                    rng.random_range(inj.shock_lo..inj.shock_hi)
                };
                y *= shock;
                deviants += 1;
            }
        }
        realized.push(theta * base);
        target.push(y);
    }
    Ok(Sample {
        series: PairedSeries::from_values(realized, target)?,
        theta,
        deviants,
        limit_ratio: gen.limit_ratio(theta),
    })
}

/// Deterministic for fixed `(gen, n)`, including `gen.seed`.
pub fn generate(gen: &GeneratorSpec, n: usize) -> Result<PairedSeries> {
    sample(gen, n).map(|s| s.series)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the experiment cell `(n, replicate)`; depends on nothing else.
pub fn cell_seed(master: u64, n: usize, replicate: usize) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(n as u64)) ^ splitmix64(!(replicate as u64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    /// `|c_n - mu_x/mu_y|` against the conditional limit given `theta`.
    pub c_error: f64,
    pub diff: f64,
    pub keydiff: f64,
    pub sparse_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatePoints {
    pub points: Vec<RatePoint>,
}

impl RatePoints {
    pub fn at(&self, n: usize) -> impl Iterator<Item = &RatePoint> {
        self.points.iter().filter(move |p| p.n == n)
    }

    /// Distinct `n` values in ascending order.
    pub fn grid(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.points.iter().map(|p| p.n).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    /// Per-`n` median of `|field|`.
    pub fn medians(&self, field: RateField) -> Vec<(usize, f64)> {
        let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for p in &self.points {
            groups.entry(p.n).or_default().push(field.get(p).abs());
        }
        groups
            .into_iter()
            .map(|(n, v)| (n, numeric::median(&v).unwrap_or(f64::NAN)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateField {
    CError,
    Diff,
    Keydiff,
    SparseFraction,
}

impl RateField {
    pub fn get(self, p: &RatePoint) -> f64 {
        match self {
            RateField::CError => p.c_error,
            RateField::Diff => p.diff,
            RateField::Keydiff => p.keydiff,
            RateField::SparseFraction => p.sparse_fraction,
        }
    }
}

impl FromStr for RateField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c_error" => Ok(RateField::CError),
            "diff" => Ok(RateField::Diff),
            "keydiff" => Ok(RateField::Keydiff),
            "sparse_fraction" => Ok(RateField::SparseFraction),
            other => Err(Error::InvalidParameters(format!(
                "unknown field `{other}` (expected c_error, diff or keydiff)"
            ))),
        }
    }
}

impl fmt::Display for RateField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateField::CError => "c_error",
            RateField::Diff => "diff",
            RateField::Keydiff => "keydiff",
            RateField::SparseFraction => "sparse_fraction",
        })
    }
}

/// Runs every `(n, replicate)` cell, in parallel. Each cell draws from its
/// own [`cell_seed`], so the output is independent of scheduling.
pub fn run_convergence(
    gen: &GeneratorSpec,
    spec: &LossSpec,
    n_grid: &[usize],
    replicates: usize,
    eps: &EpsilonSchedule,
) -> Result<RatePoints> {
    gen.validate()?;
    spec.validate()?;
    eps.validate()?;
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters(
            "n grid must be nonempty, positive and strictly increasing".into(),
        ));
    }
    if replicates == 0 {
        return Err(Error::InvalidParameters("replicates must be at least 1".into()));
    }
    let cells: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    let points = cells
        .par_iter()
        .map(|&(n, replicate)| {
            let seed = cell_seed(gen.seed, n, replicate);
            run_cell(gen, spec, eps, n, replicate, seed).map_err(|e| Error::Cell {
                n,
                replicate,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatePoints { points })
}

fn run_cell(
    gen: &GeneratorSpec,
    spec: &LossSpec,
    eps: &EpsilonSchedule,
    n: usize,
    replicate: usize,
    seed: u64,
) -> Result<RatePoint> {
    let s = sample(&gen.with_seed(seed), n)?;
    let report = full_report(spec, &s.series, eps)?;
    Ok(RatePoint {
        n,
        replicate,
        seed,
        c_error: (report.c_n - s.limit_ratio).abs(),
        diff: report.difference,
        keydiff: report.keydiff,
        sparse_fraction: report.sparse_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// `(n, median |field|)` used in the fit.
    pub levels: Vec<(usize, f64)>,
}

/// Least-squares fit of `ln(median |field|)` on `ln n`.
pub fn fit_rate(points: &RatePoints, field: RateField) -> Result<RateFit> {
    fit_power_law(&points.medians(field))
}

/// Least-squares fit of `ln y` on `ln n` for `(n, y)` pairs.
pub fn fit_power_law(levels: &[(usize, f64)]) -> Result<RateFit> {
    if levels.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 distinct n values, got {}",
            levels.len()
        )));
    }
    if let Some((n, v)) = levels.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateInput(format!(
            "aggregated value at n={n} is {v}; a log-log fit needs positive values"
        )));
    }
    let xs: Vec<f64> = levels.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|(_, v)| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all n values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        stderr,
        levels: levels.to_vec(),
    })
}

/// The two-unit example where absolute differences tie but the index of
/// dissimilarity does not.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallSampleDemo {
    pub sets: [PairedSeries; 2],
    pub reports: [EquivalenceReport; 2],
    pub total_absolute_difference: [f64; 2],
    pub index_of_dissimilarity: [f64; 2],
}

pub fn small_sample_demo() -> SmallSampleDemo {
    use crate::loss::{named_measure, IdNormalization, Measure};

    let target = vec![10.0, 990.0];
    let sets = [
        PairedSeries::from_values(vec![11.0, 999.0], target.clone()).expect("valid constants"),
        PairedSeries::from_values(vec![15.0, 995.0], target).expect("valid constants"),
    ];
    let eps = EpsilonSchedule::default();
    let spec = LossSpec::absolute();
    let report = |s: &PairedSeries| full_report(&spec, s, &eps).expect("valid constants");
    let measure = |m: Measure, s: &PairedSeries| named_measure(&m, s).expect("valid constants").value;
    let id = Measure::IndexOfDissimilarity(IdNormalization::PerUnit);
    SmallSampleDemo {
        reports: [report(&sets[0]), report(&sets[1])],
        total_absolute_difference: [
            measure(Measure::TotalAbsoluteDifference, &sets[0]),
            measure(Measure::TotalAbsoluteDifference, &sets[1]),
        ],
        index_of_dissimilarity: [measure(id, &sets[0]), measure(id, &sets[1])],
        sets,
    }
}
