//! Diagnostics relating mean level losses to mean share losses.
//!
//! For a loss `L` and its share counterpart `l`, the quantities reported
//! here are the ratio of totals `c_n = S_x / S_y`, the scale constant `K`,
//! the difference `mean(L) - K * mean(l)`, both orientations of the ratio
//! of means, the per-unit differences `L_i - K * l_i`, and the key
//! difference `(1/n) sum w(x_i) (|X_i - Y_i|^p - |X_i - c_n Y_i|^p)` that
//! controls the level/share gap.

use serde::{Serialize, Serializer};

use crate::assumptions::{sparse_set, EpsilonSchedule};
use crate::error::{Error, Result};
use crate::loss::{level_terms, share_terms, LossSpec, PairedSeries, WeightSide};
use crate::numeric;

/// Ratio of totals `S_x / S_y`.
pub fn c_ratio(series: &PairedSeries) -> Result<f64> {
    let sy = series.target_total();
    if sy <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    Ok(series.realized_total() / sy)
}

/// Both sides of `|x_i - y_i|^p = |X_i - c_n Y_i|^p / S_x^p` for unit
/// `index` (zero-based). Returns `(lhs, rhs)`.
pub fn lemma1_check(series: &PairedSeries, index: usize, p: f64) -> Result<(f64, f64)> {
    let n = series.len();
    if index >= n {
        return Err(Error::IndexOutOfRange { index, n });
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidSpec(format!("p must be positive, got {p}")));
    }
    let sx = series.realized_total();
    let sy = series.target_total();
    if sx <= 0.0 || sy <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    let (xi, yi) = (series.realized()[index], series.target()[index]);
    let lhs = (xi / sx - yi / sy).abs().powf(p);
    // X_i - c_n Y_i evaluated as (X_i S_y - Y_i S_x) / S_y
    let level_diff = numeric::difference_of_products(xi, sy, yi, sx) / sy;
    let rhs = level_diff.abs().powf(p) / sx.powf(p);
    Ok((lhs, rhs))
}

/// Sample means `(S_x / n, S_y / n)`.
pub fn sample_means(series: &PairedSeries) -> (f64, f64) {
    let n = series.len() as f64;
    (series.realized_total() / n, series.target_total() / n)
}

/// The scale constant `K` from plug-in sample means.
///
/// | loss                          | `K`        |
/// |-------------------------------|------------|
/// | unit weights (`q = 0`)        | `mu_x^p`   |
/// | `p = 1, q = -1` (APE)         | `1`        |
/// | any other `q < 0`             | mean of the weight side (`mu_y` for target weights, `mu_x` for realized) |
pub fn k_constant(spec: &LossSpec, series: &PairedSeries) -> Result<f64> {
    spec.validate()?;
    let (mu_x, mu_y) = sample_means(series);
    let k = if spec.has_unit_weights() {
        mu_x.powf(spec.p)
    } else if spec.p == 1.0 && spec.q == -1.0 {
        1.0
    } else {
        match spec.weight_side {
            WeightSide::Realized => mu_x,
            WeightSide::Target => mu_y,
        }
    };
    if k <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    Ok(k)
}

/// Everything derived from one (spec, series) pair, computed once.
struct Components {
    c: f64,
    mu_x: f64,
    mu_y: f64,
    k: f64,
    level: Vec<Option<f64>>,
    share: Vec<Option<f64>>,
}

impl Components {
    fn new(spec: &LossSpec, series: &PairedSeries) -> Result<Self> {
        let c = c_ratio(series)?;
        let (mu_x, mu_y) = sample_means(series);
        let k = k_constant(spec, series)?;
        let level = level_terms(spec, series)?;
        let share = share_terms(spec, series)?;
        Ok(Self {
            c,
            mu_x,
            mu_y,
            k,
            level,
            share,
        })
    }

    fn mean_level(&self) -> f64 {
        mean_counted(&self.level)
    }

    fn mean_share(&self) -> f64 {
        mean_counted(&self.share)
    }

    fn per_unit(&self) -> Vec<Option<f64>> {
        self.level
            .iter()
            .zip(&self.share)
            .map(|(l, s)| match (l, s) {
                (Some(l), Some(s)) => Some(l - self.k * s),
                _ => None,
            })
            .collect()
    }
}

fn mean_counted(terms: &[Option<f64>]) -> f64 {
    let counted: Vec<f64> = terms.iter().flatten().copied().collect();
    numeric::mean(&counted)
}

/// `mean(L) - K * mean(l)`.
pub fn equivalence_difference(spec: &LossSpec, series: &PairedSeries) -> Result<f64> {
    let parts = Components::new(spec, series)?;
    Ok(parts.mean_level() - parts.k * parts.mean_share())
}

/// A ratio that is undefined when its denominator is zero. Serializes as a
/// number or `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    Undefined,
}

impl Ratio {
    pub fn of(numerator: f64, denominator: f64) -> Self {
        if denominator == 0.0 {
            Ratio::Undefined
        } else {
            Ratio::Value(numerator / denominator)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::Undefined => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Ratio::Undefined)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => serializer.serialize_f64(*v),
            Ratio::Undefined => serializer.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPair {
    /// `mean(l) / mean(L)`.
    pub share_over_level: Ratio,
    /// `mean(L) / mean(l)`.
    pub level_over_share: Ratio,
}

pub fn equivalence_ratio(spec: &LossSpec, series: &PairedSeries) -> Result<RatioPair> {
    let parts = Components::new(spec, series)?;
    Ok(ratio_pair(parts.mean_level(), parts.mean_share()))
}

fn ratio_pair(level: f64, share: f64) -> RatioPair {
    RatioPair {
        share_over_level: Ratio::of(share, level),
        level_over_share: Ratio::of(level, share),
    }
}

/// `(1/n) sum w(s_i) (|X_i - Y_i|^p - |X_i - c_n Y_i|^p)` where `s_i` is
/// the share on the weight side. Exactly zero when `c_n == 1`.
pub fn keydiff(spec: &LossSpec, series: &PairedSeries) -> Result<f64> {
    spec.validate()?;
    let c = c_ratio(series)?;
    let weights = if spec.has_unit_weights() {
        vec![Some(1.0); series.len()]
    } else {
        let x = series.realized_shares()?;
        let y = series.target_shares()?;
        spec.weights(x.shares(), y.shares())?
    };
    let terms: Vec<f64> = series
        .realized()
        .iter()
        .zip(series.target())
        .zip(&weights)
        .filter_map(|((&x, &y), w)| {
            w.map(|w| w * (spec.difference_power(x, y) - spec.difference_power(x, c * y)))
        })
        .collect();
    Ok(numeric::mean(&terms))
}

/// `L_i - K * l_i` per unit; `None` for units skipped by the zero-weight
/// policy.
pub fn per_unit_diffs(spec: &LossSpec, series: &PairedSeries) -> Result<Vec<Option<f64>>> {
    Ok(Components::new(spec, series)?.per_unit())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub c_n: f64,
    pub mu_x_hat: f64,
    pub mu_y_hat: f64,
    pub k: f64,
    pub mean_level: f64,
    pub mean_share: f64,
    pub difference: f64,
    pub ratio_share_over_level: Ratio,
    pub ratio_level_over_share: Ratio,
    pub keydiff: f64,
    pub per_unit_diff_max: f64,
    pub sparse_fraction: f64,
}

/// All of the above for one dataset, plus the fraction of units in the
/// sparse deviation set at `n`.
pub fn full_report(
    spec: &LossSpec,
    series: &PairedSeries,
    eps: &EpsilonSchedule,
) -> Result<EquivalenceReport> {
    let parts = Components::new(spec, series)?;
    let n = series.len();
    let mean_level = parts.mean_level();
    let mean_share = parts.mean_share();
    let ratios = ratio_pair(mean_level, mean_share);
    let per_unit_diff_max = parts
        .per_unit()
        .into_iter()
        .flatten()
        .fold(0.0_f64, |m, d| m.max(d.abs()));
    let sparse = sparse_set(series, eps, n)?;
    Ok(EquivalenceReport {
        n,
        c_n: parts.c,
        mu_x_hat: parts.mu_x,
        mu_y_hat: parts.mu_y,
        k: parts.k,
        mean_level,
        mean_share,
        difference: mean_level - parts.k * mean_share,
        ratio_share_over_level: ratios.share_over_level,
        ratio_level_over_share: ratios.level_over_share,
        keydiff: keydiff(spec, series)?,
        per_unit_diff_max,
        sparse_fraction: sparse.len() as f64 / n as f64,
    })
}
