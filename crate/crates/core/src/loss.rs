//! Paired level data and the weighted exponentiated difference loss family.
//!
//! A loss is `|a - b|^p * w(c)` with `w(t) = t^q`, `q <= 0`, where `c` is
//! either the realized or the target argument. Level losses use the raw
//! values, share losses the values divided by their series total.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// Tolerance on the sum of a share vector.
pub const SHARE_SUM_TOLERANCE: f64 = 1e-12;

/// Aligned realized (`X`) and target (`Y`) levels for `n >= 1` units.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    ids: Vec<String>,
    realized: Vec<f64>,
    target: Vec<f64>,
}

impl PairedSeries {
    pub fn new(ids: Vec<String>, realized: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        if ids.len() != realized.len() || ids.len() != target.len() {
            return Err(Error::LengthMismatch {
                ids: ids.len(),
                realized: realized.len(),
                target: target.len(),
            });
        }
        if ids.is_empty() {
            return Err(Error::EmptySeries);
        }
        check_levels(&realized)?;
        check_levels(&target)?;
        Ok(Self {
            ids,
            realized,
            target,
        })
    }

    /// Builds a series with ids `"1"`, `"2"`, ...
    pub fn from_values(realized: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        let ids = (1..=realized.len()).map(|i| i.to_string()).collect();
        Self::new(ids, realized, target)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Always false: a valid series has at least one unit.
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Realizations `X`.
    pub fn realized(&self) -> &[f64] {
        &self.realized
    }

    /// Targets `Y`.
    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn realized_total(&self) -> f64 {
        numeric::sum(&self.realized)
    }

    pub fn target_total(&self) -> f64 {
        numeric::sum(&self.target)
    }

    pub fn realized_shares(&self) -> Result<ShareSeries> {
        to_shares(&self.realized)
    }

    pub fn target_shares(&self) -> Result<ShareSeries> {
        to_shares(&self.target)
    }

    /// The first `len` units. `len` is clamped to `1..=n`.
    pub fn prefix(&self, len: usize) -> PairedSeries {
        let len = len.clamp(1, self.len());
        PairedSeries {
            ids: self.ids[..len].to_vec(),
            realized: self.realized[..len].to_vec(),
            target: self.target[..len].to_vec(),
        }
    }

    /// Applies the same permutation to every column. `order` must be a
    /// permutation of `0..n`.
    pub fn permuted(&self, order: &[usize]) -> Result<PairedSeries> {
        let n = self.len();
        let distinct: HashSet<_> = order.iter().copied().collect();
        if order.len() != n || distinct.len() != n || order.iter().any(|&i| i >= n) {
            return Err(Error::InvalidParameters(
                "permutation must list every unit index exactly once".into(),
            ));
        }
        Ok(PairedSeries {
            ids: order.iter().map(|&i| self.ids[i].clone()).collect(),
            realized: order.iter().map(|&i| self.realized[i]).collect(),
            target: order.iter().map(|&i| self.target[i]).collect(),
        })
    }
}

fn check_levels(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { index, value });
        }
    }
    Ok(())
}

/// Shares of a series total; entries lie in `[0, 1]` and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareSeries {
    shares: Vec<f64>,
}

impl ShareSeries {
    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.shares
    }
}

/// Divides every entry by the total.
pub fn to_shares(values: &[f64]) -> Result<ShareSeries> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    check_levels(values)?;
    let total = numeric::sum(values);
    if total <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    let shares: Vec<f64> = values.iter().map(|v| v / total).collect();
    debug_assert!((numeric::sum(&shares) - 1.0).abs() <= 1e-12 * (1.0 + values.len() as f64).log2());
    Ok(ShareSeries { shares })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSide {
    /// `w(X_i)`.
    Realized,
    /// `w(Y_i)`.
    Target,
}

impl FromStr for WeightSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "realized" | "x" | "r" => Ok(WeightSide::Realized),
            "target" | "y" | "t" => Ok(WeightSide::Target),
            other => Err(Error::InvalidSpec(format!("unknown weight side `{other}`"))),
        }
    }
}

impl fmt::Display for WeightSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightSide::Realized => "realized",
            WeightSide::Target => "target",
        })
    }
}

/// What to do with a unit whose weight base is zero while `q < 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroWeightPolicy {
    #[default]
    Error,
    SkipUnit,
}

/// Parameters of `|X - Y|^p * w(.)` with `w(t) = t^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub p: f64,
    pub q: f64,
    pub weight_side: WeightSide,
    #[serde(default)]
    pub zero_weight_policy: ZeroWeightPolicy,
}

impl LossSpec {
    pub fn new(p: f64, q: f64, weight_side: WeightSide) -> Result<Self> {
        let spec = Self {
            p,
            q,
            weight_side,
            zero_weight_policy: ZeroWeightPolicy::Error,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::InvalidSpec(format!("p must be positive, got {}", self.p)));
        }
        if !(self.q.is_finite() && self.q <= 0.0) {
            return Err(Error::InvalidSpec(format!("q must be nonpositive, got {}", self.q)));
        }
        Ok(())
    }

    pub fn with_policy(mut self, policy: ZeroWeightPolicy) -> Self {
        self.zero_weight_policy = policy;
        self
    }

    /// `|X - Y|`.
    pub fn absolute() -> Self {
        Self::unchecked(1.0, 0.0, WeightSide::Realized)
    }

    /// `(X - Y)^2`.
    pub fn squared() -> Self {
        Self::unchecked(2.0, 0.0, WeightSide::Realized)
    }

    /// Absolute percentage error `|X - Y| / Y`.
    pub fn ape() -> Self {
        Self::unchecked(1.0, -1.0, WeightSide::Target)
    }

    /// Webster/Sainte-Laguë (chi-square) loss `(X - Y)^2 / Y`.
    pub fn webster() -> Self {
        Self::unchecked(2.0, -1.0, WeightSide::Target)
    }

    /// Huntington-Hill loss `(X - Y)^2 / X`.
    pub fn huntington_hill() -> Self {
        Self::unchecked(2.0, -1.0, WeightSide::Realized)
    }

    /// Cobb-Douglas loss `|X - Y|^p Y^q`.
    pub fn cobb_douglas(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, WeightSide::Target)
    }

    const fn unchecked(p: f64, q: f64, weight_side: WeightSide) -> Self {
        Self {
            p,
            q,
            weight_side,
            zero_weight_policy: ZeroWeightPolicy::Error,
        }
    }

    pub fn has_unit_weights(&self) -> bool {
        self.q == 0.0
    }

    /// `w(base)`; `None` when `q < 0` and the base is zero. `0^0` is one.
    pub fn weight(&self, base: f64) -> Option<f64> {
        if self.q == 0.0 {
            Some(1.0)
        } else if base == 0.0 {
            None
        } else {
            Some(base.powf(self.q))
        }
    }

    /// `|a - b|^p`.
    pub fn difference_power(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        if self.p == 1.0 {
            d
        } else if self.p == 2.0 {
            d * d
        } else {
            d.powf(self.p)
        }
    }

    /// Weight-side argument from a (realized, target) pair.
    pub fn weight_base(&self, realized: f64, target: f64) -> f64 {
        match self.weight_side {
            WeightSide::Realized => realized,
            WeightSide::Target => target,
        }
    }

    /// Per-unit weights on one side, `None` for skipped units. Errors on a
    /// zero base under [`ZeroWeightPolicy::Error`].
    pub fn weights(&self, realized: &[f64], target: &[f64]) -> Result<Vec<Option<f64>>> {
        let weights: Vec<Option<f64>> = realized
            .iter()
            .zip(target)
            .map(|(&x, &y)| self.weight(self.weight_base(x, y)))
            .collect();
        self.enforce_policy(&weights)?;
        Ok(weights)
    }

    /// Applies the zero-weight policy to a vector of optional weights.
    pub(crate) fn enforce_policy(&self, weights: &[Option<f64>]) -> Result<()> {
        if let Some(index) = weights.iter().position(Option::is_none) {
            if self.zero_weight_policy == ZeroWeightPolicy::Error {
                return Err(Error::ZeroWeightBase { index });
            }
            if weights.iter().all(Option::is_none) {
                return Err(Error::EmptyAfterSkip);
            }
        }
        Ok(())
    }

    /// Per-unit losses, `None` for units skipped by the zero-weight policy.
    pub fn terms(&self, realized: &[f64], target: &[f64]) -> Result<Vec<Option<f64>>> {
        self.validate()?;
        let weights = self.weights(realized, target)?;
        Ok(realized
            .iter()
            .zip(target)
            .zip(weights)
            .map(|((&x, &y), w)| w.map(|w| self.difference_power(x, y) * w))
            .collect())
    }

    pub fn label(&self) -> String {
        format!("p={},q={},side={}", self.p, self.q, self.weight_side)
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses `p,q,side`, e.g. `2,-1,target`. The side defaults to realized.
impl FromStr for LossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(Error::InvalidSpec(format!("expected `p,q[,side]`, got `{s}`")));
        }
        let p = parts[0]
            .parse::<f64>()
            .map_err(|_| Error::InvalidSpec(format!("bad p `{}`", parts[0])))?;
        let q = parts[1]
            .parse::<f64>()
            .map_err(|_| Error::InvalidSpec(format!("bad q `{}`", parts[1])))?;
        let side = match parts.get(2) {
            Some(side) => side.parse()?,
            None => WeightSide::Realized,
        };
        LossSpec::new(p, q, side)
    }
}

/// How a sum of per-unit losses is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `sum`.
    Total,
    /// `sum / n`.
    Mean,
    /// `sum / (2n)`.
    HalfMean,
    /// `sum / 2`.
    HalfTotal,
}

impl Normalization {
    pub fn apply(self, total: f64, units: usize) -> f64 {
        match self {
            Normalization::Total => total,
            Normalization::Mean => total / units as f64,
            Normalization::HalfMean => total / (2.0 * units as f64),
            Normalization::HalfTotal => total / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub value: f64,
    pub units_used: usize,
    pub normalization: Normalization,
}

fn aggregate(terms: &[Option<f64>], normalization: Normalization) -> Result<MeasureValue> {
    let counted: Vec<f64> = terms.iter().flatten().copied().collect();
    if counted.is_empty() {
        return Err(Error::EmptyAfterSkip);
    }
    Ok(MeasureValue {
        value: normalization.apply(numeric::sum(&counted), counted.len()),
        units_used: counted.len(),
        normalization,
    })
}

/// Per-unit level losses `L(X_i, Y_i)`.
pub fn level_terms(spec: &LossSpec, series: &PairedSeries) -> Result<Vec<Option<f64>>> {
    spec.terms(series.realized(), series.target())
}

/// Per-unit share losses `l(x_i, y_i)`.
pub fn share_terms(spec: &LossSpec, series: &PairedSeries) -> Result<Vec<Option<f64>>> {
    let x = series.realized_shares()?;
    let y = series.target_shares()?;
    spec.terms(x.shares(), y.shares())
}

/// Loss on level arguments.
pub fn level_loss(
    spec: &LossSpec,
    series: &PairedSeries,
    normalization: Normalization,
) -> Result<MeasureValue> {
    aggregate(&level_terms(spec, series)?, normalization)
}

/// Loss on share arguments; the weight is applied to the share on the
/// weight side.
pub fn share_loss(
    spec: &LossSpec,
    series: &PairedSeries,
    normalization: Normalization,
) -> Result<MeasureValue> {
    aggregate(&share_terms(spec, series)?, normalization)
}

/// Scaling convention for the index of dissimilarity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdNormalization {
    /// `(1 / 2n) * sum |x_i - y_i|`.
    #[default]
    PerUnit,
    /// `(1 / 2) * sum |x_i - y_i|`, the usual segregation-index scaling.
    Conventional,
}

impl FromStr for IdNormalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" | "per-unit" | "per_unit" => Ok(IdNormalization::PerUnit),
            "conventional" => Ok(IdNormalization::Conventional),
            other => Err(Error::InvalidParameters(format!(
                "unknown id normalization `{other}` (expected paper or conventional)"
            ))),
        }
    }
}

/// Whether a loss is evaluated on levels or on shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentMode {
    Level,
    Share,
}

/// The standard accuracy measures built from the loss family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    TotalAbsoluteDifference,
    MeanAbsoluteDifference,
    IndexOfDissimilarity(IdNormalization),
    TotalAbsoluteErrorOfShares,
    /// Webster/Sainte-Laguë chi-square on levels.
    ChiSquare,
    /// Chi-square loss on shares.
    PearsonChiSquareDivergence,
    HuntingtonHill,
    CobbDouglas {
        p: f64,
        q: f64,
        mode: ArgumentMode,
    },
}

impl Measure {
    /// The four measures compared in the two-input report, in display order.
    pub const COMPARISON_SET: [Measure; 4] = [
        Measure::TotalAbsoluteDifference,
        Measure::IndexOfDissimilarity(IdNormalization::PerUnit),
        Measure::ChiSquare,
        Measure::PearsonChiSquareDivergence,
    ];

    /// Underlying loss, argument mode and scaling.
    pub fn definition(&self) -> Result<(LossSpec, ArgumentMode, Normalization)> {
        use ArgumentMode::*;
        Ok(match *self {
            Measure::TotalAbsoluteDifference => (LossSpec::absolute(), Level, Normalization::Total),
            Measure::MeanAbsoluteDifference => (LossSpec::absolute(), Level, Normalization::Mean),
            Measure::IndexOfDissimilarity(norm) => (
                LossSpec::absolute(),
                Share,
                match norm {
                    IdNormalization::PerUnit => Normalization::HalfMean,
                    IdNormalization::Conventional => Normalization::HalfTotal,
                },
            ),
            Measure::TotalAbsoluteErrorOfShares => (LossSpec::absolute(), Share, Normalization::Total),
            Measure::ChiSquare => (LossSpec::webster(), Level, Normalization::Total),
            Measure::PearsonChiSquareDivergence => (LossSpec::webster(), Share, Normalization::Total),
            Measure::HuntingtonHill => (LossSpec::huntington_hill(), Level, Normalization::Total),
            Measure::CobbDouglas { p, q, mode } => {
                (LossSpec::cobb_douglas(p, q)?, mode, Normalization::Total)
            }
        })
    }

    pub fn name(&self) -> String {
        match *self {
            Measure::TotalAbsoluteDifference => "Total Absolute Difference".into(),
            Measure::MeanAbsoluteDifference => "Mean Absolute Difference".into(),
            Measure::IndexOfDissimilarity(_) => "Index of Dissimilarity".into(),
            Measure::TotalAbsoluteErrorOfShares => "Total Absolute Error of Shares".into(),
            Measure::ChiSquare => "Chi-Square".into(),
            Measure::PearsonChiSquareDivergence => "Pearson's Chi-Square Divergence".into(),
            Measure::HuntingtonHill => "Huntington-Hill".into(),
            Measure::CobbDouglas { p, q, mode } => {
                let mode = match mode {
                    ArgumentMode::Level => "level",
                    ArgumentMode::Share => "share",
                };
                format!("Cobb-Douglas (p={p}, q={q}, {mode})")
            }
        }
    }

    pub fn with_id_normalization(self, norm: IdNormalization) -> Self {
        match self {
            Measure::IndexOfDissimilarity(_) => Measure::IndexOfDissimilarity(norm),
            other => other,
        }
    }
}

/// Accepts short and long names, e.g. `tad`, `index-of-dissimilarity`,
/// `pearson`, `cobb-douglas:2,-0.5,share`.
impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        if let Some(args) = key.strip_prefix("cobb-douglas:").or_else(|| key.strip_prefix("cd:")) {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            let bad = || Error::UnknownMeasure(s.to_string());
            if !(2..=3).contains(&parts.len()) {
                return Err(bad());
            }
            let p = parts[0].parse().map_err(|_| bad())?;
            let q = parts[1].parse().map_err(|_| bad())?;
            let mode = match parts.get(2).copied() {
                None | Some("level") => ArgumentMode::Level,
                Some("share") => ArgumentMode::Share,
                Some(_) => return Err(bad()),
            };
            return Ok(Measure::CobbDouglas { p, q, mode });
        }
        Ok(match key.as_str() {
            "tad" | "total-absolute-difference" => Measure::TotalAbsoluteDifference,
            "mad" | "mean-absolute-difference" => Measure::MeanAbsoluteDifference,
            "id" | "index-of-dissimilarity" => {
                Measure::IndexOfDissimilarity(IdNormalization::PerUnit)
            }
            "taes" | "total-absolute-error-of-shares" => Measure::TotalAbsoluteErrorOfShares,
            "chi2" | "chi-square" | "webster" => Measure::ChiSquare,
            "pearson" | "pearson-chi-square-divergence" => Measure::PearsonChiSquareDivergence,
            "hh" | "huntington-hill" => Measure::HuntingtonHill,
            _ => return Err(Error::UnknownMeasure(s.to_string())),
        })
    }
}

pub fn named_measure(measure: &Measure, series: &PairedSeries) -> Result<MeasureValue> {
    let (spec, mode, normalization) = measure.definition()?;
    match mode {
        ArgumentMode::Level => level_loss(&spec, series, normalization),
        ArgumentMode::Share => share_loss(&spec, series, normalization),
    }
}
