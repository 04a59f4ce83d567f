//! Level- and share-based weighted exponentiated difference losses.
//!
//! The loss family is `|a - b|^p * w(c)` with `w(t) = t^q`, `q <= 0`,
//! evaluated either on raw levels or on shares of the series total. The
//! crate computes both forms, the constant linking them, diagnostics for
//! the regularity conditions under which they agree asymptotically, and
//! seeded Monte Carlo experiments measuring how fast they converge.

pub mod assumptions;
pub mod cli;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod loss;
pub mod numeric;
pub mod simulate;

pub use assumptions::{
    assumption_report, sparse_set, AssumptionReport, DiagnosticConfig, EpsilonSchedule, Verdict,
};
pub use equivalence::{
    c_ratio, equivalence_difference, equivalence_ratio, full_report, k_constant, keydiff,
    lemma1_check, per_unit_diffs, EquivalenceReport, Ratio,
};
pub use error::{Error, Result};
pub use loss::{
    level_loss, named_measure, share_loss, IdNormalization, LossSpec, Measure, Normalization,
    PairedSeries, WeightSide, ZeroWeightPolicy,
};
pub use simulate::{
    fit_rate, generate, run_convergence, GeneratorSpec, RateField, RateFit, RatePoint, RatePoints,
};
