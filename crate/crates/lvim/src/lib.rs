//! Longitudinal variable importance.
//!
//! Estimates how much a set of features adds to (or how much is lost by
//! removing it from) the best achievable predictiveness of an outcome at
//! each timepoint of a longitudinal study, then summarizes the resulting
//! importance trajectory (mean level, linear trend, area under the curve,
//! geometric mean rate of change) with Wald-type confidence intervals and
//! tests built from estimated influence functions.
//!
//! Estimation is cross-fitted and sample-split: predictiveness of the larger
//! feature set is estimated on one half of the subjects and predictiveness
//! of the smaller set on the other, with K-fold cross-fitting nested inside
//! each half. A deterministic counter-based RNG and explicit seed-derivation
//! paths make every result reproducible at any thread count.

pub mod error;
pub mod inference;
pub mod interp;
pub mod learners;
pub mod panel;
pub mod predictiveness;
pub mod report;
pub mod rng;
pub mod runtime;
pub mod simulate;
pub mod special;
pub mod summaries;

pub use error::{Error, Result};
