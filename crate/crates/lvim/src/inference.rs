//! Importance trajectories and Wald inference.
//!
//! An importance trajectory contrasts two cross-fitted predictiveness
//! values at each timepoint in a window: the add-in importance of a
//! variable set compares the marginal set (variables plus base set,
//! evaluated on half 1 of the sample split) against the base set alone
//! (half 0); the leave-out importance compares all variables (half 1)
//! against all variables minus the set (half 0). Evaluating the two sides
//! on independent halves keeps the contrast's influence values valid even
//! when the true importance is zero.
//!
//! Each subject contributes influence only through the half its component
//! was evaluated on; those contributions are scaled by 2 so that the
//! plug-in standard error `sd(eif)/sqrt(n)` targets the sample-split
//! asymptotic variance. Wald confidence intervals and p-values follow for
//! per-timepoint values ([`infer_timepoint`]) and for trajectory summaries
//! via the delta method ([`infer_summary`]).

use std::fmt;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::panel::{FoldAssignment, LongitudinalDataset, TimeWindow, VariableSet};
use crate::predictiveness::{
    crossfit_predictiveness, FoldsUsed, PredictivenessMeasure,
};
use crate::rng::derive_stream;
use crate::special::{normal_cdf, normal_quantile};
use crate::summaries::{self, SummarySpec};

/// Seed-path tag for per-(timepoint, half) crossfit cells.
const TAG_TRAJECTORY: u64 = 0x5452_414A;

/// Whether a trajectory contrasts add-in or leave-out predictiveness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VimKind {
    AddIn,
    LeaveOut,
}

impl fmt::Display for VimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VimKind::AddIn => "add-in",
            VimKind::LeaveOut => "leave-out",
        })
    }
}

impl std::str::FromStr for VimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "add-in" => Ok(VimKind::AddIn),
            "leave-out" => Ok(VimKind::LeaveOut),
            other => Err(Error::Argument(format!(
                "unknown importance kind: {other} (expected add-in or leave-out)"
            ))),
        }
    }
}

/// The two cross-fitted predictiveness values behind one timepoint's
/// importance estimate, with their fold diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentPair {
    /// Larger-set predictiveness (marginal or total), evaluated on half 1.
    pub big: f64,
    /// Smaller-set predictiveness (irreducible or residual), on half 0.
    pub small: f64,
    pub big_folds: FoldsUsed,
    pub small_folds: FoldsUsed,
}

/// A per-timepoint importance trajectory with contrast influence values.
#[derive(Debug, Clone)]
pub struct VimTrajectory {
    pub kind: VimKind,
    pub measure: PredictivenessMeasure,
    /// Human-readable learner description.
    pub learner: String,
    pub window: TimeWindow,
    /// Time labels for the window's timepoints.
    pub times: Vec<f64>,
    /// Importance estimates, one per window timepoint.
    pub estimates: Vec<f64>,
    pub components: Vec<ComponentPair>,
    /// n x |window| contrast influence values: `2 * phi_big` on half-1
    /// rows, `-2 * phi_small` on half-0 rows, zero in skipped folds.
    pub eif: Array2<f64>,
}

impl VimTrajectory {
    pub fn n(&self) -> usize {
        self.eif.nrows()
    }

    fn offset_of(&self, t: usize) -> Result<usize> {
        if t < self.window.start() || t > self.window.end() {
            return Err(Error::Argument(format!(
                "time index {t} outside the estimated window [{}, {}]",
                self.window.start(),
                self.window.end()
            )));
        }
        Ok(t - self.window.start())
    }
}

/// Direction of the Wald test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    /// H1: the parameter exceeds zero (importance levels).
    Greater,
    /// H1: the parameter differs from zero (trend coefficients).
    TwoSided,
}

impl fmt::Display for Sidedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sidedness::Greater => "greater",
            Sidedness::TwoSided => "two-sided",
        })
    }
}

/// A Wald interval and test for one scalar target.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InferenceResult {
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub sidedness: Sidedness,
    /// Set when the influence values had zero variance; the p-value is
    /// reported as 1 and the interval collapses to the estimate.
    pub degenerate: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::Argument(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    Ok(())
}

fn wald(estimate: f64, se: f64, alpha: f64, sidedness: Sidedness) -> InferenceResult {
    let z = normal_quantile(1.0 - alpha / 2.0);
    let degenerate = se == 0.0;
    let p_value = if degenerate {
        1.0
    } else {
        let zstat = estimate / se;
        match sidedness {
            Sidedness::Greater => normal_cdf(-zstat),
            Sidedness::TwoSided => 2.0 * normal_cdf(-zstat.abs()),
        }
    };
    InferenceResult {
        estimate,
        se,
        ci_lower: estimate - z * se,
        ci_upper: estimate + z * se,
        p_value,
        alpha,
        sidedness,
        degenerate,
    }
}

/// `sd(values)/sqrt(n)` with the population (1/n) variance.
fn influence_se(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (var / n).sqrt()
}

fn at_time(err: Error, t: usize, label: f64) -> Error {
    let wrap = |m: String| format!("timepoint {label} (index {t}): {m}");
    match err {
        Error::Argument(m) => Error::Argument(wrap(m)),
        Error::Validation(m) => Error::Validation(wrap(m)),
        Error::Parse(m) => Error::Parse(wrap(m)),
        Error::Measurement(m) => Error::Measurement(wrap(m)),
        Error::Estimation(m) => Error::Estimation(wrap(m)),
        Error::UnsupportedInference(m) => Error::UnsupportedInference(wrap(m)),
        Error::Io(e) => Error::Io(e),
    }
}

/// Contrast two variable sets at every timepoint of the window.
#[allow(clippy::too_many_arguments)]
fn estimate_trajectory(
    data: &LongitudinalDataset,
    kind: VimKind,
    big_cols: &[usize],
    small_cols: &[usize],
    spec: &LearnerSpec,
    measure: &PredictivenessMeasure,
    folds: &FoldAssignment,
    window: &TimeWindow,
    seed: u64,
) -> Result<VimTrajectory> {
    spec.validate()?;
    measure.validate()?;
    if window.end() >= data.t_count() {
        return Err(Error::Argument(format!(
            "window end {} out of range for {} timepoints",
            window.end(),
            data.t_count()
        )));
    }
    if measure.requires_binary() {
        for t in window.indices() {
            if let Some(&bad) = data.outcomes_at(t).iter().find(|&&v| v != 0.0 && v != 1.0) {
                return Err(Error::Validation(format!(
                    "{measure} requires a binary outcome; found y = {bad} at time {}",
                    data.time_labels()[t]
                )));
            }
        }
    }

    let timepoints: Vec<usize> = window.indices().collect();
    // Timepoint cells are independent given their derived seeds.
    let cells: Vec<Result<_>> = timepoints
        .par_iter()
        .map(|&t| {
            let label = data.time_labels()[t];
            let big = crossfit_predictiveness(
                data,
                big_cols,
                spec,
                measure,
                folds,
                1,
                t,
                derive_stream(seed, &[TAG_TRAJECTORY, t as u64, 1]),
            )
            .map_err(|e| at_time(e, t, label))?;
            let small = crossfit_predictiveness(
                data,
                small_cols,
                spec,
                measure,
                folds,
                0,
                t,
                derive_stream(seed, &[TAG_TRAJECTORY, t as u64, 0]),
            )
            .map_err(|e| at_time(e, t, label))?;
            Ok((big, small))
        })
        .collect();

    let n = data.n();
    let mut estimates = Vec::with_capacity(timepoints.len());
    let mut components = Vec::with_capacity(timepoints.len());
    let mut eif = Array2::zeros((n, timepoints.len()));
    for (j, cell) in cells.into_iter().enumerate() {
        let (big, small) = cell?;
        estimates.push(big.value - small.value);
        for i in 0..n {
            // One of the two is zero for every subject: components live on
            // disjoint halves. The factor 2 restores the half-sample scale.
            eif[(i, j)] = 2.0 * big.eif[i] - 2.0 * small.eif[i];
        }
        components.push(ComponentPair {
            big: big.value,
            small: small.value,
            big_folds: big.folds_used,
            small_folds: small.folds_used,
        });
    }

    Ok(VimTrajectory {
        kind,
        measure: *measure,
        learner: spec.label(),
        window: *window,
        times: timepoints.iter().map(|&t| data.time_labels()[t]).collect(),
        estimates,
        components,
        eif,
    })
}

/// Add-in importance: marginal predictiveness of `s` plus the base set
/// (half 1) minus irreducible predictiveness of the base set alone (half 0).
#[allow(clippy::too_many_arguments)]
pub fn estimate_addin_trajectory(
    data: &LongitudinalDataset,
    varset: &VariableSet,
    spec: &LearnerSpec,
    measure: &PredictivenessMeasure,
    folds: &FoldAssignment,
    window: &TimeWindow,
    seed: u64,
) -> Result<VimTrajectory> {
    estimate_trajectory(
        data,
        VimKind::AddIn,
        &varset.marginal(),
        varset.base(),
        spec,
        measure,
        folds,
        window,
        seed,
    )
}

/// Leave-out importance: total predictiveness of all variables (half 1)
/// minus residual predictiveness without `s` (half 0).
#[allow(clippy::too_many_arguments)]
pub fn estimate_leaveout_trajectory(
    data: &LongitudinalDataset,
    varset: &VariableSet,
    spec: &LearnerSpec,
    measure: &PredictivenessMeasure,
    folds: &FoldAssignment,
    window: &TimeWindow,
    seed: u64,
) -> Result<VimTrajectory> {
    let all: Vec<usize> = (0..data.p()).collect();
    estimate_trajectory(
        data,
        VimKind::LeaveOut,
        &all,
        &varset.complement_of_s(data.p()),
        spec,
        measure,
        folds,
        window,
        seed,
    )
}

/// Wald inference for the importance level at one timepoint (one-sided
/// greater by default: importance levels are tested against zero).
pub fn infer_timepoint(traj: &VimTrajectory, t: usize, alpha: f64) -> Result<InferenceResult> {
    check_alpha(alpha)?;
    let j = traj.offset_of(t)?;
    let column: Vec<f64> = traj.eif.column(j).to_vec();
    Ok(wald(
        traj.estimates[j],
        influence_se(&column),
        alpha,
        Sidedness::Greater,
    ))
}

/// Delta-method Wald inference for a summary of the trajectory.
///
/// The per-subject influence is the summary gradient (at the estimated
/// trajectory) applied to the subject's contrast influence row. Trend
/// coefficients are tested two-sided; level-type summaries (mean, AUTC,
/// GMRC) one-sided greater. A summary without a gradient is refused.
pub fn infer_summary(
    traj: &VimTrajectory,
    summary: SummarySpec,
    alpha: f64,
) -> Result<InferenceResult> {
    check_alpha(alpha)?;
    let out = summaries::evaluate(summary, &traj.estimates, &traj.times)?;
    let Some(gradient) = out.gradient else {
        let note = out
            .gradient_note
            .unwrap_or_else(|| format!("{summary} has no gradient at this trajectory"));
        return Err(Error::UnsupportedInference(note));
    };
    let influence: Vec<f64> = (0..traj.n())
        .map(|i| {
            gradient
                .iter()
                .zip(traj.eif.row(i))
                .map(|(g, e)| g * e)
                .sum()
        })
        .collect();
    let sidedness = match summary {
        SummarySpec::LinearTrend(_) => Sidedness::TwoSided,
        _ => Sidedness::Greater,
    };
    Ok(wald(out.value, influence_se(&influence), alpha, sidedness))
}
