//! Predictiveness measures and their influence functions.
//!
//! A predictiveness measure scores how well a fitted prediction function
//! describes the outcome on held-out data: AUC for ranking, R-squared for
//! squared error, and classification accuracy at a threshold. Each point
//! estimate is returned together with per-subject efficient-influence
//! values so downstream contrasts can build Wald variance estimates.
//!
//! [`crossfit_predictiveness`] evaluates a measure with K-fold
//! cross-fitting restricted to one half of a sample split: for each fold,
//! the learner is trained on the half's remaining folds and the measure is
//! computed on the held-out fold. Fold-level values are averaged (the
//! measure is not pooled across folds) and influence values are assembled
//! subject-wise from each subject's own evaluation fold.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{self, LearnerSpec};
use crate::panel::{select_submatrix, FoldAssignment, LongitudinalDataset};
use crate::rng::derive_stream;

/// Seed-path tag for per-fold learner fits.
const TAG_CROSSFIT: u64 = 0x4346_4954;

fn default_threshold() -> f64 {
    0.5
}

/// Which predictiveness measure to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PredictivenessMeasure {
    /// Area under the ROC curve (tie-corrected Mann-Whitney statistic).
    Auc,
    /// Proportion of outcome variance explained: 1 - MSE / Var(Y).
    RSquared,
    /// Fraction of outcomes matched by thresholding the prediction.
    Accuracy {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
}

impl PredictivenessMeasure {
    /// Accuracy at the conventional 0.5 threshold.
    pub fn accuracy_default() -> Self {
        PredictivenessMeasure::Accuracy {
            threshold: default_threshold(),
        }
    }

    /// Whether the measure is defined only for 0/1 outcomes.
    pub fn requires_binary(&self) -> bool {
        match self {
            PredictivenessMeasure::Auc | PredictivenessMeasure::Accuracy { .. } => true,
            PredictivenessMeasure::RSquared => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let PredictivenessMeasure::Accuracy { threshold } = self {
            if !threshold.is_finite() || *threshold <= 0.0 || *threshold >= 1.0 {
                return Err(Error::Argument(format!(
                    "accuracy threshold must lie strictly between 0 and 1, got {threshold}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PredictivenessMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictivenessMeasure::Auc => write!(f, "auc"),
            PredictivenessMeasure::RSquared => write!(f, "r-squared"),
            PredictivenessMeasure::Accuracy { threshold } => write!(f, "accuracy@{threshold}"),
        }
    }
}

impl FromStr for PredictivenessMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(PredictivenessMeasure::Auc),
            "r-squared" => Ok(PredictivenessMeasure::RSquared),
            "accuracy" => Ok(PredictivenessMeasure::accuracy_default()),
            other => {
                if let Some(thr) = other.strip_prefix("accuracy@") {
                    let threshold: f64 = thr.parse().map_err(|_| {
                        Error::Argument(format!("invalid accuracy threshold: {thr}"))
                    })?;
                    let measure = PredictivenessMeasure::Accuracy { threshold };
                    measure.validate()?;
                    Ok(measure)
                } else {
                    Err(Error::Argument(format!(
                        "unknown measure: {other} (expected auc, r-squared, accuracy, or accuracy@<t>)"
                    )))
                }
            }
        }
    }
}

/// A fold that was dropped from a cross-fitted evaluation, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFold {
    pub fold: usize,
    pub reason: String,
}

/// Which folds contributed to a cross-fitted value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldsUsed {
    /// Sample-split half the evaluation ran on; `None` for a plain
    /// full-sample evaluation.
    pub half: Option<u8>,
    pub total: usize,
    pub used: usize,
    pub skipped: Vec<SkippedFold>,
}

impl FoldsUsed {
    fn full_sample() -> Self {
        FoldsUsed {
            half: None,
            total: 1,
            used: 1,
            skipped: Vec::new(),
        }
    }
}

impl fmt::Display for FoldsUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.half {
            None => write!(f, "full sample (no cross-fitting)"),
            Some(h) => {
                write!(f, "half {h}: used {} of {} folds", self.used, self.total)?;
                for s in &self.skipped {
                    write!(f, "; skipped fold {} ({})", s.fold, s.reason)?;
                }
                Ok(())
            }
        }
    }
}

/// A measure value with per-subject influence values.
#[derive(Debug, Clone, Serialize)]
pub struct PredictivenessEstimate {
    pub value: f64,
    /// Centered influence values, one per subject. For cross-fitted
    /// estimates the vector spans the full sample, with zeros for subjects
    /// outside the evaluated half or in skipped folds.
    pub eif: Vec<f64>,
    pub measure: PredictivenessMeasure,
    pub folds_used: FoldsUsed,
}

fn check_lengths(pred: &[f64], y: &[f64]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::Argument("empty prediction vector".into()));
    }
    if pred.len() != y.len() {
        return Err(Error::Argument(format!(
            "prediction and outcome lengths differ: {} vs {}",
            pred.len(),
            y.len()
        )));
    }
    Ok(())
}

fn check_binary(y: &[f64], measure: &PredictivenessMeasure) -> Result<()> {
    if !learners::is_binary(y) {
        let bad = y.iter().find(|&&v| v != 0.0 && v != 1.0).unwrap();
        return Err(Error::Validation(format!(
            "{measure} requires a binary outcome; found y = {bad}"
        )));
    }
    Ok(())
}

fn center(eif: &mut [f64]) {
    let mean = eif.iter().sum::<f64>() / eif.len() as f64;
    for e in eif.iter_mut() {
        *e -= mean;
    }
}

/// Tie-corrected Mann-Whitney AUC with its influence values.
///
/// The statistic is accumulated in integer half-units (two per strict win,
/// one per tie), so it agrees exactly with the exhaustive pairwise count.
/// Case influence is `(F0(s) - auc) / pi1`, control influence
/// `((1 - F1(s)) - auc) / pi0`, with F0/F1 the within-class empirical score
/// CDFs under the tie-midpoint convention.
pub fn estimate_auc(scores: &[f64], y: &[f64]) -> Result<PredictivenessEstimate> {
    let measure = PredictivenessMeasure::Auc;
    check_lengths(scores, y)?;
    check_binary(y, &measure)?;
    let n = scores.len();
    let n1 = y.iter().filter(|&&v| v == 1.0).count();
    let n0 = n - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::Measurement(format!(
            "AUC is undefined with a single outcome class ({n1} cases, {n0} controls)"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // First sweep over tie groups: exact win/tie counts in half-units.
    let mut half_units: u64 = 0;
    let mut controls_below = 0u64;
    let mut group = 0;
    while group < n {
        let mut end = group;
        while end < n && scores[order[end]] == scores[order[group]] {
            end += 1;
        }
        let c1 = order[group..end].iter().filter(|&&i| y[i] == 1.0).count() as u64;
        let c0 = (end - group) as u64 - c1;
        half_units += c1 * (2 * controls_below + c0);
        controls_below += c0;
        group = end;
    }
    let value = half_units as f64 / (2 * n1 as u64 * n0 as u64) as f64;

    // Second sweep: within-class CDFs at each tie group feed the EIF.
    let (pi1, pi0) = (n1 as f64 / n as f64, n0 as f64 / n as f64);
    let mut eif = vec![0.0; n];
    let mut cases_below = 0usize;
    let mut ctrls_below = 0usize;
    group = 0;
    while group < n {
        let mut end = group;
        while end < n && scores[order[end]] == scores[order[group]] {
            end += 1;
        }
        let c1 = order[group..end].iter().filter(|&&i| y[i] == 1.0).count();
        let c0 = end - group - c1;
        let f0 = (ctrls_below as f64 + 0.5 * c0 as f64) / n0 as f64;
        let f1 = (cases_below as f64 + 0.5 * c1 as f64) / n1 as f64;
        for &i in &order[group..end] {
            eif[i] = if y[i] == 1.0 {
                (f0 - value) / pi1
            } else {
                ((1.0 - f1) - value) / pi0
            };
        }
        cases_below += c1;
        ctrls_below += c0;
        group = end;
    }
    center(&mut eif);

    Ok(PredictivenessEstimate {
        value,
        eif,
        measure,
        folds_used: FoldsUsed::full_sample(),
    })
}

/// R-squared (1 - MSE / Var(Y)) with delta-method influence values.
pub fn estimate_r2(pred: &[f64], y: &[f64]) -> Result<PredictivenessEstimate> {
    check_lengths(pred, y)?;
    let n = pred.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let mse = pred
        .iter()
        .zip(y)
        .map(|(&f, &yi)| (yi - f) * (yi - f))
        .sum::<f64>()
        / n;
    let var = y.iter().map(|&yi| (yi - ybar) * (yi - ybar)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::Measurement(
            "R-squared is undefined for a constant outcome (zero variance)".into(),
        ));
    }
    let value = 1.0 - mse / var;
    // Ratio delta method: d(1 - a/b) = -da/b + (a/b^2) db, applied to the
    // component influences a_i - a and b_i - b.
    let mut eif: Vec<f64> = pred
        .iter()
        .zip(y)
        .map(|(&f, &yi)| {
            let ga = (yi - f) * (yi - f) - mse;
            let gb = (yi - ybar) * (yi - ybar) - var;
            -ga / var + mse / (var * var) * gb
        })
        .collect();
    center(&mut eif);

    Ok(PredictivenessEstimate {
        value,
        eif,
        measure: PredictivenessMeasure::RSquared,
        folds_used: FoldsUsed::full_sample(),
    })
}

/// Classification accuracy at a threshold: predictions strictly above the
/// threshold are called positive.
pub fn estimate_accuracy(pred: &[f64], y: &[f64], threshold: f64) -> Result<PredictivenessEstimate> {
    let measure = PredictivenessMeasure::Accuracy { threshold };
    measure.validate()?;
    check_lengths(pred, y)?;
    check_binary(y, &measure)?;
    let n = pred.len() as f64;
    let correct: Vec<f64> = pred
        .iter()
        .zip(y)
        .map(|(&f, &yi)| ((f > threshold) == (yi == 1.0)) as u8 as f64)
        .collect();
    let value = correct.iter().sum::<f64>() / n;
    let mut eif: Vec<f64> = correct.iter().map(|&c| c - value).collect();
    center(&mut eif);

    Ok(PredictivenessEstimate {
        value,
        eif,
        measure,
        folds_used: FoldsUsed::full_sample(),
    })
}

/// Evaluate `measure` on one prediction/outcome pair.
pub fn evaluate_measure(
    measure: &PredictivenessMeasure,
    pred: &[f64],
    y: &[f64],
) -> Result<PredictivenessEstimate> {
    match measure {
        PredictivenessMeasure::Auc => estimate_auc(pred, y),
        PredictivenessMeasure::RSquared => estimate_r2(pred, y),
        PredictivenessMeasure::Accuracy { threshold } => estimate_accuracy(pred, y, *threshold),
    }
}

/// Cross-fitted predictiveness of the feature columns `columns` at time
/// index `t`, restricted to one half of the sample split.
///
/// For each fold within the half, the learner is fit on the half's other
/// folds with a fold-specific derived seed and the measure is evaluated on
/// the held-out fold. The value is the mean of fold-level values. A fold
/// whose evaluation fails with a measurement error (e.g. a single-class
/// fold under AUC) is skipped and recorded in `folds_used`; influence
/// values for its subjects stay zero. Any other error aborts the call.
#[allow(clippy::too_many_arguments)]
pub fn crossfit_predictiveness(
    data: &LongitudinalDataset,
    columns: &[usize],
    spec: &LearnerSpec,
    measure: &PredictivenessMeasure,
    folds: &FoldAssignment,
    half: u8,
    t: usize,
    seed: u64,
) -> Result<PredictivenessEstimate> {
    spec.validate()?;
    measure.validate()?;
    if half > 1 {
        return Err(Error::Argument(format!("half must be 0 or 1, got {half}")));
    }
    if t >= data.t_count() {
        return Err(Error::Argument(format!(
            "time index {t} out of range for {} timepoints",
            data.t_count()
        )));
    }
    if folds.n() != data.n() {
        return Err(Error::Argument(format!(
            "fold assignment covers {} subjects but the data has {}",
            folds.n(),
            data.n()
        )));
    }
    if let Some(&bad) = columns.iter().find(|&&c| c >= data.p()) {
        return Err(Error::Argument(format!(
            "feature column {bad} out of range for {} features",
            data.p()
        )));
    }

    let k = folds.k();
    let x = data.features_at(t);
    let y = data.outcomes_at(t);

    // Folds are independent; evaluate them in parallel and assemble in
    // fold order so results do not depend on scheduling.
    type FoldOutcome = (Vec<usize>, f64, Vec<f64>);
    let per_fold: Vec<Result<FoldOutcome>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (train, eval) = folds.train_eval(half, fold);
            let x_train = select_submatrix(x.view(), &train, columns);
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let fit_seed = derive_stream(seed, &[TAG_CROSSFIT, fold as u64]);
            let fitted = learners::fit(spec, x_train.view(), &y_train, fit_seed)?;
            let x_eval = select_submatrix(x.view(), &eval, columns);
            let y_eval: Vec<f64> = eval.iter().map(|&i| y[i]).collect();
            let pred = fitted.predict(&x_eval.view());
            let est = evaluate_measure(measure, &pred, &y_eval)?;
            Ok((eval, est.value, est.eif))
        })
        .collect();

    let n = data.n();
    let mut values = Vec::with_capacity(k);
    let mut eif = vec![0.0; n];
    let mut skipped = Vec::new();
    for (fold, outcome) in per_fold.into_iter().enumerate() {
        match outcome {
            Ok((eval, value, fold_eif)) => {
                values.push(value);
                for (e, subject) in fold_eif.into_iter().zip(eval) {
                    eif[subject] = e;
                }
            }
            Err(Error::Measurement(reason)) => skipped.push(SkippedFold { fold, reason }),
            Err(other) => return Err(other),
        }
    }
    if values.is_empty() {
        let last = skipped.last().map(|s| s.reason.clone()).unwrap_or_default();
        return Err(Error::Estimation(format!(
            "all {k} folds on half {half} failed for {measure} at time index {t}: {last}"
        )));
    }

    let value = values.iter().sum::<f64>() / values.len() as f64;
    Ok(PredictivenessEstimate {
        value,
        eif,
        measure: *measure,
        folds_used: FoldsUsed {
            half: Some(half),
            total: k,
            used: values.len(),
            skipped,
        },
    })
}
