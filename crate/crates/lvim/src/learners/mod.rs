//! Outcome regression learners.
//!
//! All learners model a binary outcome probability except `MeanOnly`, which
//! also accepts real outcomes. Probability predictions are clamped to
//! [1e-6, 1 - 1e-6]. Fits are deterministic given (spec, data, seed): the
//! seed drives inner cross-validation splits only, never the optimizers.

mod lasso;
mod logistic;
mod stack;
mod stumps;

use crate::error::{Error, Result};
use crate::rng::derive_stream;
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use stumps::Stump;

/// Probability clamp applied to every prediction.
pub const PROB_CLAMP: f64 = 1e-6;

/// Declarative learner description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerSpec {
    /// Intercept-only model predicting the training mean.
    MeanOnly,
    /// Logistic regression via iteratively reweighted least squares.
    Logistic,
    /// L1-penalized logistic regression; the penalty is chosen on an inner
    /// cross-validated deviance over a log-spaced grid.
    LassoLogistic {
        #[serde(default = "default_lambda_grid")]
        lambda_grid: usize,
        #[serde(default = "default_lasso_cv")]
        inner_cv_folds: usize,
    },
    /// Gradient-boosted depth-1 trees with logistic loss.
    BoostedStumps {
        #[serde(default = "default_rounds")]
        rounds: usize,
        #[serde(default = "default_shrinkage")]
        shrinkage: f64,
        #[serde(default = "default_min_node")]
        min_node: usize,
    },
    /// Convex stack of the members, weighted to minimize inner-CV mean
    /// negative log-likelihood.
    Stacked {
        members: Vec<LearnerSpec>,
        #[serde(default)]
        inner_cv_folds: Option<usize>,
    },
    /// Selects the single member with the lowest inner-CV loss.
    Discrete {
        members: Vec<LearnerSpec>,
        #[serde(default)]
        inner_cv_folds: Option<usize>,
    },
}

fn default_lambda_grid() -> usize {
    100
}

fn default_lasso_cv() -> usize {
    10
}

fn default_rounds() -> usize {
    500
}

fn default_shrinkage() -> f64 {
    0.1
}

fn default_min_node() -> usize {
    10
}

impl LearnerSpec {
    pub fn lasso_default() -> Self {
        LearnerSpec::LassoLogistic { lambda_grid: 100, inner_cv_folds: 10 }
    }

    pub fn stumps_default() -> Self {
        LearnerSpec::BoostedStumps { rounds: 500, shrinkage: 0.1, min_node: 10 }
    }

    pub fn stacked_default() -> Self {
        LearnerSpec::Stacked {
            members: vec![LearnerSpec::Logistic, Self::lasso_default(), Self::stumps_default()],
            inner_cv_folds: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::MeanOnly | LearnerSpec::Logistic => Ok(()),
            LearnerSpec::LassoLogistic { lambda_grid, inner_cv_folds } => {
                if *lambda_grid < 2 {
                    return Err(Error::Argument("lasso needs a grid of at least 2 penalties".into()));
                }
                if *inner_cv_folds < 2 {
                    return Err(Error::Argument("lasso needs at least 2 inner CV folds".into()));
                }
                Ok(())
            }
            LearnerSpec::BoostedStumps { rounds, shrinkage, min_node } => {
                if *rounds == 0 {
                    return Err(Error::Argument("boosting needs at least one round".into()));
                }
                if !(*shrinkage > 0.0 && *shrinkage <= 1.0) {
                    return Err(Error::Argument(format!("shrinkage {shrinkage} outside (0, 1]")));
                }
                if *min_node == 0 {
                    return Err(Error::Argument("min_node must be positive".into()));
                }
                Ok(())
            }
            LearnerSpec::Stacked { members, inner_cv_folds }
            | LearnerSpec::Discrete { members, inner_cv_folds } => {
                if members.len() < 2 {
                    return Err(Error::Argument("an ensemble needs at least 2 members".into()));
                }
                if members.iter().any(|m| {
                    matches!(m, LearnerSpec::Stacked { .. } | LearnerSpec::Discrete { .. })
                }) {
                    return Err(Error::Argument("ensemble members must not be ensembles".into()));
                }
                if let Some(k) = inner_cv_folds {
                    if *k < 2 {
                        return Err(Error::Argument("inner CV needs at least 2 folds".into()));
                    }
                }
                for m in members {
                    m.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Short human-readable description used in reports.
    pub fn label(&self) -> String {
        match self {
            LearnerSpec::MeanOnly => "mean-only".into(),
            LearnerSpec::Logistic => "logistic".into(),
            LearnerSpec::LassoLogistic { .. } => "lasso-logistic".into(),
            LearnerSpec::BoostedStumps { .. } => "boosted-stumps".into(),
            LearnerSpec::Stacked { members, .. } => {
                let inner: Vec<String> = members.iter().map(|m| m.label()).collect();
                format!("stacked({})", inner.join("+"))
            }
            LearnerSpec::Discrete { members, .. } => {
                let inner: Vec<String> = members.iter().map(|m| m.label()).collect();
                format!("discrete({})", inner.join("+"))
            }
        }
    }
}

/// Convergence and selection record attached to every fit.
#[derive(Clone, Debug, Default)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub notes: Vec<String>,
    /// Inner-CV losses: (label, mean held-out negative log-likelihood).
    pub inner_cv: Vec<(String, f64)>,
}

/// Fitted parameters by model family.
#[derive(Clone, Debug)]
pub enum ModelKind {
    Intercept {
        value: f64,
    },
    /// beta[0] is the intercept; beta[1..] align with the feature columns.
    Linear {
        beta: Vec<f64>,
    },
    Stumps {
        bias: f64,
        stumps: Vec<Stump>,
    },
    Ensemble {
        members: Vec<FittedModel>,
        weights: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct FittedModel {
    pub label: String,
    pub kind: ModelKind,
    pub diagnostics: FitDiagnostics,
}

impl FittedModel {
    /// Predicted outcome probability (or conditional mean for `MeanOnly` on
    /// real outcomes) for each row of `x`.
    pub fn predict(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        let n = x.nrows();
        match &self.kind {
            ModelKind::Intercept { value } => vec![*value; n],
            ModelKind::Linear { beta } => {
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let mut eta = beta[0];
                    for j in 0..x.ncols() {
                        eta += beta[j + 1] * x[(i, j)];
                    }
                    out.push(clamp_prob(sigmoid(eta)));
                }
                out
            }
            ModelKind::Stumps { bias, stumps } => {
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let mut f = *bias;
                    for s in stumps {
                        f += if x[(i, s.feature)] <= s.threshold { s.left } else { s.right };
                    }
                    out.push(clamp_prob(sigmoid(f)));
                }
                out
            }
            ModelKind::Ensemble { members, weights } => {
                let mut out = vec![0.0; n];
                for (m, &w) in members.iter().zip(weights) {
                    if w == 0.0 {
                        continue;
                    }
                    for (o, p) in out.iter_mut().zip(m.predict(x)) {
                        *o += w * p;
                    }
                }
                out
            }
        }
    }
}

/// Overflow-safe logistic function.
pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Mean negative log-likelihood of Bernoulli outcomes under predictions `p`.
pub fn mean_nll(p: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &yi) in p.iter().zip(y) {
        let pi = clamp_prob(pi);
        total -= yi * pi.ln() + (1.0 - yi) * (1.0 - pi).ln();
    }
    total / y.len() as f64
}

pub(crate) fn is_binary(y: &[f64]) -> bool {
    y.iter().all(|&v| v == 0.0 || v == 1.0)
}

fn intercept_model(label: &str, y: &[f64], clamp: bool, note: Option<String>) -> FittedModel {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let value = if clamp { clamp_prob(mean) } else { mean };
    let mut diagnostics = FitDiagnostics { converged: true, iterations: 0, ..Default::default() };
    if let Some(n) = note {
        diagnostics.notes.push(n);
    }
    FittedModel { label: label.into(), kind: ModelKind::Intercept { value }, diagnostics }
}

/// Fits `spec` to the rows of `x` with outcomes `y`.
///
/// The seed only feeds inner cross-validation splits (lasso penalty choice,
/// ensemble weight estimation); optimizer paths are deterministic. Constant
/// outcomes or empty feature sets degrade to the intercept-only model with a
/// diagnostic note rather than failing.
pub fn fit(spec: &LearnerSpec, x: ArrayView2<f64>, y: &[f64], seed: u64) -> Result<FittedModel> {
    spec.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::Argument(format!(
            "{} rows of features but {} outcomes",
            x.nrows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Argument("cannot fit on an empty sample".into()));
    }
    if matches!(spec, LearnerSpec::MeanOnly) {
        return Ok(intercept_model("mean-only", y, is_binary(y), None));
    }
    if !is_binary(y) {
        let bad = y.iter().find(|&&v| v != 0.0 && v != 1.0).unwrap();
        return Err(Error::Validation(format!(
            "{} requires a binary outcome; found y = {bad}",
            spec.label()
        )));
    }
    let label = spec.label();
    if x.ncols() == 0 {
        return Ok(intercept_model(&label, y, true, Some("no features; intercept-only fit".into())));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Ok(intercept_model(
            &label,
            y,
            true,
            Some("constant outcome; intercept-only fit".into()),
        ));
    }
    match spec {
        LearnerSpec::MeanOnly => unreachable!("handled above"),
        LearnerSpec::Logistic => {
            let (beta, diagnostics) = logistic::fit_irls(x, y)?;
            Ok(FittedModel { label, kind: ModelKind::Linear { beta }, diagnostics })
        }
        LearnerSpec::LassoLogistic { lambda_grid, inner_cv_folds } => {
            let (beta, diagnostics) = lasso::fit_lasso(x, y, *lambda_grid, *inner_cv_folds, seed)?;
            Ok(FittedModel { label, kind: ModelKind::Linear { beta }, diagnostics })
        }
        LearnerSpec::BoostedStumps { rounds, shrinkage, min_node } => {
            let (bias, stumps, diagnostics) = stumps::fit_stumps(x, y, *rounds, *shrinkage, *min_node);
            Ok(FittedModel { label, kind: ModelKind::Stumps { bias, stumps }, diagnostics })
        }
        LearnerSpec::Stacked { members, inner_cv_folds } => {
            stack::fit_ensemble(members, *inner_cv_folds, false, x, y, seed, &label)
        }
        LearnerSpec::Discrete { members, inner_cv_folds } => {
            stack::fit_ensemble(members, *inner_cv_folds, true, x, y, seed, &label)
        }
    }
}

/// Plain k-fold assignment over `n` rows (no sample splitting), used by
/// inner cross-validation. Fold sizes differ by at most one.
pub(crate) fn inner_folds(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let k = k.clamp(2, n.max(2));
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = crate::rng::CounterRng::from_path(seed, &[0x4956_4356]);
    rng.shuffle(&mut order);
    let mut fold = vec![0usize; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % k;
    }
    fold
}

pub(crate) fn member_seed(seed: u64, member: usize, fold: usize) -> u64 {
    derive_stream(seed, &[0x4D45_4D42, member as u64, fold as u64])
}
