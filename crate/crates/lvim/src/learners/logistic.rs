//! Logistic regression by iteratively reweighted least squares.

use super::{clamp_prob, sigmoid, FitDiagnostics};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;

const MAX_ITER: usize = 100;
const DEV_TOL: f64 = 1e-8;
/// Coefficient norm treated as evidence of (quasi-)separation.
const SEPARATION_NORM: f64 = 1e3;
/// Ridge penalty applied to the slopes after separation is detected.
const RIDGE: f64 = 1e-6;

fn deviance(x: ArrayView2<f64>, y: &[f64], beta: &[f64]) -> f64 {
    let mut dev = 0.0;
    for i in 0..y.len() {
        let mut eta = beta[0];
        for j in 0..x.ncols() {
            eta += beta[j + 1] * x[(i, j)];
        }
        let mu = clamp_prob(sigmoid(eta));
        dev -= 2.0 * (y[i] * mu.ln() + (1.0 - y[i]) * (1.0 - mu).ln());
    }
    dev
}

/// One weighted least-squares step: solves (X'WX + ridge) d = X'(y - mu)
/// for the Newton direction in place of the usual working-response form
/// (algebraically identical, avoids dividing by small weights).
fn newton_direction(
    x: ArrayView2<f64>,
    y: &[f64],
    beta: &[f64],
    ridge: f64,
) -> Result<Vec<f64>> {
    let d = x.ncols() + 1;
    let n = y.len();
    let mut xtwx = DMatrix::<f64>::zeros(d, d);
    let mut grad = DVector::<f64>::zeros(d);
    let mut row = vec![0.0; d];
    for i in 0..n {
        row[0] = 1.0;
        for j in 0..x.ncols() {
            row[j + 1] = x[(i, j)];
        }
        let mut eta = beta[0];
        for j in 0..x.ncols() {
            eta += beta[j + 1] * x[(i, j)];
        }
        let mu = sigmoid(eta);
        let w = (mu * (1.0 - mu)).max(1e-10);
        let r = y[i] - mu;
        for a in 0..d {
            grad[a] += row[a] * r;
            for b in a..d {
                xtwx[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            xtwx[(a, b)] = xtwx[(b, a)];
        }
        if a > 0 {
            xtwx[(a, a)] += ridge;
            grad[a] -= ridge * beta[a];
        }
    }
    match xtwx.clone().cholesky() {
        Some(ch) => Ok(ch.solve(&grad).iter().copied().collect()),
        None => {
            // Singular information matrix (e.g. collinear columns): fall
            // back to a slightly ridged solve.
            for a in 1..d {
                xtwx[(a, a)] += 1e-8;
            }
            let ch = xtwx
                .cholesky()
                .ok_or_else(|| Error::Estimation("logistic normal equations are singular".into()))?;
            Ok(ch.solve(&grad).iter().copied().collect())
        }
    }
}

/// Fits the model, restarting once with a small ridge penalty if the
/// coefficient norm diverges (quasi-separation).
pub(super) fn fit_irls(x: ArrayView2<f64>, y: &[f64]) -> Result<(Vec<f64>, FitDiagnostics)> {
    let mut diagnostics = FitDiagnostics::default();
    let mut ridge = 0.0;
    let mut beta = vec![0.0; x.ncols() + 1];
    let mut dev = deviance(x, y, &beta);
    let mut iter = 0;
    while iter < MAX_ITER {
        iter += 1;
        let dir = newton_direction(x, y, &beta, ridge)?;
        // Step halving keeps the deviance monotone when a full Newton step
        // overshoots.
        let mut step = 1.0;
        let mut candidate;
        let mut dev_new;
        loop {
            candidate = beta.iter().zip(&dir).map(|(b, d)| b + step * d).collect::<Vec<_>>();
            dev_new = deviance(x, y, &candidate);
            if dev_new <= dev + 1e-12 || step < 1e-10 {
                break;
            }
            step /= 2.0;
        }
        let norm = candidate.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        if ridge == 0.0 && norm > SEPARATION_NORM {
            ridge = RIDGE;
            diagnostics
                .notes
                .push("quasi-separation detected; refit with ridge penalty 1e-6".into());
            beta = vec![0.0; x.ncols() + 1];
            dev = deviance(x, y, &beta);
            iter = 0;
            continue;
        }
        let rel = (dev - dev_new).abs() / (dev.abs() + 1e-10);
        beta = candidate;
        dev = dev_new;
        if rel < DEV_TOL {
            diagnostics.converged = true;
            break;
        }
    }
    diagnostics.iterations = iter;
    if !diagnostics.converged {
        diagnostics.notes.push(format!("IRLS stopped at {MAX_ITER} iterations"));
    }
    Ok((beta, diagnostics))
}

/// Mean score vector (1/n) X'(y - mu); near zero at an interior optimum.
#[cfg(test)]
pub(crate) fn mean_score(x: ArrayView2<f64>, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let d = x.ncols() + 1;
    let mut g = vec![0.0; d];
    for i in 0..y.len() {
        let mut eta = beta[0];
        for j in 0..x.ncols() {
            eta += beta[j + 1] * x[(i, j)];
        }
        let r = y[i] - sigmoid(eta);
        g[0] += r;
        for j in 0..x.ncols() {
            g[j + 1] += r * x[(i, j)];
        }
    }
    for v in &mut g {
        *v /= y.len() as f64;
    }
    g
}
