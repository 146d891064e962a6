//! Convex stacking and discrete selection over candidate learners.
//!
//! Out-of-fold predictions from an inner cross-validation feed either an
//! exponentiated-gradient search for simplex weights minimizing the mean
//! negative log-likelihood (stacking) or an argmin over members (discrete
//! selection). Members are then refit on the full sample. The final stack
//! never has worse inner-CV loss than its best member: the EG solution is
//! compared against every vertex and the better one is kept.

use super::{clamp_prob, fit, inner_folds, mean_nll, member_seed, FitDiagnostics, FittedModel, LearnerSpec, ModelKind};
use crate::error::Result;
use crate::rng::derive_stream;
use ndarray::ArrayView2;

const EG_MAX_ITER: usize = 1000;
const EG_WEIGHT_TOL: f64 = 1e-8;

fn stack_loss(z: &[Vec<f64>], w: &[f64], y: &[f64]) -> f64 {
    let n = y.len();
    let mut p = vec![0.0; n];
    for (zm, &wm) in z.iter().zip(w) {
        for i in 0..n {
            p[i] += wm * zm[i];
        }
    }
    mean_nll(&p, y)
}

fn stack_gradient(z: &[Vec<f64>], w: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let m = z.len();
    let mut p = vec![0.0; n];
    for (zm, &wm) in z.iter().zip(w) {
        for i in 0..n {
            p[i] += wm * zm[i];
        }
    }
    let mut g = vec![0.0; m];
    for i in 0..n {
        let pi = clamp_prob(p[i]);
        let common = (pi - y[i]) / (pi * (1.0 - pi));
        for (gm, zm) in g.iter_mut().zip(z) {
            *gm += common * zm[i];
        }
    }
    for gm in &mut g {
        *gm /= n as f64;
    }
    g
}

/// Simplex weights by exponentiated gradient with backtracking; returns the
/// weights, the achieved loss, iterations used, and a stall note if the
/// search stopped without meeting the weight-change tolerance.
fn eg_weights(z: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64, usize, Option<String>) {
    let m = z.len();
    let mut w = vec![1.0 / m as f64; m];
    let mut loss = stack_loss(z, &w, y);
    let (mut best_w, mut best_loss) = (w.clone(), loss);
    let mut eta = 1.0;
    let mut stall = None;
    let mut iters = 0;
    for it in 0..EG_MAX_ITER {
        iters = it + 1;
        let g = stack_gradient(z, &w, y);
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi * (-eta * gi).exp()).collect();
            let total: f64 = cand.iter().sum();
            if total <= 0.0 || !total.is_finite() {
                eta /= 2.0;
                continue;
            }
            for c in &mut cand {
                *c /= total;
            }
            let cand_loss = stack_loss(z, &cand, y);
            if cand_loss <= loss + 1e-15 {
                let change: f64 = cand.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
                w = cand;
                loss = cand_loss;
                if loss < best_loss {
                    best_loss = loss;
                    best_w = w.clone();
                }
                accepted = true;
                eta *= 1.2;
                if change < EG_WEIGHT_TOL {
                    return (best_w, best_loss, iters, None);
                }
                break;
            }
            eta /= 2.0;
        }
        if !accepted {
            stall = Some("weight search stalled; returning best iterate".to_string());
            break;
        }
    }
    (best_w, best_loss, iters, stall)
}

#[allow(clippy::too_many_arguments)]
pub(super) fn fit_ensemble(
    members: &[LearnerSpec],
    inner_cv_folds: Option<usize>,
    discrete: bool,
    x: ArrayView2<f64>,
    y: &[f64],
    seed: u64,
    label: &str,
) -> Result<FittedModel> {
    let n = y.len();
    let m = members.len();
    let k = inner_cv_folds.unwrap_or(if n > 1000 { 5 } else { 10 }).min(n);
    let folds = inner_folds(n, k, derive_stream(seed, &[0x5354_4B43]));
    let k = folds.iter().max().copied().unwrap_or(0) + 1;
    let all_cols: Vec<usize> = (0..x.ncols()).collect();

    // Out-of-fold predictions, one column per member.
    let mut z = vec![vec![0.0; n]; m];
    for fold in 0..k {
        let train_rows: Vec<usize> = (0..n).filter(|&i| folds[i] != fold).collect();
        let test_rows: Vec<usize> = (0..n).filter(|&i| folds[i] == fold).collect();
        let xt = crate::panel::select_submatrix(x, &train_rows, &all_cols);
        let yt: Vec<f64> = train_rows.iter().map(|&i| y[i]).collect();
        let xv = crate::panel::select_submatrix(x, &test_rows, &all_cols);
        for (mi, member) in members.iter().enumerate() {
            let fitted = fit(member, xt.view(), &yt, member_seed(seed, mi, fold))?;
            for (&row, p) in test_rows.iter().zip(fitted.predict(&xv.view())) {
                z[mi][row] = p;
            }
        }
    }

    let member_losses: Vec<f64> = (0..m).map(|mi| mean_nll(&z[mi], y)).collect();
    let best_member = member_losses
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite losses"))
        .map(|(i, _)| i)
        .expect("at least one member");

    let mut diagnostics = FitDiagnostics { converged: true, ..Default::default() };
    for (member, &loss) in members.iter().zip(&member_losses) {
        diagnostics.inner_cv.push((member.label(), loss));
    }

    let weights = if discrete {
        diagnostics.notes.push(format!(
            "selected {} (inner-CV loss {:.6})",
            members[best_member].label(),
            member_losses[best_member]
        ));
        let mut w = vec![0.0; m];
        w[best_member] = 1.0;
        w
    } else {
        let (w, loss, iters, stall) = eg_weights(&z, y);
        diagnostics.iterations = iters;
        if let Some(s) = stall {
            diagnostics.notes.push(s);
        }
        // The simplex optimum is at least as good as every vertex; keep the
        // vertex if the search fell short of it.
        if member_losses[best_member] < loss {
            diagnostics.notes.push("vertex beat the weight search; using the single best member".into());
            let mut w = vec![0.0; m];
            w[best_member] = 1.0;
            diagnostics.inner_cv.push(("stack".into(), member_losses[best_member]));
            w
        } else {
            diagnostics.inner_cv.push(("stack".into(), loss));
            w
        }
    };

    // Refit carried members on the full sample.
    let mut fitted_members = Vec::with_capacity(m);
    for (mi, member) in members.iter().enumerate() {
        if weights[mi] == 0.0 && discrete {
            // Placeholder keeps indices aligned without paying for a fit
            // that can never be used.
            fitted_members.push(FittedModel {
                label: member.label(),
                kind: ModelKind::Intercept { value: 0.5 },
                diagnostics: FitDiagnostics::default(),
            });
            continue;
        }
        fitted_members.push(fit(member, x, y, member_seed(seed, mi, usize::MAX))?);
    }

    Ok(FittedModel {
        label: label.to_string(),
        kind: ModelKind::Ensemble { members: fitted_members, weights },
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::test_support::simulated;

    fn two_member_spec() -> Vec<LearnerSpec> {
        vec![LearnerSpec::Logistic, LearnerSpec::MeanOnly]
    }

    #[test]
    fn weights_form_a_simplex_point() {
        let (x, y) = simulated(400, 51);
        let spec = LearnerSpec::Stacked { members: two_member_spec(), inner_cv_folds: Some(5) };
        let m = fit(&spec, x.view(), &y, 3).unwrap();
        match &m.kind {
            ModelKind::Ensemble { weights, .. } => {
                let total: f64 = weights.iter().sum();
                assert!((total - 1.0).abs() < 1e-9);
                assert!(weights.iter().all(|&w| (0.0..=1.0).contains(&w)));
                // Logistic is the true model here; it should dominate.
                assert!(weights[0] > 0.8, "weights {weights:?}");
            }
            other => panic!("unexpected kind {other:?}"),
        }
    }

    #[test]
    fn stack_inner_cv_loss_beats_worst_and_matches_best_member() {
        let (x, y) = simulated(400, 52);
        let spec = LearnerSpec::Stacked { members: two_member_spec(), inner_cv_folds: Some(5) };
        let m = fit(&spec, x.view(), &y, 9).unwrap();
        let losses: Vec<f64> = m.diagnostics.inner_cv.iter().map(|(_, l)| *l).collect();
        let stack_loss = *losses.last().unwrap();
        let member_best = losses[..losses.len() - 1]
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(stack_loss <= member_best + 1e-8, "stack {stack_loss} vs best member {member_best}");
    }

    #[test]
    fn one_hot_stack_equals_the_member() {
        let (x, y) = simulated(200, 53);
        let member = fit(&LearnerSpec::Logistic, x.view(), &y, 7).unwrap();
        let stacked = FittedModel {
            label: "stack".into(),
            kind: ModelKind::Ensemble {
                members: vec![
                    member.clone(),
                    fit(&LearnerSpec::MeanOnly, x.view(), &y, 7).unwrap(),
                ],
                weights: vec![1.0, 0.0],
            },
            diagnostics: FitDiagnostics::default(),
        };
        assert_eq!(stacked.predict(&x.view()), member.predict(&x.view()));
    }

    #[test]
    fn discrete_selection_picks_the_lowest_loss_member() {
        let (x, y) = simulated(400, 54);
        let spec = LearnerSpec::Discrete { members: two_member_spec(), inner_cv_folds: Some(5) };
        let m = fit(&spec, x.view(), &y, 11).unwrap();
        match &m.kind {
            ModelKind::Ensemble { weights, .. } => {
                assert_eq!(weights, &[1.0, 0.0]);
            }
            other => panic!("unexpected kind {other:?}"),
        }
        let direct = fit(&LearnerSpec::Logistic, x.view(), &y, member_seed(11, 0, usize::MAX)).unwrap();
        assert_eq!(m.predict(&x.view()), direct.predict(&x.view()));
    }

    #[test]
    fn ensembles_are_deterministic_in_seed() {
        let (x, y) = simulated(250, 55);
        let spec = LearnerSpec::Stacked { members: two_member_spec(), inner_cv_folds: Some(5) };
        let a = fit(&spec, x.view(), &y, 21).unwrap();
        let b = fit(&spec, x.view(), &y, 21).unwrap();
        assert_eq!(a.predict(&x.view()), b.predict(&x.view()));
    }
}
