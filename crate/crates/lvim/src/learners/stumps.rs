//! Gradient-boosted depth-1 trees (stumps) with logistic loss.
//!
//! Each round fits one axis-aligned split by maximizing the Newton gain
//! g_left^2/h_left + g_right^2/h_right over all admissible thresholds, where
//! g and h are the logistic-loss gradient and hessian sums. Leaf values are
//! damped Newton steps scaled by the shrinkage; candidate thresholds are
//! midpoints between distinct sorted feature values with at least `min_node`
//! rows on each side. No subsampling, so the fit is deterministic.

use super::{clamp_prob, sigmoid, FitDiagnostics};
use ndarray::ArrayView2;

/// One fitted stump; `left` applies when x[feature] <= threshold. Leaf
/// values already include the shrinkage factor.
#[derive(Clone, Debug)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: f64,
    pub right: f64,
}

/// Cap on a single (unshrunk) Newton leaf step.
const LEAF_CAP: f64 = 4.0;

struct Split {
    gain: f64,
    feature: usize,
    threshold: f64,
    left: f64,
    right: f64,
}

pub(super) fn fit_stumps(
    x: ArrayView2<f64>,
    y: &[f64],
    rounds: usize,
    shrinkage: f64,
    min_node: usize,
) -> (f64, Vec<Stump>, FitDiagnostics) {
    let n = y.len();
    let p = x.ncols();
    let mut diagnostics = FitDiagnostics { converged: true, ..Default::default() };

    let ybar = clamp_prob(y.iter().sum::<f64>() / n as f64);
    let bias = (ybar / (1.0 - ybar)).ln();
    let mut f = vec![bias; n];
    let mut stumps: Vec<Stump> = Vec::new();

    // Row order per feature, ties kept stable for determinism.
    let sorted: Vec<Vec<usize>> = (0..p)
        .map(|j| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| {
                x[(a, j)].partial_cmp(&x[(b, j)]).expect("finite features").then(a.cmp(&b))
            });
            idx
        })
        .collect();

    for round in 0..rounds {
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        let (mut g_tot, mut h_tot) = (0.0, 0.0);
        for i in 0..n {
            let mu = sigmoid(f[i]);
            g[i] = y[i] - mu;
            h[i] = (mu * (1.0 - mu)).max(1e-12);
            g_tot += g[i];
            h_tot += h[i];
        }

        let mut best: Option<Split> = None;
        for (j, order) in sorted.iter().enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            for (count, pair) in order.windows(2).enumerate() {
                let (a, b) = (pair[0], pair[1]);
                gl += g[a];
                hl += h[a];
                let left_count = count + 1;
                if left_count < min_node || n - left_count < min_node {
                    continue;
                }
                if x[(a, j)] == x[(b, j)] {
                    continue;
                }
                let gr = g_tot - gl;
                let hr = h_tot - hl;
                let gain = gl * gl / hl + gr * gr / hr;
                let better = match &best {
                    Some(s) => gain > s.gain,
                    None => true,
                };
                if better {
                    best = Some(Split {
                        gain,
                        feature: j,
                        threshold: 0.5 * (x[(a, j)] + x[(b, j)]),
                        left: (gl / hl).clamp(-LEAF_CAP, LEAF_CAP),
                        right: (gr / hr).clamp(-LEAF_CAP, LEAF_CAP),
                    });
                }
            }
        }

        let Some(split) = best else {
            diagnostics.notes.push(format!(
                "no admissible split (n = {n}, min_node = {min_node}); stopped after {round} rounds"
            ));
            break;
        };
        let stump = Stump {
            feature: split.feature,
            threshold: split.threshold,
            left: shrinkage * split.left,
            right: shrinkage * split.right,
        };
        for i in 0..n {
            f[i] += if x[(i, stump.feature)] <= stump.threshold { stump.left } else { stump.right };
        }
        stumps.push(stump);
        diagnostics.iterations = round + 1;
    }

    (bias, stumps, diagnostics)
}
