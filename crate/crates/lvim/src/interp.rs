//! Trajectory interpolators: piecewise linear and natural cubic spline.
//!
//! Both interpolate exactly through the (time, value) knots. The spline
//! stores second derivatives at the knots (natural boundary: zero at both
//! ends), solved by the Thomas tridiagonal sweep. Values, first derivatives,
//! and the exact integral over the knot span are all closed form, and each
//! is linear in the knot values, which the summary gradients rely on.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which interpolator a curve-based summary runs through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolatorKind {
    PiecewiseLinear,
    NaturalCubicSpline,
}

impl std::fmt::Display for InterpolatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InterpolatorKind::PiecewiseLinear => write!(f, "piecewise-linear"),
            InterpolatorKind::NaturalCubicSpline => write!(f, "natural-cubic-spline"),
        }
    }
}

fn check_knots(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Argument(format!(
            "{} knot times but {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Argument("interpolation needs at least two knots".into()));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("knot times must be strictly increasing".into()));
    }
    Ok(())
}

/// Piecewise-linear interpolant through the knots.
#[derive(Clone, Debug)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        check_knots(xs, ys)?;
        Ok(PiecewiseLinear { xs: xs.to_vec(), ys: ys.to_vec() })
    }

    fn segment_of(&self, x: f64) -> usize {
        let last = self.xs.len() - 2;
        match self.xs.iter().rposition(|&k| k <= x) {
            Some(i) => i.min(last),
            None => 0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        let h = self.xs[i + 1] - self.xs[i];
        self.ys[i] + (x - self.xs[i]) * (self.ys[i + 1] - self.ys[i]) / h
    }

    pub fn slope_of_segment(&self, i: usize) -> f64 {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    /// Derivative at an interior point of a segment; at a knot the
    /// convention of [`derivative_at_knot`](Self::derivative_at_knot)
    /// applies only when called through that method.
    pub fn derivative(&self, x: f64) -> f64 {
        self.slope_of_segment(self.segment_of(x))
    }

    /// Derivative assigned to knot i: the adjacent segment slope at the two
    /// endpoints, the mean of the two adjacent slopes at interior knots.
    pub fn derivative_at_knot(&self, i: usize) -> f64 {
        let last = self.xs.len() - 1;
        if i == 0 {
            self.slope_of_segment(0)
        } else if i == last {
            self.slope_of_segment(last - 1)
        } else {
            0.5 * (self.slope_of_segment(i - 1) + self.slope_of_segment(i))
        }
    }

    /// Exact integral over the knot span (trapezoid rule).
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.xs.len() - 1 {
            let h = self.xs[i + 1] - self.xs[i];
            total += h * (self.ys[i] + self.ys[i + 1]) / 2.0;
        }
        total
    }

    /// Gradient of the integral with respect to the knot values.
    pub fn integral_gradient(&self) -> Vec<f64> {
        let m = self.xs.len();
        let mut g = vec![0.0; m];
        for i in 0..m - 1 {
            let h = self.xs[i + 1] - self.xs[i];
            g[i] += h / 2.0;
            g[i + 1] += h / 2.0;
        }
        g
    }
}

/// Natural cubic spline through the knots.
#[derive(Clone, Debug)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    m2: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        check_knots(xs, ys)?;
        let n = xs.len();
        let mut m2 = vec![0.0; n];
        if n > 2 {
            // Thomas sweep on the interior tridiagonal system
            //   (h[i-1]/6) m[i-1] + ((h[i-1]+h[i])/3) m[i] + (h[i]/6) m[i+1] = rhs[i].
            let interior = n - 2;
            let mut diag = vec![0.0; interior];
            let mut off = vec![0.0; interior];
            let mut rhs = vec![0.0; interior];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i - 1] = (h0 + h1) / 3.0;
                off[i - 1] = h1 / 6.0;
                rhs[i - 1] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
            }
            for i in 1..interior {
                let lower = (xs[i + 1] - xs[i]) / 6.0;
                let w = lower / diag[i - 1];
                diag[i] -= w * off[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; interior];
            sol[interior - 1] = rhs[interior - 1] / diag[interior - 1];
            for i in (0..interior - 1).rev() {
                sol[i] = (rhs[i] - off[i] * sol[i + 1]) / diag[i];
            }
            m2[1..=interior].copy_from_slice(&sol);
        }
        Ok(NaturalCubicSpline { xs: xs.to_vec(), ys: ys.to_vec(), m2 })
    }

    fn segment_of(&self, x: f64) -> usize {
        let last = self.xs.len() - 2;
        match self.xs.iter().rposition(|&k| k <= x) {
            Some(i) => i.min(last),
            None => 0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m2[i] + (b * b * b - b) * self.m2[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            - (3.0 * a * a - 1.0) * h * self.m2[i] / 6.0
            + (3.0 * b * b - 1.0) * h * self.m2[i + 1] / 6.0
    }

    /// Derivative at knot i; the spline is C1 so both adjacent segments
    /// agree and the right-hand form is used.
    pub fn derivative_at_knot(&self, i: usize) -> f64 {
        if i + 1 < self.xs.len() {
            let h = self.xs[i + 1] - self.xs[i];
            (self.ys[i + 1] - self.ys[i]) / h - h * (2.0 * self.m2[i] + self.m2[i + 1]) / 6.0
        } else {
            let h = self.xs[i] - self.xs[i - 1];
            (self.ys[i] - self.ys[i - 1]) / h + h * (self.m2[i - 1] + 2.0 * self.m2[i]) / 6.0
        }
    }

    /// Exact integral over the knot span: the trapezoid term minus the
    /// curvature correction h^3 (m[i] + m[i+1]) / 24 per segment.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.xs.len() - 1 {
            let h = self.xs[i + 1] - self.xs[i];
            total += h * (self.ys[i] + self.ys[i + 1]) / 2.0
                - h * h * h * (self.m2[i] + self.m2[i + 1]) / 24.0;
        }
        total
    }
}
