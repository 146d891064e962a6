//! Summary functionals of an importance trajectory.
//!
//! A trajectory of per-timepoint importance values can be collapsed to a
//! scalar: its mean, the intercept or slope of a least-squares linear
//! trend, the area under an interpolated trajectory curve (AUTC), or the
//! geometric mean rate of change (GMRC) of the interpolator's derivative.
//! Each summary returns its gradient with respect to the trajectory when
//! one is defined, so delta-method variance estimates can be propagated
//! from per-timepoint influence values; summaries without a usable
//! gradient (GMRC under piecewise-linear interpolation, or with a grid
//! derivative at the stability floor) still report a point value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{InterpolatorKind, NaturalCubicSpline, PiecewiseLinear};

/// Grid-time derivatives below this magnitude make the GMRC log-derivative
/// gradient numerically unstable; inference is refused under the floor.
pub const GMRC_DERIVATIVE_FLOOR: f64 = 1e-8;

/// Points sampled inside each segment (plus endpoints) for monotonicity.
const MONOTONE_GRID: usize = 1000;

/// Which coefficient of the least-squares linear trend to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendComponent {
    Intercept,
    Slope,
}

/// A trajectory summary functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummarySpec {
    /// Mean importance over the window.
    Mean,
    /// Intercept or slope of the least-squares line through the trajectory.
    LinearTrend(TrendComponent),
    /// Area under the interpolated trajectory curve.
    Autc(InterpolatorKind),
    /// Geometric mean rate of change of the interpolated curve.
    Gmrc(InterpolatorKind),
}

impl fmt::Display for SummarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SummarySpec::Mean => "mean",
            SummarySpec::LinearTrend(TrendComponent::Intercept) => "trend-intercept",
            SummarySpec::LinearTrend(TrendComponent::Slope) => "trend-slope",
            SummarySpec::Autc(InterpolatorKind::PiecewiseLinear) => "autc-linear",
            SummarySpec::Autc(InterpolatorKind::NaturalCubicSpline) => "autc-spline",
            SummarySpec::Gmrc(InterpolatorKind::PiecewiseLinear) => "gmrc-linear",
            SummarySpec::Gmrc(InterpolatorKind::NaturalCubicSpline) => "gmrc-spline",
        };
        f.write_str(name)
    }
}

impl FromStr for SummarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(SummarySpec::Mean),
            "trend-intercept" => Ok(SummarySpec::LinearTrend(TrendComponent::Intercept)),
            "trend-slope" => Ok(SummarySpec::LinearTrend(TrendComponent::Slope)),
            "autc-linear" => Ok(SummarySpec::Autc(InterpolatorKind::PiecewiseLinear)),
            "autc-spline" => Ok(SummarySpec::Autc(InterpolatorKind::NaturalCubicSpline)),
            "gmrc-linear" => Ok(SummarySpec::Gmrc(InterpolatorKind::PiecewiseLinear)),
            "gmrc-spline" => Ok(SummarySpec::Gmrc(InterpolatorKind::NaturalCubicSpline)),
            other => Err(Error::Argument(format!(
                "unknown summary: {other} (expected mean, trend-intercept, trend-slope, \
                 autc-linear, autc-spline, gmrc-linear, or gmrc-spline)"
            ))),
        }
    }
}

impl Serialize for SummarySpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SummarySpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A summary value with, when defined, its gradient in the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryValue {
    pub value: f64,
    /// Partial derivatives of the summary in each trajectory coordinate;
    /// `None` when the summary does not admit delta-method inference at
    /// this trajectory (see `gradient_note`).
    pub gradient: Option<Vec<f64>>,
    /// Why the gradient is absent, when it is.
    pub gradient_note: Option<String>,
}

impl SummaryValue {
    fn with_gradient(value: f64, gradient: Vec<f64>) -> Self {
        SummaryValue {
            value,
            gradient: Some(gradient),
            gradient_note: None,
        }
    }

    fn without_gradient(value: f64, note: String) -> Self {
        SummaryValue {
            value,
            gradient: None,
            gradient_note: Some(note),
        }
    }
}

/// Shape of an interpolated trajectory over its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Flat,
    NonMonotone,
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::Flat => "flat",
            Monotonicity::NonMonotone => "non-monotone",
        };
        f.write_str(name)
    }
}

fn check_window(traj: &[f64], times: &[f64]) -> Result<()> {
    if traj.len() < 2 {
        return Err(Error::Argument(format!(
            "summary needs at least 2 timepoints, got {}",
            traj.len()
        )));
    }
    if times.len() != traj.len() {
        return Err(Error::Argument(format!(
            "trajectory has {} values but {} time labels",
            traj.len(),
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("time labels must be strictly increasing".into()));
    }
    Ok(())
}

/// Mean importance over the window; gradient is uniform.
pub fn summarize_mean(traj: &[f64]) -> Result<SummaryValue> {
    if traj.is_empty() {
        return Err(Error::Argument("summary window is empty".into()));
    }
    let m = traj.len() as f64;
    let value = traj.iter().sum::<f64>() / m;
    Ok(SummaryValue::with_gradient(value, vec![1.0 / m; traj.len()]))
}

/// Least-squares linear trend through (times, trajectory); returns
/// (intercept, slope). Gradients are the rows of the OLS hat map.
pub fn summarize_linear_trend(traj: &[f64], times: &[f64]) -> Result<(SummaryValue, SummaryValue)> {
    if traj.len() < 2 {
        return Err(Error::Argument(format!(
            "linear trend needs at least 2 timepoints, got {}",
            traj.len()
        )));
    }
    if times.len() != traj.len() {
        return Err(Error::Argument(format!(
            "trajectory has {} values but {} time labels",
            traj.len(),
            times.len()
        )));
    }
    let m = traj.len() as f64;
    let sum_t: f64 = times.iter().sum();
    let sum_tt: f64 = times.iter().map(|&t| t * t).sum();
    let det = m * sum_tt - sum_t * sum_t;
    if det.abs() < 1e-12 * (1.0 + sum_tt.abs()) {
        return Err(Error::Argument(
            "linear trend is undefined: time labels are all equal".into(),
        ));
    }
    // Rows of (U'U)^{-1} U' for U = [1, t].
    let g_intercept: Vec<f64> = times.iter().map(|&t| (sum_tt - sum_t * t) / det).collect();
    let g_slope: Vec<f64> = times.iter().map(|&t| (m * t - sum_t) / det).collect();
    let intercept = g_intercept.iter().zip(traj).map(|(g, v)| g * v).sum();
    let slope = g_slope.iter().zip(traj).map(|(g, v)| g * v).sum();
    Ok((
        SummaryValue::with_gradient(intercept, g_intercept),
        SummaryValue::with_gradient(slope, g_slope),
    ))
}

/// Area under the interpolated trajectory curve over the window.
///
/// Both interpolators integrate in closed form, and both integrals are
/// linear in the trajectory, so the gradient is exact: trapezoid weights
/// for the piecewise-linear curve, and the integral of each unit-vector
/// trajectory for the spline.
pub fn summarize_autc(traj: &[f64], times: &[f64], kind: InterpolatorKind) -> Result<SummaryValue> {
    check_window(traj, times)?;
    match kind {
        InterpolatorKind::PiecewiseLinear => {
            let pl = PiecewiseLinear::new(times, traj)?;
            Ok(SummaryValue::with_gradient(pl.integral(), pl.integral_gradient()))
        }
        InterpolatorKind::NaturalCubicSpline => {
            let spline = NaturalCubicSpline::new(times, traj)?;
            let value = spline.integral();
            let mut gradient = vec![0.0; traj.len()];
            let mut unit = vec![0.0; traj.len()];
            for (j, g) in gradient.iter_mut().enumerate() {
                unit[j] = 1.0;
                *g = NaturalCubicSpline::new(times, &unit)?.integral();
                unit[j] = 0.0;
            }
            Ok(SummaryValue::with_gradient(value, gradient))
        }
    }
}

fn knot_derivatives(traj: &[f64], times: &[f64], kind: InterpolatorKind) -> Result<Vec<f64>> {
    Ok(match kind {
        InterpolatorKind::PiecewiseLinear => {
            let pl = PiecewiseLinear::new(times, traj)?;
            (0..traj.len()).map(|i| pl.derivative_at_knot(i)).collect()
        }
        InterpolatorKind::NaturalCubicSpline => {
            let sp = NaturalCubicSpline::new(times, traj)?;
            (0..traj.len()).map(|i| sp.derivative_at_knot(i)).collect()
        }
    })
}

/// Geometric mean rate of change: exp of the mean log absolute derivative
/// of the interpolated curve at the grid times.
///
/// A zero derivative at any grid time drives the value to 0 through the
/// log. The gradient is available only for the spline interpolator with
/// every grid derivative above [`GMRC_DERIVATIVE_FLOOR`]; the
/// piecewise-linear curve has no usable derivative map for inference.
pub fn summarize_gmrc(traj: &[f64], times: &[f64], kind: InterpolatorKind) -> Result<SummaryValue> {
    check_window(traj, times)?;
    let derivs = knot_derivatives(traj, times, kind)?;
    let m = traj.len() as f64;
    let mean_log = derivs.iter().map(|d| d.abs().ln()).sum::<f64>() / m;
    let value = mean_log.exp();

    if kind == InterpolatorKind::PiecewiseLinear {
        return Ok(SummaryValue::without_gradient(
            value,
            "geometric mean rate of change admits inference only with the \
             natural-cubic-spline interpolator"
                .into(),
        ));
    }
    if let Some(small) = derivs.iter().find(|d| d.abs() <= GMRC_DERIVATIVE_FLOOR) {
        return Ok(SummaryValue::without_gradient(
            value,
            format!(
                "grid derivative {small:e} is at or below the stability floor \
                 {GMRC_DERIVATIVE_FLOOR:e}; the log-derivative gradient is unstable"
            ),
        ));
    }

    // d/d(theta_j) exp(mean_i log |h'(t_i)|) = value/m * sum_i D_ij / h'(t_i)
    // where D_ij is the (linear) map from trajectory values to grid
    // derivatives, recovered column by column from unit trajectories.
    let mut gradient = vec![0.0; traj.len()];
    let mut unit = vec![0.0; traj.len()];
    for (j, g) in gradient.iter_mut().enumerate() {
        unit[j] = 1.0;
        let col = knot_derivatives(&unit, times, kind)?;
        unit[j] = 0.0;
        *g = value / m * col.iter().zip(&derivs).map(|(d_ij, d_i)| d_ij / d_i).sum::<f64>();
    }
    Ok(SummaryValue::with_gradient(value, gradient))
}

/// Evaluate a summary functional on a trajectory.
pub fn evaluate(spec: SummarySpec, traj: &[f64], times: &[f64]) -> Result<SummaryValue> {
    match spec {
        SummarySpec::Mean => {
            if times.len() != traj.len() {
                return Err(Error::Argument(format!(
                    "trajectory has {} values but {} time labels",
                    traj.len(),
                    times.len()
                )));
            }
            summarize_mean(traj)
        }
        SummarySpec::LinearTrend(component) => {
            let (intercept, slope) = summarize_linear_trend(traj, times)?;
            Ok(match component {
                TrendComponent::Intercept => intercept,
                TrendComponent::Slope => slope,
            })
        }
        SummarySpec::Autc(kind) => summarize_autc(traj, times, kind),
        SummarySpec::Gmrc(kind) => summarize_gmrc(traj, times, kind),
    }
}

/// Classify the shape of the interpolated trajectory by the sign of its
/// derivative on a fine grid (plus segment endpoints), with the direction
/// of a monotone trajectory read off the linear-trend slope.
pub fn check_monotone(traj: &[f64], times: &[f64], kind: InterpolatorKind) -> Result<Monotonicity> {
    check_window(traj, times)?;
    let derivative: Box<dyn Fn(f64) -> f64> = match kind {
        InterpolatorKind::PiecewiseLinear => {
            let pl = PiecewiseLinear::new(times, traj)?;
            Box::new(move |x| pl.derivative(x))
        }
        InterpolatorKind::NaturalCubicSpline => {
            let sp = NaturalCubicSpline::new(times, traj)?;
            Box::new(move |x| sp.derivative(x))
        }
    };
    let mut has_pos = false;
    let mut has_neg = false;
    for seg in 0..times.len() - 1 {
        let (a, b) = (times[seg], times[seg + 1]);
        for step in 0..=MONOTONE_GRID {
            let x = a + (b - a) * step as f64 / MONOTONE_GRID as f64;
            let d = derivative(x);
            has_pos |= d > 0.0;
            has_neg |= d < 0.0;
        }
    }
    Ok(match (has_pos, has_neg) {
        (false, false) => Monotonicity::Flat,
        (true, true) => Monotonicity::NonMonotone,
        _ => {
            let (_, slope) = summarize_linear_trend(traj, times)?;
            if slope.value > 0.0 {
                Monotonicity::Increasing
            } else if slope.value < 0.0 {
                Monotonicity::Decreasing
            } else {
                Monotonicity::Flat
            }
        }
    })
}
