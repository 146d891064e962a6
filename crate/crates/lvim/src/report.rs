//! Rendering of trajectory and study results into CSV, JSON, and aligned
//! text tables.
//!
//! Rendering is pure: a report struct goes in, a document string comes
//! out, and nothing in the report is mutated. Display conventions such as
//! truncating negative importance estimates at zero or rounding to a fixed
//! number of decimals apply only to the rendered text. Numbers are written
//! in shortest round-trip form unless rounding is requested, so parsing a
//! full-precision document recovers the stored values exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{InferenceResult, VimKind, VimTrajectory};
use crate::predictiveness::PredictivenessMeasure;
use crate::simulate::{MonteCarloReport, StudyRow};
use crate::summaries::SummarySpec;

/// Output format of a rendered document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RenderFormat {
    Csv,
    Json,
    #[default]
    TextTable,
}

impl std::fmt::Display for RenderFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RenderFormat::Csv => "csv",
            RenderFormat::Json => "json",
            RenderFormat::TextTable => "text-table",
        })
    }
}

impl std::str::FromStr for RenderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(RenderFormat::Csv),
            "json" => Ok(RenderFormat::Json),
            "text-table" | "text" | "table" => Ok(RenderFormat::TextTable),
            other => Err(Error::Parse(format!(
                "unknown output format {other:?}; expected csv, json, or text-table"
            ))),
        }
    }
}

/// Display options for rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub format: RenderFormat,
    /// Render negative point estimates as zero. Interval endpoints and
    /// stored values are never altered.
    #[serde(default)]
    pub truncate_at_zero: bool,
    /// Round rendered numbers to this many decimals; `None` keeps the
    /// shortest representation that round-trips exactly.
    #[serde(default)]
    pub round: Option<usize>,
    /// Confidence level echoed in table headings.
    pub alpha: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            format: RenderFormat::TextTable,
            truncate_at_zero: false,
            round: None,
            alpha: 0.05,
        }
    }
}

/// One timepoint of an inferred importance trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimepointRow {
    pub time: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
    pub degenerate: bool,
}

/// One trajectory summary with its inference, or a note explaining why
/// inference was refused while the point estimate stands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub summary: SummarySpec,
    pub estimate: f64,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub p_value: Option<f64>,
    pub degenerate: Option<bool>,
    pub note: Option<String>,
}

impl SummaryRow {
    /// Pair a point estimate with its inference outcome; an unsupported-
    /// inference error becomes a note on an otherwise point-only row.
    pub fn from_inference(
        summary: SummarySpec,
        estimate: f64,
        inference: std::result::Result<InferenceResult, Error>,
    ) -> Result<SummaryRow> {
        match inference {
            Ok(inf) => Ok(SummaryRow {
                summary,
                estimate: inf.estimate,
                se: Some(inf.se),
                ci_lower: Some(inf.ci_lower),
                ci_upper: Some(inf.ci_upper),
                p_value: Some(inf.p_value),
                degenerate: Some(inf.degenerate),
                note: None,
            }),
            Err(Error::UnsupportedInference(msg)) => Ok(SummaryRow {
                summary,
                estimate,
                se: None,
                ci_lower: None,
                ci_upper: None,
                p_value: None,
                degenerate: None,
                note: Some(msg),
            }),
            Err(other) => Err(other),
        }
    }
}

/// A complete inferred trajectory plus its summaries, ready to render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub kind: VimKind,
    pub measure: PredictivenessMeasure,
    pub learner: String,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub rows: Vec<TimepointRow>,
    pub summaries: Vec<SummaryRow>,
}

impl TrajectoryReport {
    pub fn new(
        trajectory: &VimTrajectory,
        per_timepoint: &[InferenceResult],
        summaries: Vec<SummaryRow>,
        alpha: f64,
        seed: u64,
    ) -> Result<TrajectoryReport> {
        if per_timepoint.len() != trajectory.times.len() {
            return Err(Error::Argument(format!(
                "{} timepoints but {} inference results",
                trajectory.times.len(),
                per_timepoint.len()
            )));
        }
        let rows = trajectory
            .times
            .iter()
            .zip(per_timepoint)
            .map(|(&time, inf)| TimepointRow {
                time,
                estimate: inf.estimate,
                se: inf.se,
                ci_lower: inf.ci_lower,
                ci_upper: inf.ci_upper,
                p_value: inf.p_value,
                degenerate: inf.degenerate,
            })
            .collect();
        Ok(TrajectoryReport {
            kind: trajectory.kind,
            measure: trajectory.measure,
            learner: trajectory.learner.clone(),
            n: trajectory.n(),
            alpha,
            seed,
            rows,
            summaries,
        })
    }
}

fn fmt_num(x: f64, spec: &RenderSpec) -> String {
    if !x.is_finite() {
        return String::new();
    }
    match spec.round {
        Some(d) => format!("{x:.d$}"),
        None => format!("{x}"),
    }
}

fn fmt_opt(x: Option<f64>, spec: &RenderSpec) -> String {
    x.map_or_else(String::new, |v| fmt_num(v, spec))
}

fn fmt_opt_bool(b: Option<bool>) -> String {
    b.map_or_else(String::new, |v| v.to_string())
}

fn truncate(x: f64, spec: &RenderSpec) -> f64 {
    if spec.truncate_at_zero {
        x.max(0.0)
    } else {
        x
    }
}

fn csv_document(header: &[&str], records: Vec<Vec<String>>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).expect("in-memory csv write");
    for record in records {
        wtr.write_record(&record).expect("in-memory csv write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory csv flush"))
        .expect("csv output is utf-8")
}

fn text_table(title: &str, header: &[&str], records: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for record in records {
        for (w, cell) in widths.iter_mut().zip(record) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    let render_line = |cells: &[String], widths: &[usize], out: &mut String| {
        let line: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    render_line(&header_cells, &widths, &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("  "));
    out.push('\n');
    for record in records {
        render_line(record, &widths, &mut out);
    }
    out
}

/// List the non-finite numeric fields of a trajectory report, for the
/// JSON diagnostics block (non-finite numbers render as nulls).
fn trajectory_diagnostics(report: &TrajectoryReport) -> Vec<String> {
    let mut notes = Vec::new();
    for row in &report.rows {
        for (name, value) in [
            ("estimate", row.estimate),
            ("se", row.se),
            ("ci_lower", row.ci_lower),
            ("ci_upper", row.ci_upper),
            ("p_value", row.p_value),
        ] {
            if !value.is_finite() {
                notes.push(format!("timepoint {}: {name} is non-finite", row.time));
            }
        }
    }
    for row in &report.summaries {
        for (name, value) in [
            ("estimate", Some(row.estimate)),
            ("se", row.se),
            ("ci_lower", row.ci_lower),
            ("ci_upper", row.ci_upper),
            ("p_value", row.p_value),
        ] {
            if value.is_some_and(|v| !v.is_finite()) {
                notes.push(format!("summary {}: {name} is non-finite", row.summary));
            }
        }
    }
    notes
}

#[derive(Serialize)]
struct JsonDocument<T: Serialize> {
    #[serde(flatten)]
    body: T,
    /// Names fields that were non-finite and rendered as null.
    diagnostics: Vec<String>,
}

const TRAJECTORY_HEADER: [&str; 9] = [
    "row", "label", "estimate", "se", "ci_lower", "ci_upper", "p_value", "degenerate", "note",
];

/// Render an inferred trajectory with its summaries. The CSV and text
/// formats share one uniform schema: timepoint rows first (the plot-ready
/// series), then summary rows.
pub fn render_trajectory(report: &TrajectoryReport, spec: &RenderSpec) -> String {
    match spec.format {
        RenderFormat::Json => {
            let mut shown = report.clone();
            for row in &mut shown.rows {
                row.estimate = truncate(row.estimate, spec);
            }
            for row in &mut shown.summaries {
                row.estimate = truncate(row.estimate, spec);
            }
            let doc = JsonDocument {
                diagnostics: trajectory_diagnostics(&shown),
                body: shown,
            };
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            text
        }
        RenderFormat::Csv | RenderFormat::TextTable => {
            let mut records = Vec::new();
            for row in &report.rows {
                records.push(vec![
                    "timepoint".to_string(),
                    fmt_num(row.time, &RenderSpec { round: None, ..spec.clone() }),
                    fmt_num(truncate(row.estimate, spec), spec),
                    fmt_num(row.se, spec),
                    fmt_num(row.ci_lower, spec),
                    fmt_num(row.ci_upper, spec),
                    fmt_num(row.p_value, spec),
                    row.degenerate.to_string(),
                    String::new(),
                ]);
            }
            for row in &report.summaries {
                records.push(vec![
                    "summary".to_string(),
                    row.summary.to_string(),
                    fmt_num(truncate(row.estimate, spec), spec),
                    fmt_opt(row.se, spec),
                    fmt_opt(row.ci_lower, spec),
                    fmt_opt(row.ci_upper, spec),
                    fmt_opt(row.p_value, spec),
                    fmt_opt_bool(row.degenerate),
                    row.note.clone().unwrap_or_default(),
                ]);
            }
            if spec.format == RenderFormat::Csv {
                csv_document(&TRAJECTORY_HEADER, records)
            } else {
                let title = format!(
                    "{} importance of {} ({} learner, n = {}, alpha = {}, seed = {})",
                    report.kind, report.measure, report.learner, report.n, report.alpha,
                    report.seed
                );
                text_table(&title, &TRAJECTORY_HEADER, &records)
            }
        }
    }
}

const STUDY_HEADER: [&str; 11] = [
    "kind",
    "variable",
    "summary",
    "mean_estimate",
    "true_value",
    "empirical_se",
    "coverage",
    "rejection",
    "mean_ci_width",
    "replicates_used",
    "failures",
];

fn sorted_rows(report: &MonteCarloReport) -> Vec<StudyRow> {
    let mut rows = report.rows.clone();
    rows.sort_by(|a, b| {
        (a.kind.to_string(), &a.variable, a.summary.to_string()).cmp(&(
            b.kind.to_string(),
            &b.variable,
            b.summary.to_string(),
        ))
    });
    rows
}

/// Render a Monte Carlo study, rows sorted by (kind, variable, summary),
/// columns in the operating-characteristics order: mean estimate, true
/// value, empirical SE, coverage, rejection proportion, CI width.
pub fn render_study(report: &MonteCarloReport, spec: &RenderSpec) -> String {
    match spec.format {
        RenderFormat::Json => {
            let mut shown = report.clone();
            shown.rows = sorted_rows(report);
            let mut diagnostics = Vec::new();
            for row in &shown.rows {
                if row.se_undefined {
                    diagnostics.push(format!(
                        "{} {} {}: empirical se undefined with {} replicate(s)",
                        row.kind, row.variable, row.summary, row.replicates_used
                    ));
                }
            }
            let doc = JsonDocument { body: shown, diagnostics };
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            text
        }
        RenderFormat::Csv | RenderFormat::TextTable => {
            let records: Vec<Vec<String>> = sorted_rows(report)
                .iter()
                .map(|row| {
                    vec![
                        row.kind.to_string(),
                        row.variable.clone(),
                        row.summary.to_string(),
                        fmt_num(row.mean_estimate, spec),
                        fmt_num(row.true_value, spec),
                        if row.se_undefined {
                            String::new()
                        } else {
                            fmt_num(row.empirical_se, spec)
                        },
                        fmt_num(row.coverage, spec),
                        fmt_num(row.rejection, spec),
                        fmt_num(row.mean_ci_width, spec),
                        row.replicates_used.to_string(),
                        row.failures.to_string(),
                    ]
                })
                .collect();
            if spec.format == RenderFormat::Csv {
                csv_document(&STUDY_HEADER, records)
            } else {
                let title = format!(
                    "study: {} over {} replicates ({} learner, n = {}, alpha = {}, seed = {})",
                    report.measure,
                    report.replicates,
                    report.learner,
                    report.n,
                    report.alpha,
                    report.root_seed
                );
                text_table(&title, &STUDY_HEADER, &records)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::Sidedness;

    fn inference(estimate: f64) -> InferenceResult {
        InferenceResult {
            estimate,
            se: 0.01,
            ci_lower: estimate - 0.0196,
            ci_upper: estimate + 0.0196,
            p_value: 0.012_345_678_901_234_5,
            alpha: 0.05,
            sidedness: Sidedness::Greater,
            degenerate: false,
        }
    }

    fn sample_report() -> TrajectoryReport {
        TrajectoryReport {
            kind: VimKind::AddIn,
            measure: PredictivenessMeasure::Auc,
            learner: "logistic".into(),
            n: 100,
            alpha: 0.05,
            seed: 42,
            rows: vec![
                TimepointRow {
                    time: 1.0,
                    estimate: 0.123_456_789_012_345_67,
                    se: 0.01,
                    ci_lower: 0.103_856_789_012_345_6,
                    ci_upper: 0.143_056_789_012_345_7,
                    p_value: 1.234_567_890_123_456_7e-8,
                    degenerate: false,
                },
                TimepointRow {
                    time: 2.0,
                    estimate: -0.01,
                    se: 0.0,
                    ci_lower: -0.01,
                    ci_upper: -0.01,
                    p_value: 1.0,
                    degenerate: true,
                },
            ],
            summaries: vec![
                SummaryRow::from_inference(SummarySpec::Mean, 0.056, Ok(inference(0.056)))
                    .unwrap(),
                SummaryRow::from_inference(
                    SummarySpec::Gmrc(crate::interp::InterpolatorKind::PiecewiseLinear),
                    0.87,
                    Err(Error::UnsupportedInference("needs a smooth interpolator".into())),
                )
                .unwrap(),
            ],
        }
    }

    fn parse_csv(doc: &str) -> Vec<Vec<String>> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(doc.as_bytes());
        rdr.records()
            .map(|r| r.unwrap().iter().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn csv_round_trips_estimates_exactly() {
        let report = sample_report();
        let doc = render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Csv,
            ..RenderSpec::default()
        });
        let rows = parse_csv(&doc);
        assert_eq!(rows.len(), 4);
        for (i, row) in report.rows.iter().enumerate() {
            assert_eq!(rows[i][0], "timepoint");
            for (col, expected) in [
                (2, row.estimate),
                (3, row.se),
                (4, row.ci_lower),
                (5, row.ci_upper),
                (6, row.p_value),
            ] {
                let parsed: f64 = rows[i][col].parse().unwrap();
                assert!(
                    (parsed - expected).abs() <= 1e-12 * expected.abs(),
                    "row {i} col {col}: {parsed} vs {expected}"
                );
            }
        }
        // Shortest round-trip formatting is in fact exact.
        let parsed: f64 = rows[0][2].parse().unwrap();
        assert_eq!(parsed, report.rows[0].estimate);
    }

    #[test]
    fn json_round_trips_the_report() {
        let report = sample_report();
        let doc = render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Json,
            ..RenderSpec::default()
        });
        let back: TrajectoryReport = serde_json::from_str(&doc).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn truncation_changes_rendering_only() {
        let report = sample_report();
        let spec = RenderSpec {
            format: RenderFormat::Csv,
            truncate_at_zero: true,
            ..RenderSpec::default()
        };
        let rows = parse_csv(&render_trajectory(&report, &spec));
        // The negative estimate renders as zero; interval endpoints keep
        // their signs; the report itself is untouched.
        assert_eq!(rows[1][2], "0");
        assert_eq!(rows[1][4], "-0.01");
        assert_eq!(report.rows[1].estimate, -0.01);

        let json = render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Json,
            truncate_at_zero: true,
            ..RenderSpec::default()
        });
        let back: TrajectoryReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rows[1].estimate, 0.0);
        assert_eq!(back.rows[1].ci_lower, -0.01);
    }

    #[test]
    fn empty_window_renders_header_only() {
        let mut report = sample_report();
        report.rows.clear();
        report.summaries.clear();
        let doc = render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Csv,
            ..RenderSpec::default()
        });
        assert_eq!(doc.lines().count(), 1);
        assert!(doc.starts_with("row,label,estimate"));
    }

    #[test]
    fn refused_summary_keeps_estimate_and_note() {
        let report = sample_report();
        let rows = parse_csv(&render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Csv,
            ..RenderSpec::default()
        }));
        let gmrc = &rows[3];
        assert_eq!(gmrc[0], "summary");
        assert_eq!(gmrc[1], "gmrc-linear");
        assert_eq!(gmrc[2], "0.87");
        assert_eq!(gmrc[3], "");
        assert_eq!(gmrc[6], "");
        assert!(gmrc[8].contains("smooth interpolator"));
    }

    #[test]
    fn rounding_is_display_only() {
        let report = sample_report();
        let rows = parse_csv(&render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Csv,
            round: Some(3),
            ..RenderSpec::default()
        }));
        assert_eq!(rows[0][2], "0.123");
        assert_eq!(rows[0][6], "0.000");
    }

    #[test]
    fn non_finite_values_render_as_nulls_with_diagnostics() {
        let mut report = sample_report();
        report.rows[0].p_value = f64::NAN;
        let json = render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Json,
            ..RenderSpec::default()
        });
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value["rows"][0]["p_value"].is_null());
        let diag = value["diagnostics"][0].as_str().unwrap();
        assert!(diag.contains("p_value"), "{diag}");

        let rows = parse_csv(&render_trajectory(&report, &RenderSpec {
            format: RenderFormat::Csv,
            ..RenderSpec::default()
        }));
        assert_eq!(rows[0][6], "");
    }

    fn sample_study() -> MonteCarloReport {
        let row = |kind, variable: &str, summary, est: f64| StudyRow {
            variable: variable.to_string(),
            kind,
            summary,
            mean_estimate: est,
            true_value: est + 0.001_234_567_890_123,
            empirical_se: 0.01,
            se_undefined: false,
            coverage: 0.95,
            rejection: 0.5,
            mean_ci_width: 0.04,
            replicates_used: 200,
            failures: 0,
        };
        MonteCarloReport {
            n: 1000,
            replicates: 200,
            learner: "logistic".into(),
            measure: PredictivenessMeasure::Auc,
            alpha: 0.05,
            root_seed: 7,
            failure_notes: Vec::new(),
            rows: vec![
                row(VimKind::LeaveOut, "x2", SummarySpec::Mean, 0.2),
                row(VimKind::AddIn, "x2", SummarySpec::Mean, 0.24),
                row(
                    VimKind::AddIn,
                    "x1",
                    SummarySpec::LinearTrend(crate::summaries::TrendComponent::Slope),
                    -0.003,
                ),
                row(VimKind::AddIn, "x1", SummarySpec::Mean, 0.19),
            ],
        }
    }

    #[test]
    fn study_rows_sort_by_kind_variable_summary() {
        let doc = render_study(&sample_study(), &RenderSpec {
            format: RenderFormat::Csv,
            ..RenderSpec::default()
        });
        let rows = parse_csv(&doc);
        let keys: Vec<(String, String, String)> = rows
            .iter()
            .map(|r| (r[0].clone(), r[1].clone(), r[2].clone()))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("add-in".into(), "x1".into(), "mean".into()),
                ("add-in".into(), "x1".into(), "trend-slope".into()),
                ("add-in".into(), "x2".into(), "mean".into()),
                ("leave-out".into(), "x2".into(), "mean".into()),
            ]
        );
    }

    #[test]
    fn study_json_and_csv_carry_identical_numbers() {
        let report = sample_study();
        let csv_rows = parse_csv(&render_study(&report, &RenderSpec {
            format: RenderFormat::Csv,
            ..RenderSpec::default()
        }));
        let json: serde_json::Value = serde_json::from_str(&render_study(&report, &RenderSpec {
            format: RenderFormat::Json,
            ..RenderSpec::default()
        }))
        .unwrap();
        let json_rows = json["rows"].as_array().unwrap();
        assert_eq!(csv_rows.len(), json_rows.len());
        for (c, j) in csv_rows.iter().zip(json_rows) {
            assert_eq!(c[0], j["kind"].as_str().unwrap());
            assert_eq!(c[1], j["variable"].as_str().unwrap());
            assert_eq!(c[2], j["summary"].as_str().unwrap());
            for (col, key) in [
                (3, "mean_estimate"),
                (4, "true_value"),
                (5, "empirical_se"),
                (6, "coverage"),
                (7, "rejection"),
                (8, "mean_ci_width"),
            ] {
                let parsed: f64 = c[col].parse().unwrap();
                assert_eq!(parsed, j[key].as_f64().unwrap(), "{key}");
            }
        }
    }

    #[test]
    fn undefined_se_renders_empty_with_diagnostic() {
        let mut report = sample_study();
        report.rows.truncate(1);
        report.rows[0].se_undefined = true;
        report.rows[0].replicates_used = 1;
        let rows = parse_csv(&render_study(&report, &RenderSpec {
            format: RenderFormat::Csv,
            ..RenderSpec::default()
        }));
        assert_eq!(rows[0][5], "");
        let json: serde_json::Value = serde_json::from_str(&render_study(&report, &RenderSpec {
            format: RenderFormat::Json,
            ..RenderSpec::default()
        }))
        .unwrap();
        let diag = json["diagnostics"][0].as_str().unwrap();
        assert!(diag.contains("se undefined"), "{diag}");
    }

    #[test]
    fn text_table_aligns_and_is_deterministic() {
        let report = sample_report();
        let spec = RenderSpec::default();
        let a = render_trajectory(&report, &spec);
        let b = render_trajectory(&report, &spec);
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert!(lines[0].contains("add-in importance of auc"));
        assert!(lines[1].starts_with("row"));
        assert!(lines[2].starts_with("---"));
        assert_eq!(lines.len(), 3 + 4);
    }

    #[test]
    fn format_names_round_trip() {
        for format in [RenderFormat::Csv, RenderFormat::Json, RenderFormat::TextTable] {
            let parsed: RenderFormat = format.to_string().parse().unwrap();
            assert_eq!(parsed, format);
        }
        assert!("yaml".parse::<RenderFormat>().is_err());
    }
}
