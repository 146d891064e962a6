//! End-to-end tests that drive the compiled binary: exit codes, config
//! precedence, determinism across thread counts, and the documented
//! degenerate small-sample behavior.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lvim::panel::write_long_csv;
use lvim::simulate::{generate, DgpConfig, StudyScenario, StudyVariable};

const TOY_CSV: &str = "subject_id,time,y,x1\n\
                       s1,1,1,0.3\n\
                       s1,2,0,-0.2\n\
                       s2,1,0,1.4\n\
                       s2,2,1,0.9\n";

fn lvim_cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lvim"));
    c.env("LVIM_THREADS", "2");
    c
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn write_benchmark_csv(path: &Path, n: usize, seed: u64) {
    let data = generate(&DgpConfig::standard(), n, seed).unwrap();
    let mut buf = Vec::new();
    write_long_csv(&data, &mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

#[test]
fn toy_minimal_config_runs_end_to_end_degenerately() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    fs::write(&csv, TOY_CSV).unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(
        &cfg,
        format!(
            "data = {:?}\ns = [\"x1\"]\nlearner = \"mean-only\"\nmeasure = \"accuracy\"\n",
            csv
        ),
    )
    .unwrap();

    let out = run(lvim_cmd().args(["estimate", "--config"]).arg(&cfg).args(["--format", "json"]));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(err.contains("resolved configuration"), "{err}");
    assert!(err.contains("seed = 0"), "{err}");
    assert!(err.contains("plug-in"), "{err}");

    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row["degenerate"], serde_json::Value::Bool(true), "{row}");
        assert_eq!(row["p_value"].as_f64(), Some(1.0));
        assert_eq!(row["estimate"].as_f64(), Some(0.0));
    }
    let summaries = doc["summaries"].as_array().unwrap();
    assert_eq!(summaries.len(), 3);
    for s in summaries {
        assert_eq!(s["degenerate"], serde_json::Value::Bool(true), "{s}");
    }
}

#[test]
fn unknown_base_column_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    fs::write(&csv, TOY_CSV).unwrap();

    let out = run(lvim_cmd()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--s", "x1", "--base", "zzz"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("zzz"), "{}", stderr_of(&out));
}

#[test]
fn unknown_config_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "fold_count = 3\n").unwrap();

    let out = run(lvim_cmd().args(["estimate", "--config"]).arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("fold_count"), "{}", stderr_of(&out));
}

#[test]
fn ragged_panel_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ragged.csv");
    fs::write(&csv, "subject_id,time,y,x1\ns1,1,1,0.3\ns1,2,0,-0.2\ns2,1,0,1.4\n").unwrap();

    let out = run(lvim_cmd().args(["estimate", "--data"]).arg(&csv).args(["--s", "x1"]));
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("s2"), "{}", stderr_of(&out));
}

#[test]
fn nonbinary_outcome_under_auc_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "subject_id,time,y,x1\ns1,1,2,0.3\ns2,1,0,1.4\n").unwrap();

    let out = run(lvim_cmd().args(["estimate", "--data"]).arg(&csv).args(["--s", "x1"]));
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("binary"), "{}", stderr_of(&out));
}

#[test]
fn sidecar_schema_enables_missing_cells_and_default_base() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("gaps.csv");
    fs::write(
        &csv,
        "subject_id,time,y,x1,x2\n\
         s1,1,1,0.3,1.0\n\
         s1,2,0,-0.2,0.5\n\
         s2,1,0,1.4,NA\n\
         s2,2,1,0.9,0.8\n",
    )
    .unwrap();
    let schema = dir.path().join("schema.json");
    fs::write(&schema, "{\"missing\": [\"x2\"], \"base_set\": [\"x1\"]}").unwrap();

    // Without the schema the NA cell is a data error.
    let bare = run(lvim_cmd().args(["estimate", "--data"]).arg(&csv).args(["--s", "x2"]));
    assert_eq!(bare.status.code(), Some(3));

    // With it, the cell is zero filled, x1 becomes the default base set,
    // and the run completes (degenerately at this sample size).
    let out = run(lvim_cmd()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--schema"])
        .arg(&schema)
        .args(["--s", "x2", "--learner", "mean-only", "--measure", "accuracy"]));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("base = [\"x1\"]"), "{}", stderr_of(&out));

    // The declared column's companion indicator is addressable by name.
    let with_indicator = run(lvim_cmd()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--schema"])
        .arg(&schema)
        .args([
            "--s", "x2",
            "--base", "x1,x2_missing",
            "--learner", "mean-only",
            "--measure", "accuracy",
        ]));
    assert!(
        with_indicator.status.success(),
        "stderr: {}",
        stderr_of(&with_indicator)
    );
}

#[test]
fn single_class_outcomes_exit_4() {
    // All-case outcomes leave AUC undefined in every fold, which is an
    // estimation failure, not a config or data-shape problem.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ones.csv");
    fs::write(
        &csv,
        "subject_id,time,y,x1\ns1,1,1,0.3\ns2,1,1,1.4\ns3,1,1,-0.5\ns4,1,1,0.8\n",
    )
    .unwrap();

    let out = run(lvim_cmd().args(["estimate", "--data"]).arg(&csv).args(["--s", "x1"]));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn benchmark_mean_falls_inside_its_own_interval() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    write_benchmark_csv(&csv, 5000, 0xBEEF);
    let json = dir.path().join("out.json");

    let out = run(lvim_cmd()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args([
            "--s", "x1",
            "--base", "x4,x5,x6,x7",
            "--learner", "logistic",
            "--measure", "auc",
            "--seed", "7",
            "--format", "json",
            "--out",
        ])
        .arg(&json));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let mean = doc["summaries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["summary"] == "mean")
        .expect("mean summary row");
    let est = mean["estimate"].as_f64().unwrap();
    let lo = mean["ci_lower"].as_f64().unwrap();
    let hi = mean["ci_upper"].as_f64().unwrap();
    assert!(lo <= 0.191 && 0.191 <= hi, "CI [{lo}, {hi}] misses 0.191");
    assert!((est - 0.191).abs() < 0.05, "estimate {est} far from 0.191");
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    write_benchmark_csv(&csv, 400, 0x0DD5);

    let render = |threads: Option<&str>, out_name: &str| {
        let path = dir.path().join(out_name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_lvim"));
        match threads {
            Some(t) => {
                cmd.env("LVIM_THREADS", t);
            }
            None => {
                cmd.env_remove("LVIM_THREADS");
            }
        }
        let out = run(cmd
            .args(["estimate", "--data"])
            .arg(&csv)
            .args(["--s", "x1", "--k-folds", "2", "--seed", "3", "--format", "json", "--out"])
            .arg(&path));
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
        fs::read(&path).unwrap()
    };

    let sequential = render(Some("1"), "a.json");
    let parallel = render(None, "b.json");
    assert_eq!(sequential, parallel);
}

#[test]
fn simulate_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = StudyScenario {
        config: DgpConfig::standard(),
        n: 80,
        replicates: 2,
        learner: lvim::learners::LearnerSpec::Logistic,
        measure: lvim::predictiveness::PredictivenessMeasure::Auc,
        kinds: vec![lvim::inference::VimKind::AddIn],
        variables: vec![StudyVariable {
            label: "x1".into(),
            s: vec![0],
            base: vec![3, 4, 5, 6],
        }],
        summaries: vec![lvim::summaries::SummarySpec::Mean],
        k_folds: 2,
        alpha: 0.05,
        oracle_draws: 2000,
    };
    let path = dir.path().join("scenario.toml");
    fs::write(&path, toml::to_string(&scenario).unwrap()).unwrap();

    let mut go = || {
        let out = run(lvim_cmd()
            .args(["simulate", "--scenario"])
            .arg(&path)
            .args(["--seed", "42", "--format", "json"]));
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
        out.stdout
    };
    let first = go();
    let second = go();
    assert_eq!(first, second);

    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&run(
        lvim_cmd()
            .args(["simulate", "--scenario"])
            .arg(&path)
            .args(["--seed", "42", "--format", "json"]),
    )))
    .unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
    assert_eq!(doc["rows"][0]["variable"], "x1");
}

#[test]
fn report_rerenders_stored_trajectory_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    fs::write(&csv, TOY_CSV).unwrap();
    let json = dir.path().join("toy.json");

    let out = run(lvim_cmd()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--s", "x1", "--learner", "mean-only", "--measure", "accuracy"])
        .args(["--format", "json", "--out"])
        .arg(&json));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let original = fs::read_to_string(&json).unwrap();

    let csv_out = run(lvim_cmd()
        .args(["report", "--input"])
        .arg(&json)
        .args(["--format", "csv"]));
    assert!(csv_out.status.success(), "stderr: {}", stderr_of(&csv_out));
    let text = stdout_of(&csv_out);
    assert!(
        text.starts_with("row,label,estimate,se,ci_lower,ci_upper,p_value,degenerate,note"),
        "{text}"
    );

    // A JSON re-render reproduces the stored document byte for byte.
    let json_out = run(lvim_cmd()
        .args(["report", "--input"])
        .arg(&json)
        .args(["--format", "json"]));
    assert!(json_out.status.success());
    assert_eq!(stdout_of(&json_out), original);
}

#[test]
fn report_rejects_unrecognized_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.json");
    fs::write(&path, "{\"rows\": 3}").unwrap();

    let out = run(lvim_cmd().args(["report", "--input"]).arg(&path));
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("neither"), "{}", stderr_of(&out));
}

#[test]
fn oracle_reports_exact_zero_for_null_variable() {
    let out = run(lvim_cmd().args([
        "oracle", "--s", "x8", "--n-draws", "4000", "--seed", "1", "--format", "json",
    ]));
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    for v in doc["per_t"].as_array().unwrap() {
        assert_eq!(v.as_f64(), Some(0.0));
    }
    assert_eq!(doc["mean"].as_f64(), Some(0.0));

    let table = run(lvim_cmd().args([
        "oracle", "--s", "8", "--n-draws", "2000", "--format", "csv",
    ]));
    assert!(table.status.success());
    assert!(stdout_of(&table).starts_with("row,label,big,small,value"));
}

#[test]
fn help_enumerates_every_config_key() {
    let top = run(lvim_cmd().arg("--help"));
    assert!(top.status.success());
    let text = stdout_of(&top);
    assert!(text.contains("LVIM_THREADS"), "{text}");
    assert!(text.contains("Exit codes"), "{text}");
    assert!(text.contains("precedence"), "{text}");

    let est = run(lvim_cmd().args(["estimate", "--help"]));
    let text = stdout_of(&est);
    for key in [
        "data", "schema", "s", "base", "kind", "learner", "measure", "summaries", "window",
        "k_folds", "alpha", "seed", "out", "format", "truncate_at_zero", "round",
    ] {
        assert!(text.contains(&format!("[key: {key}]")), "missing key {key}:\n{text}");
    }
}
