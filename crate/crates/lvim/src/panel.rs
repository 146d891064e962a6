//! Balanced longitudinal panels, variable sets, and fold assignments.
//!
//! Data layout is a balanced panel: n subjects, each observed at the same T
//! timepoints, with p features and one outcome per observation. The CSV
//! exchange format is long: `subject_id,time,y,x1,...,xp`, one row per
//! (subject, timepoint). Ragged panels are rejected rather than padded.
//!
//! Fold construction serves sample-split cross-fitting: subjects are first
//! shuffled into two halves (half 0 takes the extra subject when n is odd),
//! then each half is cut into K folds. Remainder subjects go to the lowest
//! fold numbers in half 0 and the highest in half 1, which keeps global fold
//! sizes within one of each other.

use crate::error::{Error, Result};
use crate::rng::CounterRng;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

/// A balanced longitudinal dataset.
#[derive(Clone, Debug)]
pub struct LongitudinalDataset {
    subject_ids: Vec<String>,
    time_labels: Vec<f64>,
    feature_names: Vec<String>,
    /// One n-by-p matrix per timepoint, subject-major.
    features: Vec<Array2<f64>>,
    /// One outcome vector per timepoint.
    outcomes: Vec<Vec<f64>>,
}

impl LongitudinalDataset {
    pub fn new(
        subject_ids: Vec<String>,
        time_labels: Vec<f64>,
        feature_names: Vec<String>,
        features: Vec<Array2<f64>>,
        outcomes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = subject_ids.len();
        let t_count = time_labels.len();
        let p = feature_names.len();
        if n == 0 {
            return Err(Error::Validation("dataset has no subjects".into()));
        }
        if t_count == 0 {
            return Err(Error::Validation("dataset has no timepoints".into()));
        }
        if time_labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "time labels must be strictly increasing".into(),
            ));
        }
        if features.len() != t_count || outcomes.len() != t_count {
            return Err(Error::Validation(format!(
                "expected {t_count} feature matrices and outcome vectors"
            )));
        }
        for (t, (x, y)) in features.iter().zip(&outcomes).enumerate() {
            if x.nrows() != n || x.ncols() != p {
                return Err(Error::Validation(format!(
                    "feature matrix at timepoint {t} is {}x{}, expected {n}x{p}",
                    x.nrows(),
                    x.ncols()
                )));
            }
            if y.len() != n {
                return Err(Error::Validation(format!(
                    "outcome vector at timepoint {t} has length {}, expected {n}",
                    y.len()
                )));
            }
        }
        Ok(LongitudinalDataset { subject_ids, time_labels, feature_names, features, outcomes })
    }

    pub fn n(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn t_count(&self) -> usize {
        self.time_labels.len()
    }

    pub fn p(&self) -> usize {
        self.feature_names.len()
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn time_labels(&self) -> &[f64] {
        &self.time_labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features_at(&self, t: usize) -> &Array2<f64> {
        &self.features[t]
    }

    pub fn outcomes_at(&self, t: usize) -> &[f64] {
        &self.outcomes[t]
    }

    /// Resolves a feature name to its column index.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|c| c == name)
    }

    /// Checks that every outcome is exactly 0 or 1, as required by the AUC
    /// and accuracy measures. Validation is on demand so real-valued
    /// outcomes remain loadable for measures that accept them.
    pub fn require_binary_outcomes(&self) -> Result<()> {
        for (t, ys) in self.outcomes.iter().enumerate() {
            for (i, &y) in ys.iter().enumerate() {
                if y != 0.0 && y != 1.0 {
                    return Err(Error::Validation(format!(
                        "outcome {y} for subject {} at time {} is not binary",
                        self.subject_ids[i], self.time_labels[t]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Declares which variables form the importance set `s` and the base set.
///
/// The two sets are disjoint 0-based column indices. The marginal set is
/// their union; for leave-out importance the complement of `s` within all
/// p columns plays the role of the reduced set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSet {
    s: Vec<usize>,
    base: Vec<usize>,
}

impl VariableSet {
    pub fn new(mut s: Vec<usize>, mut base: Vec<usize>, p: usize) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Argument("importance set s is empty".into()));
        }
        s.sort_unstable();
        base.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) || base.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("variable sets contain duplicates".into()));
        }
        if let Some(&j) = s.iter().chain(&base).find(|&&j| j >= p) {
            return Err(Error::Argument(format!(
                "variable index {j} out of range for p = {p}"
            )));
        }
        if s.iter().any(|j| base.binary_search(j).is_ok()) {
            return Err(Error::Argument(
                "importance set s overlaps the base set".into(),
            ));
        }
        Ok(VariableSet { s, base })
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn base(&self) -> &[usize] {
        &self.base
    }

    /// Union of `s` and the base set, sorted.
    pub fn marginal(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.s.iter().chain(&self.base).copied().collect();
        m.sort_unstable();
        m
    }

    /// All p columns except `s`, sorted.
    pub fn complement_of_s(&self, p: usize) -> Vec<usize> {
        (0..p).filter(|j| self.s.binary_search(j).is_err()).collect()
    }
}

/// Contiguous inclusive range of timepoint indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    start: usize,
    end: usize,
}

impl TimeWindow {
    pub fn new(start: usize, end: usize, t_count: usize) -> Result<Self> {
        if start > end || end >= t_count {
            return Err(Error::Argument(format!(
                "window [{start}, {end}] is not a valid range over {t_count} timepoints"
            )));
        }
        Ok(TimeWindow { start, end })
    }

    pub fn full(t_count: usize) -> Result<Self> {
        TimeWindow::new(0, t_count.saturating_sub(1), t_count)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Subject-level sample-split and fold assignment.
#[derive(Clone, Debug)]
pub struct FoldAssignment {
    half: Vec<u8>,
    fold: Vec<usize>,
    k: usize,
}

/// Shuffles subjects into two halves and K folds nested within each half.
///
/// Deterministic in (n, k, seed). Every (half, fold) cell is nonempty;
/// global fold sizes differ by at most one.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Argument(format!("K = {k} is too small; need K >= 2")));
    }
    if n / 2 < k {
        return Err(Error::Validation(format!(
            "n = {n} cannot fill {k} folds per half; choose a smaller K"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = CounterRng::from_path(seed, &[0x464F_4C44]);
    rng.shuffle(&mut order);

    let n0 = n.div_ceil(2);
    let mut half = vec![0u8; n];
    let mut fold = vec![0usize; n];
    for (pos, &subject) in order.iter().enumerate() {
        if pos < n0 {
            half[subject] = 0;
            fold[subject] = fold_for_position(pos, n0, k, true);
        } else {
            half[subject] = 1;
            fold[subject] = fold_for_position(pos - n0, n - n0, k, false);
        }
    }
    Ok(FoldAssignment { half, fold, k })
}

/// Shuffles subjects into two halves with a single fold per half: the
/// plug-in path where each half's model is fit and evaluated on the same
/// subjects, for samples too small to cross-fit.
///
/// Deterministic in (n, seed) and uses the same half split as
/// [`make_folds`] at equal seeds.
pub fn make_plugin_folds(n: usize, seed: u64) -> Result<FoldAssignment> {
    if n < 2 {
        return Err(Error::Validation(format!(
            "n = {n} is too small to split into halves; need n >= 2"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = CounterRng::from_path(seed, &[0x464F_4C44]);
    rng.shuffle(&mut order);

    let n0 = n.div_ceil(2);
    let mut half = vec![0u8; n];
    for (pos, &subject) in order.iter().enumerate() {
        half[subject] = u8::from(pos >= n0);
    }
    Ok(FoldAssignment {
        half,
        fold: vec![0; n],
        k: 1,
    })
}

/// Maps a within-half position to a fold. Remainder subjects land in the
/// lowest folds when `extras_low`, otherwise in the highest folds, so the
/// two halves' remainders complement each other.
fn fold_for_position(pos: usize, half_size: usize, k: usize, extras_low: bool) -> usize {
    let base = half_size / k;
    let rem = half_size % k;
    let big_folds = if extras_low {
        (0..rem).collect::<Vec<_>>()
    } else {
        (k - rem..k).collect::<Vec<_>>()
    };
    let mut cursor = 0usize;
    for f in 0..k {
        let size = base + usize::from(big_folds.contains(&f));
        if pos < cursor + size {
            return f;
        }
        cursor += size;
    }
    unreachable!("position {pos} beyond half of size {half_size}");
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.half.len()
    }

    pub fn half_of(&self, subject: usize) -> u8 {
        self.half[subject]
    }

    pub fn fold_of(&self, subject: usize) -> usize {
        self.fold[subject]
    }

    /// Subjects in the given half, ascending.
    pub fn half_members(&self, half: u8) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.half[i] == half).collect()
    }

    /// Subjects of `half` outside fold `k` (training rows) and inside it
    /// (evaluation rows), both ascending. With a single fold (plug-in
    /// assignment) the two sets coincide: the whole half.
    pub fn train_eval(&self, half: u8, fold: usize) -> (Vec<usize>, Vec<usize>) {
        if self.k == 1 {
            let members = self.half_members(half);
            return (members.clone(), members);
        }
        let mut train = Vec::new();
        let mut eval = Vec::new();
        for i in 0..self.n() {
            if self.half[i] != half {
                continue;
            }
            if self.fold[i] == fold {
                eval.push(i);
            } else {
                train.push(i);
            }
        }
        (train, eval)
    }
}

/// Optional JSON sidecar accompanying a CSV file.
///
/// `missing` lists feature columns whose empty (or `NA`) cells are zero
/// filled, with a companion `<name>_missing` indicator column appended to
/// the feature set. `base_set` declares default base-set column names.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SidecarSchema {
    #[serde(default)]
    pub missing: Vec<String>,
    #[serde(default)]
    pub base_set: Vec<String>,
}

impl SidecarSchema {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("sidecar schema: {e}")))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// Loads a long-format CSV (`subject_id,time,y,x1,...`).
///
/// Subjects keep first-appearance order; timepoints are the sorted distinct
/// time values and every subject must cover all of them exactly once.
pub fn load_long_csv<R: Read>(reader: R, schema: Option<&SidecarSchema>) -> Result<LongitudinalDataset> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .clone();
    let cols: Vec<String> = headers.iter().map(str::to_string).collect();
    if cols.len() < 4 || cols[0] != "subject_id" || cols[1] != "time" || cols[2] != "y" {
        return Err(Error::Parse(
            "header must be subject_id,time,y followed by at least one feature column".into(),
        ));
    }
    let feature_cols: Vec<String> = cols[3..].to_vec();
    let missing_cols: Vec<usize> = match schema {
        Some(s) => {
            let mut idx = Vec::new();
            for name in &s.missing {
                match feature_cols.iter().position(|c| c == name) {
                    Some(j) => idx.push(j),
                    None => {
                        return Err(Error::Parse(format!(
                            "schema declares missing column {name} absent from the csv header"
                        )))
                    }
                }
            }
            idx
        }
        None => Vec::new(),
    };

    struct Row {
        subject: String,
        time: f64,
        y: f64,
        x: Vec<f64>,
    }

    let p_raw = feature_cols.len();
    let mut rows: Vec<Row> = Vec::new();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("csv record {}: {e}", line + 2)))?;
        if record.len() != cols.len() {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                cols.len()
            )));
        }
        let subject = record[0].to_string();
        let time: f64 = record[1]
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: time {:?} is not numeric", line + 2, &record[1])))?;
        let y: f64 = record[2]
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: y {:?} is not numeric", line + 2, &record[2])))?;
        let mut x = Vec::with_capacity(p_raw + missing_cols.len());
        for j in 0..p_raw {
            let cell = record[3 + j].trim();
            if cell.is_empty() || cell == "NA" {
                if missing_cols.contains(&j) {
                    x.push(0.0);
                } else {
                    return Err(Error::Parse(format!(
                        "row {}: column {} is missing but not declared in the schema",
                        line + 2,
                        feature_cols[j]
                    )));
                }
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Parse(format!(
                        "row {}: column {} value {cell:?} is not numeric",
                        line + 2,
                        feature_cols[j]
                    ))
                })?;
                x.push(v);
            }
        }
        for &j in &missing_cols {
            let cell = record[3 + j].trim();
            x.push(f64::from(cell.is_empty() || cell == "NA"));
        }
        rows.push(Row { subject, time, y, x });
    }
    if rows.is_empty() {
        return Err(Error::Validation("csv contains no data rows".into()));
    }

    let mut feature_names = feature_cols.clone();
    for &j in &missing_cols {
        feature_names.push(format!("{}_missing", feature_cols[j]));
    }
    let p = feature_names.len();

    // Distinct times, sorted; bitwise identity is the grouping key.
    let mut time_labels: Vec<f64> = Vec::new();
    for r in &rows {
        if !time_labels.contains(&r.time) {
            time_labels.push(r.time);
        }
    }
    time_labels.sort_by(|a, b| a.partial_cmp(b).expect("times are finite"));
    let t_count = time_labels.len();
    let time_index: HashMap<u64, usize> =
        time_labels.iter().enumerate().map(|(i, t)| (t.to_bits(), i)).collect();

    let mut subject_ids: Vec<String> = Vec::new();
    let mut subject_index: HashMap<String, usize> = HashMap::new();
    for r in &rows {
        if !subject_index.contains_key(&r.subject) {
            subject_index.insert(r.subject.clone(), subject_ids.len());
            subject_ids.push(r.subject.clone());
        }
    }
    let n = subject_ids.len();

    let mut features: Vec<Array2<f64>> = (0..t_count).map(|_| Array2::zeros((n, p))).collect();
    let mut outcomes: Vec<Vec<f64>> = vec![vec![0.0; n]; t_count];
    let mut seen = vec![vec![false; t_count]; n];
    for r in &rows {
        let i = subject_index[&r.subject];
        let t = time_index[&r.time.to_bits()];
        if seen[i][t] {
            return Err(Error::Validation(format!(
                "subject {} appears more than once at time {}",
                r.subject, r.time
            )));
        }
        seen[i][t] = true;
        outcomes[t][i] = r.y;
        for (j, &v) in r.x.iter().enumerate() {
            features[t][(i, j)] = v;
        }
    }
    for (i, flags) in seen.iter().enumerate() {
        if let Some(t) = flags.iter().position(|&s| !s) {
            return Err(Error::Validation(format!(
                "panel is not balanced: subject {} has no row at time {}",
                subject_ids[i], time_labels[t]
            )));
        }
    }

    LongitudinalDataset::new(subject_ids, time_labels, feature_names, features, outcomes)
}

pub fn load_long_csv_file(path: &Path, schema: Option<&SidecarSchema>) -> Result<LongitudinalDataset> {
    let file = std::fs::File::open(path)?;
    load_long_csv(std::io::BufReader::new(file), schema)
}

/// Writes the long-format CSV. Floats are rendered in shortest round-trip
/// form, so load(write(d)) reproduces every finite value bit for bit.
pub fn write_long_csv<W: Write>(data: &LongitudinalDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["subject_id".to_string(), "time".into(), "y".into()];
    header.extend(data.feature_names().iter().cloned());
    w.write_record(&header).map_err(|e| Error::Parse(format!("csv write: {e}")))?;
    for i in 0..data.n() {
        for t in 0..data.t_count() {
            let mut record = vec![
                data.subject_ids()[i].clone(),
                format!("{}", data.time_labels()[t]),
                format!("{}", data.outcomes_at(t)[i]),
            ];
            for j in 0..data.p() {
                record.push(format!("{}", data.features_at(t)[(i, j)]));
            }
            w.write_record(&record).map_err(|e| Error::Parse(format!("csv write: {e}")))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Copies the given rows and columns of a matrix into a dense owned matrix.
pub fn select_submatrix(m: ndarray::ArrayView2<f64>, rows: &[usize], cols: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), cols.len()));
    for (ri, &r) in rows.iter().enumerate() {
        for (ci, &c) in cols.iter().enumerate() {
            out[(ri, ci)] = m[(r, c)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_csv() -> &'static str {
        "subject_id,time,y,x1,x2\n\
         a,1,0,0.5,1.25\n\
         a,2,1,0.25,-0.0625\n\
         b,1,1,-1.5,2\n\
         b,2,0,3,0.1\n"
    }

    #[test]
    fn loads_balanced_panel() {
        let d = load_long_csv(toy_csv().as_bytes(), None).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.t_count(), 2);
        assert_eq!(d.p(), 2);
        assert_eq!(d.subject_ids(), ["a", "b"]);
        assert_eq!(d.time_labels(), [1.0, 2.0]);
        assert_eq!(d.features_at(0)[(1, 0)], -1.5);
        assert_eq!(d.outcomes_at(1), [1.0, 0.0]);
        d.require_binary_outcomes().unwrap();
    }

    #[test]
    fn ragged_panel_names_the_subject() {
        let csv = "subject_id,time,y,x1\na,1,0,1\na,2,1,2\nb,1,0,3\n";
        let err = load_long_csv(csv.as_bytes(), None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("subject b"), "message was: {msg}");
        assert!(msg.contains("time 2"), "message was: {msg}");
    }

    #[test]
    fn duplicate_observation_is_rejected() {
        let csv = "subject_id,time,y,x1\na,1,0,1\na,1,1,2\n";
        let err = load_long_csv(csv.as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("more than once"));
    }

    #[test]
    fn nonbinary_outcome_detected_on_demand() {
        let csv = "subject_id,time,y,x1\na,1,2,1\nb,1,0,2\n";
        let d = load_long_csv(csv.as_bytes(), None).unwrap();
        let err = d.require_binary_outcomes().unwrap_err();
        assert!(err.to_string().contains("not binary"));
    }

    #[test]
    fn missing_cells_need_schema_declaration() {
        let csv = "subject_id,time,y,x1,x2\na,1,0,,1\nb,1,1,2,3\n";
        let err = load_long_csv(csv.as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("not declared"));

        let schema = SidecarSchema { missing: vec!["x1".into()], base_set: vec![] };
        let d = load_long_csv(csv.as_bytes(), Some(&schema)).unwrap();
        assert_eq!(d.p(), 3);
        assert_eq!(d.feature_names()[2], "x1_missing");
        assert_eq!(d.features_at(0)[(0, 0)], 0.0);
        assert_eq!(d.features_at(0)[(0, 2)], 1.0);
        assert_eq!(d.features_at(0)[(1, 2)], 0.0);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let d = load_long_csv(toy_csv().as_bytes(), None).unwrap();
        let mut buf = Vec::new();
        write_long_csv(&d, &mut buf).unwrap();
        let d2 = load_long_csv(buf.as_slice(), None).unwrap();
        assert_eq!(d.subject_ids(), d2.subject_ids());
        for t in 0..d.t_count() {
            for i in 0..d.n() {
                assert_eq!(d.outcomes_at(t)[i].to_bits(), d2.outcomes_at(t)[i].to_bits());
                for j in 0..d.p() {
                    assert_eq!(
                        d.features_at(t)[(i, j)].to_bits(),
                        d2.features_at(t)[(i, j)].to_bits()
                    );
                }
            }
        }
    }

    #[test]
    fn variable_set_rules() {
        assert!(VariableSet::new(vec![], vec![0], 3).is_err());
        assert!(VariableSet::new(vec![0], vec![0], 3).is_err());
        assert!(VariableSet::new(vec![3], vec![], 3).is_err());
        assert!(VariableSet::new(vec![1, 1], vec![], 3).is_err());
        let v = VariableSet::new(vec![2], vec![0, 1], 4).unwrap();
        assert_eq!(v.marginal(), [0, 1, 2]);
        assert_eq!(v.complement_of_s(4), [0, 1, 3]);
    }

    #[test]
    fn window_rules() {
        assert!(TimeWindow::new(1, 0, 4).is_err());
        assert!(TimeWindow::new(0, 4, 4).is_err());
        let w = TimeWindow::new(1, 3, 4).unwrap();
        assert_eq!(w.indices().collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn folds_for_even_n() {
        let f = make_folds(10, 5, 7).unwrap();
        let mut global = vec![0usize; 5];
        let mut halves = [0usize; 2];
        for i in 0..10 {
            global[f.fold_of(i)] += 1;
            halves[f.half_of(i) as usize] += 1;
        }
        assert_eq!(halves, [5, 5]);
        assert_eq!(global, [2, 2, 2, 2, 2]);
    }

    #[test]
    fn folds_for_odd_n() {
        let f = make_folds(11, 5, 7).unwrap();
        let mut global = vec![0usize; 5];
        let mut halves = [0usize; 2];
        for i in 0..11 {
            global[f.fold_of(i)] += 1;
            halves[f.half_of(i) as usize] += 1;
        }
        assert_eq!(halves, [6, 5]);
        let mut sorted = global.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, [2, 2, 2, 2, 3]);
        let max = *global.iter().max().unwrap();
        let min = *global.iter().min().unwrap();
        assert!(max - min <= 1);
    }

    #[test]
    fn fold_sizes_within_one_across_many_shapes() {
        for n in [10, 11, 13, 20, 37, 101, 250] {
            for k in [2, 3, 5] {
                if n / 2 < k {
                    continue;
                }
                let f = make_folds(n, k, 99).unwrap();
                let mut global = vec![0usize; k];
                for i in 0..n {
                    global[f.fold_of(i)] += 1;
                    let (train, eval) = f.train_eval(f.half_of(i), f.fold_of(i));
                    assert!(eval.contains(&i));
                    assert!(!train.contains(&i));
                }
                let max = *global.iter().max().unwrap();
                let min = *global.iter().min().unwrap();
                assert!(max - min <= 1, "n={n} k={k} sizes {global:?}");
                for half in [0u8, 1] {
                    for fold in 0..k {
                        let (_, eval) = f.train_eval(half, fold);
                        assert!(!eval.is_empty(), "empty cell n={n} k={k} half={half} fold={fold}");
                    }
                }
            }
        }
    }

    #[test]
    fn folds_are_deterministic_and_seed_sensitive() {
        let a = make_folds(40, 5, 1).unwrap();
        let b = make_folds(40, 5, 1).unwrap();
        let c = make_folds(40, 5, 2).unwrap();
        assert_eq!(a.fold, b.fold);
        assert_eq!(a.half, b.half);
        assert!(a.fold != c.fold || a.half != c.half);
    }

    #[test]
    fn too_few_subjects_for_k() {
        let err = make_folds(9, 5, 1).unwrap_err();
        assert!(err.to_string().contains("smaller K"));
        assert!(make_folds(10, 1, 1).is_err());
    }

    #[test]
    fn plugin_folds_train_on_the_evaluation_half() {
        let f = make_plugin_folds(7, 3).unwrap();
        assert_eq!(f.k(), 1);
        let mut halves = [0usize; 2];
        for i in 0..7 {
            halves[f.half_of(i) as usize] += 1;
            assert_eq!(f.fold_of(i), 0);
        }
        assert_eq!(halves, [4, 3]);
        for half in [0u8, 1] {
            let (train, eval) = f.train_eval(half, 0);
            assert_eq!(train, eval);
            assert_eq!(eval, f.half_members(half));
        }
        // Same half split as the cross-fitted assignment at equal seeds.
        let g = make_folds(20, 2, 3).unwrap();
        let p = make_plugin_folds(20, 3).unwrap();
        assert_eq!(g.half, p.half);
        assert!(make_plugin_folds(1, 0).is_err());
    }

    #[test]
    fn submatrix_selects_in_order() {
        let m = Array2::from_shape_vec((3, 3), (0..9).map(f64::from).collect()).unwrap();
        let s = select_submatrix(m.view(), &[2, 0], &[1]);
        assert_eq!(s.shape(), [2, 1]);
        assert_eq!(s[(0, 0)], 7.0);
        assert_eq!(s[(1, 0)], 1.0);
    }
}
