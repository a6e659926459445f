//! Tabular datasets with a designated target column.
//!
//! A [`Dataset`] is an immutable matrix of finite real features plus one
//! target column, either numeric or categorical. All operations return new
//! values; nothing here mutates in place, so datasets can be shared freely
//! across threads.
//!
//! The on-disk format is plain CSV: one header row, comma separated, UTF-8,
//! `.` as the decimal separator. The target column may sit anywhere in the
//! file; it is pulled out of the feature matrix on load and appended as the
//! last column on save.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the target column holds numbers or class labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Numeric,
    Categorical,
}

/// The full target column of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Numeric(v) => v.len(),
            Target::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> TargetKind {
        match self {
            Target::Numeric(_) => TargetKind::Numeric,
            Target::Categorical(_) => TargetKind::Categorical,
        }
    }
}

/// Borrowed view of a single sample's target value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleTarget<'a> {
    Numeric(f64),
    Categorical(&'a str),
}

/// Immutable sample matrix with feature names and a target column.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Row-major storage, `n_samples * feature_count` entries.
    samples: Vec<f64>,
    feature_count: usize,
    feature_names: Vec<String>,
    target_name: String,
    target: Target,
    /// Sorted distinct labels; empty for numeric targets.
    class_labels: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row vectors, validating shape and finiteness.
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        target_name: impl Into<String>,
        target: Target,
    ) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::InvalidConfig("dataset needs at least one feature".into()));
        }
        let unique: BTreeSet<&str> = feature_names.iter().map(String::as_str).collect();
        if unique.len() != feature_names.len() {
            return Err(Error::InvalidConfig("feature names must be unique".into()));
        }
        if target.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: target.len(),
            });
        }
        let feature_count = feature_names.len();
        let mut samples = Vec::with_capacity(rows.len() * feature_count);
        for row in &rows {
            if row.len() != feature_count {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: feature_count,
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("feature values must be finite".into()));
            }
            samples.extend_from_slice(row);
        }
        if let Target::Numeric(vals) = &target {
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("numeric targets must be finite".into()));
            }
        }
        let class_labels = match &target {
            Target::Numeric(_) => Vec::new(),
            Target::Categorical(labels) => {
                let set: BTreeSet<&String> = labels.iter().collect();
                set.into_iter().cloned().collect()
            }
        };
        Ok(Dataset {
            samples,
            feature_count,
            feature_names,
            target_name: target_name.into(),
            target,
            class_labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.target.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn target_kind(&self) -> TargetKind {
        self.target.kind()
    }

    /// Sorted distinct class labels; empty for numeric targets.
    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.feature_count..(i + 1) * self.feature_count]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks(self.feature_count)
    }

    /// Copies out one feature column.
    pub fn feature(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn sample_target(&self, i: usize) -> SampleTarget<'_> {
        match &self.target {
            Target::Numeric(v) => SampleTarget::Numeric(v[i]),
            Target::Categorical(v) => SampleTarget::Categorical(&v[i]),
        }
    }

    /// Reads a CSV file with a header row, pulling `target_col` out as the target.
    ///
    /// Cells must parse as finite numbers; empty cells are rejected rather
    /// than imputed.
    pub fn from_csv(path: impl AsRef<Path>, target_col: &str, kind: TargetKind) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let target_idx = headers
            .iter()
            .position(|h| h == target_col)
            .ok_or_else(|| Error::MissingTargetColumn(target_col.to_string()))?;
        let feature_names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != target_idx)
            .map(|(_, h)| h.clone())
            .collect();

        let mut rows = Vec::new();
        let mut numeric_targets = Vec::new();
        let mut label_targets = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let row_no = i + 1;
            let mut row = Vec::with_capacity(feature_names.len());
            for (col, field) in record.iter().enumerate() {
                let col_no = col + 1;
                if field.is_empty() {
                    return Err(Error::MissingValue {
                        row: row_no,
                        column: col_no,
                    });
                }
                if col == target_idx {
                    match kind {
                        TargetKind::Numeric => {
                            numeric_targets.push(parse_finite(field, row_no, col_no)?)
                        }
                        TargetKind::Categorical => label_targets.push(field.to_string()),
                    }
                } else {
                    row.push(parse_finite(field, row_no, col_no)?);
                }
            }
            rows.push(row);
        }
        let target = match kind {
            TargetKind::Numeric => Target::Numeric(numeric_targets),
            TargetKind::Categorical => Target::Categorical(label_targets),
        };
        Dataset::from_rows(feature_names, rows, target_col, target)
    }

    /// Writes the dataset as CSV, features first and the target last.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.target_name);
        writer.write_record(&header)?;
        for i in 0..self.n_samples() {
            let mut record: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            match self.sample_target(i) {
                SampleTarget::Numeric(v) => record.push(v.to_string()),
                SampleTarget::Categorical(l) => record.push(l.to_string()),
            }
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Min-max normalizes every feature into `[0, 1]`, returning the mapped
    /// dataset and the parameters needed to map unseen data the same way.
    pub fn normalize(&self) -> Result<(Dataset, NormParams)> {
        let params = NormParams::fit(self)?;
        let mapped = params.apply(self)?;
        Ok((mapped, params))
    }

    /// Deterministic stratified train/test split.
    ///
    /// Categorical targets are split per class so both halves keep the class
    /// proportions; numeric targets are split on a plain seeded permutation.
    /// Rows keep their original relative order inside each half.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        let n = self.n_samples();
        if n < 2 {
            return Err(Error::TooFewSamples { got: n, needed: 2 });
        }
        let perm = permutation(n, seed);
        // Bucket permuted row indices by class (a single bucket when numeric).
        let buckets: Vec<Vec<usize>> = match &self.target {
            Target::Numeric(_) => vec![perm],
            Target::Categorical(labels) => {
                let mut buckets = vec![Vec::new(); self.class_labels.len()];
                for &i in &perm {
                    let c = self
                        .class_labels
                        .binary_search(&labels[i])
                        .expect("label is in class_labels");
                    buckets[c].push(i);
                }
                buckets
            }
        };
        let mut take: Vec<usize> = buckets
            .iter()
            .map(|b| (b.len() as f64 * train_fraction).round() as usize)
            .collect();
        // Keep both halves non-empty: shave or grow the largest bucket.
        loop {
            let total: usize = take.iter().sum();
            if total == n {
                let i = largest_bucket(&take);
                take[i] -= 1;
            } else if total == 0 {
                let i = largest_bucket(&buckets.iter().map(Vec::len).collect::<Vec<_>>());
                take[i] = 1;
            } else {
                break;
            }
        }
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        for (bucket, &k) in buckets.iter().zip(&take) {
            train_idx.extend_from_slice(&bucket[..k]);
            test_idx.extend_from_slice(&bucket[k..]);
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        Ok((self.select_rows(&train_idx), self.select_rows(&test_idx)))
    }

    /// Returns a copy with rows permuted by a seeded Fisher-Yates shuffle
    /// (ChaCha8 keystream, so the permutation is identical on every platform).
    pub fn shuffle(&self, seed: u64) -> Dataset {
        let perm = permutation(self.n_samples(), seed);
        self.select_rows(&perm)
    }

    /// Restricts columns to `keep`, preserving their original relative order.
    pub fn reduce(&self, keep: &FeatureSet) -> Result<Dataset> {
        if keep.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        for &j in keep.indices() {
            if j >= self.feature_count {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    count: self.feature_count,
                });
            }
        }
        let feature_names = keep
            .indices()
            .iter()
            .map(|&j| self.feature_names[j].clone())
            .collect();
        let mut samples = Vec::with_capacity(self.n_samples() * keep.len());
        for row in self.rows() {
            samples.extend(keep.indices().iter().map(|&j| row[j]));
        }
        Ok(Dataset {
            samples,
            feature_count: keep.len(),
            feature_names,
            target_name: self.target_name.clone(),
            target: self.target.clone(),
            class_labels: self.class_labels.clone(),
        })
    }

    fn select_rows(&self, idx: &[usize]) -> Dataset {
        let mut samples = Vec::with_capacity(idx.len() * self.feature_count);
        for &i in idx {
            samples.extend_from_slice(self.row(i));
        }
        let target = match &self.target {
            Target::Numeric(v) => Target::Numeric(idx.iter().map(|&i| v[i]).collect()),
            Target::Categorical(v) => {
                Target::Categorical(idx.iter().map(|&i| v[i].clone()).collect())
            }
        };
        Dataset {
            samples,
            feature_count: self.feature_count,
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            target,
            class_labels: self.class_labels.clone(),
        }
    }
}

fn parse_finite(field: &str, row: usize, column: usize) -> Result<f64> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::UnparsableCell {
            row,
            column,
            value: field.to_string(),
        }),
    }
}

fn largest_bucket(sizes: &[usize]) -> usize {
    let mut best = 0;
    for (i, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = i;
        }
    }
    best
}

/// Seeded Fisher-Yates permutation of `0..n` driven by ChaCha8.
pub(crate) fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Per-feature min/max recorded on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl NormParams {
    /// Records the min/max of every feature.
    pub fn fit(d: &Dataset) -> Result<Self> {
        if d.n_samples() == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut min = vec![f64::INFINITY; d.feature_count()];
        let mut max = vec![f64::NEG_INFINITY; d.feature_count()];
        for row in d.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(NormParams { min, max })
    }

    /// Identity parameters (`[0, 1]` per feature), for data already normalized.
    pub fn identity(feature_count: usize) -> Self {
        NormParams {
            min: vec![0.0; feature_count],
            max: vec![1.0; feature_count],
        }
    }

    pub fn feature_count(&self) -> usize {
        self.min.len()
    }

    /// Maps a dataset into `[0, 1]`, clamping values outside the recorded range.
    /// Constant features map to 0.
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        if d.feature_count() != self.min.len() {
            return Err(Error::LengthMismatch {
                left: d.feature_count(),
                right: self.min.len(),
            });
        }
        let mut out = d.clone();
        for i in 0..out.n_samples() {
            for j in 0..out.feature_count {
                let v = out.samples[i * out.feature_count + j];
                out.samples[i * out.feature_count + j] = self.map_value(j, v);
            }
        }
        Ok(out)
    }

    /// Maps a single raw row into `[0, 1]` with clamping.
    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.min.len() {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: self.min.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.map_value(j, v))
            .collect())
    }

    /// Maps a normalized row back to original units.
    pub fn denormalize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.min[j] + v * (self.max[j] - self.min[j]))
            .collect()
    }

    fn map_value(&self, j: usize, v: f64) -> f64 {
        let (lo, hi) = (self.min[j], self.max[j]);
        if hi <= lo {
            return 0.0;
        }
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    }
}

/// Ordered set of feature indices referring back to an originating dataset.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSet {
    indices: Vec<usize>,
}

impl FeatureSet {
    /// Builds a set from arbitrary indices, sorting and deduplicating.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        FeatureSet { indices }
    }

    /// Every index below `feature_count`.
    pub fn all(feature_count: usize) -> Self {
        FeatureSet {
            indices: (0..feature_count).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &FeatureSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(file)?)
    }
}

/// Recipe for a synthetic classification dataset: a handful of informative
/// Gaussian features plus uniform noise columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub samples: usize,
    pub informative: usize,
    pub noise: usize,
    pub classes: usize,
    /// Distance between consecutive class means, in units of the feature's
    /// standard deviation.
    pub separation: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.informative == 0 || self.noise == 0 || self.classes == 0 {
            return Err(Error::InvalidConfig(
                "synthetic data needs positive sample, feature and class counts".into(),
            ));
        }
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return Err(Error::InvalidConfig("separation must be positive".into()));
        }
        Ok(())
    }
}

/// Generates a synthetic dataset and the indices of its informative features.
///
/// Class labels rotate round-robin, so counts stay balanced within one.
/// Informative feature `j` for class `c` is drawn from `N(c * separation, 1)`
/// and the column is then min-max normalized; noise features are uniform
/// `[0, 1]` and independent of the class.
pub fn synthesize(spec: &SynthSpec) -> Result<(Dataset, FeatureSet)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let feature_count = spec.informative + spec.noise;
    let unit_normal = Normal::new(0.0, 1.0).expect("valid Normal");

    let mut rows = Vec::with_capacity(spec.samples);
    let mut labels = Vec::with_capacity(spec.samples);
    for i in 0..spec.samples {
        let class = i % spec.classes;
        let mut row = Vec::with_capacity(feature_count);
        for j in 0..spec.informative {
            // cycle the class-to-mean assignment per feature so classes
            // differ in direction, not just in scale, after normalization
            let level = (class + j) % spec.classes;
            row.push(level as f64 * spec.separation + unit_normal.sample(&mut rng));
        }
        for _ in 0..spec.noise {
            row.push(rng.random_range(0.0..1.0));
        }
        rows.push(row);
        labels.push(format!("c{class}"));
    }
    // Min-max the informative columns so every feature lives in [0, 1].
    for j in 0..spec.informative {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for row in &rows {
            lo = lo.min(row[j]);
            hi = hi.max(row[j]);
        }
        let span = hi - lo;
        for row in &mut rows {
            row[j] = if span > 0.0 { (row[j] - lo) / span } else { 0.0 };
        }
    }

    let feature_names = (0..feature_count).map(|j| format!("f{j}")).collect();
    let data = Dataset::from_rows(feature_names, rows, "class", Target::Categorical(labels))?;
    Ok((data, FeatureSet::from_indices(0..spec.informative)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write as _;

    fn toy() -> Dataset {
        Dataset::from_rows(
            vec!["f0".into(), "f1".into(), "f2".into(), "f3".into()],
            vec![
                vec![0.0, 5.0, 3.0, 1.0],
                vec![5.0, 0.0, 3.0, 2.0],
                vec![10.0, 2.5, 3.0, 3.0],
            ],
            "y",
            Target::Categorical(vec!["a".into(), "b".into(), "a".into()]),
        )
        .unwrap()
    }

    #[test]
    fn csv_parses_header_and_classes() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "f1,f2,class\n1,2,A\n3,4,B").unwrap();
        let d = Dataset::from_csv(f.path(), "class", TargetKind::Categorical).unwrap();
        assert_eq!(d.n_samples(), 2);
        assert_eq!(d.feature_count(), 2);
        assert_eq!(d.class_labels(), ["A", "B"]);
        assert_eq!(d.row(1), [3.0, 4.0]);
    }

    #[test]
    fn csv_numeric_target_single_column() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,y\n0,0").unwrap();
        let d = Dataset::from_csv(f.path(), "y", TargetKind::Numeric).unwrap();
        assert_eq!(d.n_samples(), 1);
        assert_eq!(d.feature_count(), 1);
        assert_eq!(d.target(), &Target::Numeric(vec![0.0]));
    }

    #[test]
    fn csv_rejects_unparsable_cell() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "f1,f2,class\n1,abc,A").unwrap();
        let err = Dataset::from_csv(f.path(), "class", TargetKind::Categorical).unwrap_err();
        assert!(matches!(err, Error::UnparsableCell { row: 1, column: 2, .. }), "{err}");
    }

    #[test]
    fn csv_rejects_missing_value() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "f1,f2,class\n1,,A").unwrap();
        let err = Dataset::from_csv(f.path(), "class", TargetKind::Categorical).unwrap_err();
        assert!(matches!(err, Error::MissingValue { row: 1, column: 2 }), "{err}");
    }

    #[test]
    fn csv_missing_file_and_target_column() {
        let err = Dataset::from_csv("/nonexistent/x.csv", "y", TargetKind::Numeric).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,b\n1,2").unwrap();
        let err = Dataset::from_csv(f.path(), "zzz", TargetKind::Numeric).unwrap_err();
        assert!(matches!(err, Error::MissingTargetColumn(_)));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = toy();
        let f = tempfile::NamedTempFile::new().unwrap();
        d.to_csv(f.path()).unwrap();
        let back = Dataset::from_csv(f.path(), "y", TargetKind::Categorical).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn normalize_maps_into_unit_interval() {
        let d = Dataset::from_rows(
            vec!["a".into()],
            vec![vec![0.0], vec![5.0], vec![10.0]],
            "y",
            Target::Numeric(vec![0.0, 0.0, 0.0]),
        )
        .unwrap();
        let (n, _) = d.normalize().unwrap();
        assert_eq!(n.feature(0), [0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_constant_column_maps_to_zero() {
        let d = Dataset::from_rows(
            vec!["a".into()],
            vec![vec![3.0], vec![3.0]],
            "y",
            Target::Numeric(vec![0.0, 0.0]),
        )
        .unwrap();
        let (n, params) = d.normalize().unwrap();
        assert_eq!(n.feature(0), [0.0, 0.0]);
        assert_eq!(params.apply_row(&[7.0]).unwrap(), [0.0]);
    }

    #[test]
    fn apply_clamps_unseen_values() {
        let d = Dataset::from_rows(
            vec!["a".into()],
            vec![vec![0.0], vec![10.0]],
            "y",
            Target::Numeric(vec![0.0, 0.0]),
        )
        .unwrap();
        let (_, params) = d.normalize().unwrap();
        assert_eq!(params.apply_row(&[12.0]).unwrap(), [1.0]);
        assert_eq!(params.apply_row(&[-3.0]).unwrap(), [0.0]);
    }

    #[test]
    fn normalize_then_apply_is_identical_on_train() {
        let d = toy();
        let (n, params) = d.normalize().unwrap();
        let again = params.apply(&d).unwrap();
        assert_eq!(n, again);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_rows(
            vec!["x".into()],
            rows,
            "y",
            Target::Numeric((0..10).map(f64::from).collect()),
        )
        .unwrap();
        let (tr, te) = d.split(0.8, 3).unwrap();
        assert_eq!((tr.n_samples(), te.n_samples()), (8, 2));
        let (tr2, te2) = d.split(0.8, 3).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
    }

    #[test]
    fn split_is_stratified() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels = (0..10).map(|i| if i < 5 { "A" } else { "B" }.into()).collect();
        let d = Dataset::from_rows(vec!["x".into()], rows, "y", Target::Categorical(labels))
            .unwrap();
        let (tr, _) = d.split(0.8, 11).unwrap();
        let count = |lbl: &str| match tr.target() {
            Target::Categorical(v) => v.iter().filter(|l| *l == lbl).count(),
            _ => unreachable!(),
        };
        assert_eq!(count("A"), 4);
        assert_eq!(count("B"), 4);
    }

    #[test]
    fn split_rejects_tiny_datasets() {
        let d = Dataset::from_rows(
            vec!["x".into()],
            vec![vec![1.0]],
            "y",
            Target::Numeric(vec![0.0]),
        )
        .unwrap();
        assert!(matches!(
            d.split(0.8, 0).unwrap_err(),
            Error::TooFewSamples { got: 1, needed: 2 }
        ));
    }

    #[test]
    fn shuffle_same_seed_same_order_different_seeds_differ() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_rows(
            vec!["x".into()],
            rows,
            "y",
            Target::Numeric((0..8).map(f64::from).collect()),
        )
        .unwrap();
        assert_eq!(d.shuffle(5), d.shuffle(5));
        // distinct rows, so across a batch of seeds at least one permutation differs
        assert!((1..=10u64).any(|s| d.shuffle(s) != d.shuffle(s + 10)));
    }

    #[test]
    fn reduce_keeps_order_and_names() {
        let d = toy();
        let r = d.reduce(&FeatureSet::from_indices([0, 2])).unwrap();
        assert_eq!(r.feature_names(), ["f0", "f2"]);
        assert_eq!(r.row(0), [0.0, 3.0]);
        assert_eq!(d.reduce(&FeatureSet::all(4)).unwrap(), d);
    }

    #[test]
    fn reduce_error_cases() {
        let d = toy();
        assert!(matches!(
            d.reduce(&FeatureSet::default()).unwrap_err(),
            Error::EmptyFeatureSet
        ));
        assert!(matches!(
            d.reduce(&FeatureSet::from_indices([9])).unwrap_err(),
            Error::IndexOutOfRange { index: 9, count: 4 }
        ));
    }

    #[test]
    fn synth_shape_and_balance() {
        let (d, truth) = synthesize(&SynthSpec {
            samples: 200,
            informative: 5,
            noise: 95,
            classes: 2,
            separation: 4.0,
            seed: 7,
        })
        .unwrap();
        assert_eq!((d.n_samples(), d.feature_count()), (200, 100));
        assert_eq!(truth.indices(), [0, 1, 2, 3, 4]);
        let counts: Vec<usize> = d
            .class_labels()
            .iter()
            .map(|c| match d.target() {
                Target::Categorical(v) => v.iter().filter(|l| *l == c).count(),
                _ => unreachable!(),
            })
            .collect();
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        for row in d.rows() {
            assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn synth_rejects_bad_config() {
        let err = synthesize(&SynthSpec {
            samples: 0,
            informative: 1,
            noise: 1,
            classes: 2,
            separation: 1.0,
            seed: 0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    proptest! {
        #[test]
        fn shuffle_preserves_row_multiset(n in 1usize..40, seed in 0u64..500) {
            let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect();
            let d = Dataset::from_rows(
                vec!["a".into(), "b".into()],
                rows,
                "y",
                Target::Numeric((0..n).map(|i| i as f64).collect()),
            ).unwrap();
            let s = d.shuffle(seed);
            let mut before: Vec<(Vec<f64>, String)> = (0..n)
                .map(|i| (d.row(i).to_vec(), format!("{:?}", d.sample_target(i))))
                .collect();
            let mut after: Vec<(Vec<f64>, String)> = (0..n)
                .map(|i| (s.row(i).to_vec(), format!("{:?}", s.sample_target(i))))
                .collect();
            before.sort_by(|a, b| a.partial_cmp(b).unwrap());
            after.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assert_eq!(before, after);
        }

        #[test]
        fn split_partitions_the_input(n in 2usize..40, frac in 0.1f64..0.9, seed in 0u64..500) {
            let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
            let d = Dataset::from_rows(
                vec!["x".into()],
                rows,
                "y",
                Target::Numeric((0..n).map(|i| i as f64).collect()),
            ).unwrap();
            let (tr, te) = d.split(frac, seed).unwrap();
            prop_assert_eq!(tr.n_samples() + te.n_samples(), n);
            prop_assert!(tr.n_samples() >= 1 && te.n_samples() >= 1);
            let mut seen: Vec<f64> = tr.rows().chain(te.rows()).map(|r| r[0]).collect();
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let expect: Vec<f64> = (0..n).map(|i| i as f64).collect();
            prop_assert_eq!(seen, expect);
        }

        #[test]
        fn csv_round_trip_value_error_is_tiny(vals in proptest::collection::vec(-1e6f64..1e6, 1..30)) {
            let rows: Vec<Vec<f64>> = vals.iter().map(|&v| vec![v]).collect();
            let d = Dataset::from_rows(
                vec!["x".into()],
                rows,
                "y",
                Target::Numeric(vec![0.0; vals.len()]),
            ).unwrap();
            let f = tempfile::NamedTempFile::new().unwrap();
            d.to_csv(f.path()).unwrap();
            let back = Dataset::from_csv(f.path(), "y", TargetKind::Numeric).unwrap();
            for (a, b) in d.rows().zip(back.rows()) {
                prop_assert!((a[0] - b[0]).abs() <= 1e-12);
            }
        }
    }
}
