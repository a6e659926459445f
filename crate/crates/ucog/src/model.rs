//! The Unsupervised Cognition model: a tree of running-average
//! representations grown incrementally from a stream of inputs.
//!
//! Every representation is the arithmetic mean of the inputs it absorbed,
//! together with an input count and a class-label histogram. Representations
//! sit in [`Cell`]s; the seed cell holds the most generic representations and
//! each representation may own a child cell whose members partition its
//! inputs. Leaves are literals built from a single (possibly repeated) input.
//!
//! Insertion descends from the seed cell. At depth `d` the merge threshold is
//!
//! ```text
//! theta_d = 1 - (1 - theta0) * gamma^d
//! ```
//!
//! so thresholds tighten toward 1 with depth and children always depict
//! strictly more specific subsets than their parents. Training is order
//! sensitive by design: the same rows in a different order grow a different
//! tree, which is exactly what the ensemble machinery in
//! [`selection`](crate::selection) exploits.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, NormParams, SampleTarget, TargetKind};
use crate::error::{Error, Result};

/// Similarity measure between an input and a representation mean.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `dot(a, b) / (|a| |b|)`, clamped to `[0, 1]`. Natural on min-max
    /// normalized (non-negative) data; proportional vectors score 1.
    Cosine,
    /// `1 / (1 + |a - b|)`; scores 1 only on exact equality.
    InverseEuclidean,
}

/// Tunables of the representation tree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcConfig {
    pub metric: Metric,
    /// Depth-0 merge threshold, in `(0, 1)`.
    pub theta0: f64,
    /// Per-depth threshold tightening factor, in `(0, 1)`.
    pub gamma: f64,
    /// Similarities at or above `1 - epsilon_identity` count as duplicates
    /// and are absorbed without growing the tree.
    pub epsilon_identity: f64,
    /// Maximum representation depth; `None` means unbounded.
    pub max_depth: Option<u32>,
    /// Record which input rows each representation absorbed. Costs memory,
    /// changes no behavior; the audit trail is not serialized.
    #[serde(skip)]
    pub audit: bool,
}

impl Default for UcConfig {
    fn default() -> Self {
        UcConfig {
            metric: Metric::Cosine,
            theta0: 0.9,
            gamma: 0.5,
            epsilon_identity: 1e-9,
            max_depth: None,
            audit: false,
        }
    }
}

impl UcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta0 > 0.0 && self.theta0 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "theta0 must be in (0, 1), got {}",
                self.theta0
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.epsilon_identity >= 0.0) || !self.epsilon_identity.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "epsilon_identity must be >= 0, got {}",
                self.epsilon_identity
            )));
        }
        Ok(())
    }

    /// Merge threshold at a given depth: `1 - (1 - theta0) * gamma^depth`.
    pub fn threshold(&self, depth: u32) -> f64 {
        1.0 - (1.0 - self.theta0) * self.gamma.powi(depth as i32)
    }
}

/// A running-average prototype of the inputs assigned to it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Representation {
    mean: Vec<f64>,
    count: u64,
    /// Class label -> absorbed count. Empty for numeric targets, where the
    /// signal lives in `target_mean` instead.
    label_hist: BTreeMap<String, u64>,
    /// Running mean of numeric target values; `None` for categorical targets.
    target_mean: Option<f64>,
    depth: u32,
    child: Option<Box<Cell>>,
    #[serde(skip)]
    absorbed: Vec<usize>,
}

impl Representation {
    fn literal(x: &[f64], target: &SampleTarget<'_>, depth: u32, input_id: usize, audit: bool) -> Self {
        let mut label_hist = BTreeMap::new();
        let mut target_mean = None;
        match target {
            SampleTarget::Categorical(label) => {
                label_hist.insert((*label).to_string(), 1);
            }
            SampleTarget::Numeric(v) => target_mean = Some(*v),
        }
        Representation {
            mean: x.to_vec(),
            count: 1,
            label_hist,
            target_mean,
            depth,
            child: None,
            absorbed: if audit { vec![input_id] } else { Vec::new() },
        }
    }

    fn absorb(&mut self, x: &[f64], target: &SampleTarget<'_>, input_id: usize, audit: bool) {
        self.count += 1;
        let k = self.count as f64;
        for (m, &xi) in self.mean.iter_mut().zip(x) {
            *m += (xi - *m) / k;
        }
        match target {
            SampleTarget::Categorical(label) => {
                *self.label_hist.entry((*label).to_string()).or_insert(0) += 1;
            }
            SampleTarget::Numeric(v) => {
                let tm = self.target_mean.get_or_insert(0.0);
                *tm += (v - *tm) / k;
            }
        }
        if audit {
            self.absorbed.push(input_id);
        }
    }

    /// Snapshot of the current state, one level deeper, used when a childless
    /// representation first splits.
    fn demoted_copy(&self) -> Self {
        debug_assert!(self.child.is_none());
        let mut copy = self.clone();
        copy.depth += 1;
        copy
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn label_hist(&self) -> &BTreeMap<String, u64> {
        &self.label_hist
    }

    pub fn target_mean(&self) -> Option<f64> {
        self.target_mean
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn child(&self) -> Option<&Cell> {
        self.child.as_deref()
    }

    /// The single class this representation belongs to, if any.
    pub fn pure_class(&self) -> Option<&str> {
        if self.label_hist.len() == 1 {
            self.label_hist.keys().next().map(String::as_str)
        } else {
            None
        }
    }

    /// Input rows absorbed by this representation; populated only when the
    /// model was trained with [`UcConfig::audit`] set.
    pub fn absorbed_rows(&self) -> &[usize] {
        &self.absorbed
    }

    fn predict(&self, kind: TargetKind) -> Prediction {
        match kind {
            TargetKind::Categorical => {
                // BTreeMap iterates in key order, so a strict max keeps the
                // lexicographically smallest label on ties.
                let mut best: Option<(&String, u64)> = None;
                for (label, &n) in &self.label_hist {
                    if best.map_or(true, |(_, bn)| n > bn) {
                        best = Some((label, n));
                    }
                }
                Prediction::Label(best.map(|(l, _)| l.clone()).unwrap_or_default())
            }
            TargetKind::Numeric => Prediction::Value(self.target_mean.unwrap_or(0.0)),
        }
    }
}

/// An ordered list of sibling representations; siblings at the same depth
/// never share an input.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Cell {
    reps: Vec<Representation>,
}

impl Cell {
    pub fn reps(&self) -> &[Representation] {
        &self.reps
    }
}

/// Output of [`UcModel::classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Label(String),
    Value(f64),
}

/// A trained Unsupervised Cognition model.
///
/// Training is strictly sequential and order dependent; a trained model is
/// immutable for inference and safe to share across threads. Serializes to a
/// versioned JSON document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UcModel {
    schema_version: u32,
    config: UcConfig,
    target_kind: TargetKind,
    feature_count: usize,
    feature_names: Vec<String>,
    norm: NormParams,
    total_inputs: u64,
    seed_cell: Cell,
}

impl UcModel {
    /// An empty model over already-normalized inputs (identity scaling).
    pub fn new(feature_names: Vec<String>, target_kind: TargetKind, config: UcConfig) -> Result<Self> {
        config.validate()?;
        let feature_count = feature_names.len();
        Ok(UcModel {
            schema_version: crate::SCHEMA_VERSION,
            config,
            target_kind,
            feature_count,
            feature_names,
            norm: NormParams::identity(feature_count),
            total_inputs: 0,
            seed_cell: Cell::default(),
        })
    }

    /// Min-max normalizes the dataset, then inserts every row in dataset
    /// order. The normalization parameters are kept for inference.
    pub fn train(data: &Dataset, config: UcConfig) -> Result<Self> {
        if data.n_samples() == 0 {
            return Err(Error::EmptyDataset);
        }
        let (normalized, params) = data.normalize()?;
        let mut model = UcModel::new(data.feature_names().to_vec(), data.target_kind(), config)?;
        model.norm = params;
        for i in 0..normalized.n_samples() {
            model.insert(normalized.row(i), normalized.sample_target(i))?;
        }
        Ok(model)
    }

    /// Routes one normalized input into the tree.
    ///
    /// A duplicate of anything the tree already represents (similarity
    /// within `epsilon_identity` of 1, anywhere in the tree) is absorbed
    /// along its match's path without creating representations; the tree
    /// never grows on repeated data. Demotion snapshots keep every absorbed
    /// input represented at some leaf, so the duplicate check stays
    /// reliable as means drift.
    ///
    /// Everything else descends greedily from the seed cell to the most
    /// similar representation of each cell. A match at or above the depth
    /// threshold absorbs the input and recurses into its child cell, first
    /// demoting a childless match's prior state into a fresh child so
    /// literals survive at the leaves. Anything below the threshold starts
    /// a new sibling representation.
    pub fn insert(&mut self, x: &[f64], target: SampleTarget<'_>) -> Result<()> {
        if x.len() != self.feature_count {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.feature_count,
            });
        }
        if x.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
            return Err(Error::NotNormalized);
        }
        match (self.target_kind, &target) {
            (TargetKind::Numeric, SampleTarget::Numeric(_)) => {}
            (TargetKind::Categorical, SampleTarget::Categorical(_)) => {}
            _ => {
                return Err(Error::KindMismatch(
                    "sample target does not match the model's target kind".into(),
                ))
            }
        }
        let input_id = self.total_inputs as usize;
        let mut best = (f64::NEG_INFINITY, Vec::new());
        best_global(&self.seed_cell, x, self.config.metric, &mut Vec::new(), &mut best);
        if best.0 >= 1.0 - self.config.epsilon_identity {
            absorb_duplicate(&mut self.seed_cell, x, &target, &best.1, self.config, input_id);
        } else {
            insert_into_cell(&mut self.seed_cell, x, &target, 0, self.config, input_id);
        }
        self.total_inputs += 1;
        Ok(())
    }

    /// Greedy nearest-prototype classification.
    ///
    /// The raw row is normalized with the training parameters (clamped), then
    /// routed to the most similar representation of each cell until a leaf is
    /// reached. Categorical models answer the leaf's majority label (ties go
    /// to the lexicographically smallest); numeric models answer the leaf's
    /// running target mean.
    pub fn classify(&self, raw: &[f64]) -> Result<Prediction> {
        if self.seed_cell.reps.is_empty() {
            return Err(Error::ModelUntrained);
        }
        if raw.len() != self.feature_count {
            return Err(Error::LengthMismatch {
                left: raw.len(),
                right: self.feature_count,
            });
        }
        let x = self.norm.apply_row(raw)?;
        let mut cell = &self.seed_cell;
        loop {
            let (best, _) = best_match(&cell.reps, &x, self.config.metric);
            let rep = &cell.reps[best];
            match rep.child.as_deref() {
                Some(c) => cell = c,
                None => return Ok(rep.predict(self.target_kind)),
            }
        }
    }

    /// Fraction of test rows whose predicted label equals the target label.
    pub fn accuracy(&self, test: &Dataset) -> Result<f64> {
        if self.target_kind != TargetKind::Categorical
            || test.target_kind() != TargetKind::Categorical
        {
            return Err(Error::KindMismatch(
                "accuracy is defined for categorical targets".into(),
            ));
        }
        if test.n_samples() == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut hits = 0usize;
        for i in 0..test.n_samples() {
            let predicted = self.classify(test.row(i))?;
            if let (Prediction::Label(l), SampleTarget::Categorical(t)) =
                (&predicted, test.sample_target(i))
            {
                if l == t {
                    hits += 1;
                }
            }
        }
        Ok(hits as f64 / test.n_samples() as f64)
    }

    pub fn config(&self) -> &UcConfig {
        &self.config
    }

    pub fn target_kind(&self) -> TargetKind {
        self.target_kind
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn norm(&self) -> &NormParams {
        &self.norm
    }

    pub fn total_inputs(&self) -> u64 {
        self.total_inputs
    }

    pub fn seed_cell(&self) -> &Cell {
        &self.seed_cell
    }

    /// Visits every representation, parents before children.
    pub fn for_each_representation<'a>(&'a self, mut f: impl FnMut(&'a Representation)) {
        fn walk<'a>(cell: &'a Cell, f: &mut impl FnMut(&'a Representation)) {
            for rep in &cell.reps {
                f(rep);
                if let Some(child) = rep.child.as_deref() {
                    walk(child, f);
                }
            }
        }
        walk(&self.seed_cell, &mut f);
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

/// Similarity in `[0, 1]` between two equal-length vectors.
///
/// Cosine of two zero vectors is defined as 1 (they are indistinguishable);
/// of one zero vector as 0.
pub fn similarity(a: &[f64], b: &[f64], metric: Metric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(sim_unchecked(a, b, metric))
}

fn sim_unchecked(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Cosine => {
            let mut dot = 0.0;
            let mut na = 0.0;
            let mut nb = 0.0;
            for (&x, &y) in a.iter().zip(b) {
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
            if na == 0.0 && nb == 0.0 {
                1.0
            } else if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
            }
        }
        Metric::InverseEuclidean => {
            let dist2: f64 = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
            1.0 / (1.0 + dist2.sqrt())
        }
    }
}

/// Most similar representation; ties go to the lowest creation index.
fn best_match(reps: &[Representation], x: &[f64], metric: Metric) -> (usize, f64) {
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for (i, rep) in reps.iter().enumerate() {
        let s = sim_unchecked(x, &rep.mean, metric);
        if s > best_sim {
            best_sim = s;
            best = i;
        }
    }
    (best, best_sim)
}

/// Pre-order scan for the most similar representation anywhere in the tree;
/// `best` ends up holding the similarity and the rep-index path to it. Ties
/// keep the first match in creation order, parents before children.
fn best_global(
    cell: &Cell,
    x: &[f64],
    metric: Metric,
    path: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    for (i, rep) in cell.reps.iter().enumerate() {
        path.push(i);
        let s = sim_unchecked(x, &rep.mean, metric);
        if s > best.0 {
            *best = (s, path.clone());
        }
        if let Some(child) = rep.child.as_deref() {
            best_global(child, x, metric, path, best);
        }
        path.pop();
    }
}

/// Duplicate route: absorb into every representation along the matched
/// path, then keep absorbing greedily below the match. Never creates
/// representations or child cells.
fn absorb_duplicate(
    cell: &mut Cell,
    x: &[f64],
    target: &SampleTarget<'_>,
    path: &[usize],
    cfg: UcConfig,
    input_id: usize,
) {
    let rep = &mut cell.reps[path[0]];
    rep.absorb(x, target, input_id, cfg.audit);
    if path.len() > 1 {
        absorb_duplicate(
            rep.child.as_mut().expect("path descends through children"),
            x,
            target,
            &path[1..],
            cfg,
            input_id,
        );
    } else if let Some(child) = rep.child.as_deref_mut() {
        let (best, _) = best_match(&child.reps, x, cfg.metric);
        absorb_below(&mut child.reps[best], x, target, cfg, input_id);
    }
}

fn absorb_below(
    rep: &mut Representation,
    x: &[f64],
    target: &SampleTarget<'_>,
    cfg: UcConfig,
    input_id: usize,
) {
    rep.absorb(x, target, input_id, cfg.audit);
    if let Some(child) = rep.child.as_deref_mut() {
        let (best, _) = best_match(&child.reps, x, cfg.metric);
        absorb_below(&mut child.reps[best], x, target, cfg, input_id);
    }
}

fn insert_into_cell(
    cell: &mut Cell,
    x: &[f64],
    target: &SampleTarget<'_>,
    depth: u32,
    cfg: UcConfig,
    input_id: usize,
) {
    if cell.reps.is_empty() {
        cell.reps
            .push(Representation::literal(x, target, depth, input_id, cfg.audit));
        return;
    }
    let (best, sim) = best_match(&cell.reps, x, cfg.metric);
    if sim >= cfg.threshold(depth) {
        let can_descend = cfg.max_depth.map_or(true, |limit| depth < limit);
        let rep = &mut cell.reps[best];
        if !can_descend {
            rep.absorb(x, target, input_id, cfg.audit);
        } else if rep.child.is_none() {
            // First split of this representation: its prior state becomes a
            // literal child, the new input a sibling literal beside it.
            let demoted = rep.demoted_copy();
            rep.child = Some(Box::new(Cell { reps: vec![demoted] }));
            rep.absorb(x, target, input_id, cfg.audit);
            rep.child
                .as_mut()
                .expect("just created")
                .reps
                .push(Representation::literal(x, target, depth + 1, input_id, cfg.audit));
        } else {
            rep.absorb(x, target, input_id, cfg.audit);
            insert_into_cell(
                rep.child.as_mut().expect("checked above"),
                x,
                target,
                depth + 1,
                cfg,
                input_id,
            );
        }
    } else {
        cell.reps
            .push(Representation::literal(x, target, depth, input_id, cfg.audit));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, SynthSpec, Target};
    use approx::assert_abs_diff_eq;

    fn cat(label: &str) -> SampleTarget<'_> {
        SampleTarget::Categorical(label)
    }

    fn model2() -> UcModel {
        UcModel::new(
            vec!["a".into(), "b".into()],
            TargetKind::Categorical,
            UcConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(similarity(&[1.0, 0.0], &[0.0, 1.0], Metric::Cosine).unwrap(), 0.0);
        assert_abs_diff_eq!(
            similarity(&[1.0, 2.0], &[2.0, 4.0], Metric::Cosine).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            similarity(&[1.0, 0.0], &[1.0, 1.0], Metric::Cosine).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cosine_zero_vector_convention() {
        assert_eq!(similarity(&[0.0, 0.0], &[0.0, 0.0], Metric::Cosine).unwrap(), 1.0);
        assert_eq!(similarity(&[0.0, 0.0], &[1.0, 0.0], Metric::Cosine).unwrap(), 0.0);
    }

    #[test]
    fn inverse_euclidean_is_one_only_on_equality() {
        assert_eq!(
            similarity(&[0.5, 0.5], &[0.5, 0.5], Metric::InverseEuclidean).unwrap(),
            1.0
        );
        assert!(similarity(&[0.5, 0.5], &[0.5, 0.6], Metric::InverseEuclidean).unwrap() < 1.0);
    }

    #[test]
    fn similarity_rejects_length_mismatch() {
        assert!(matches!(
            similarity(&[1.0], &[1.0, 2.0], Metric::Cosine).unwrap_err(),
            Error::LengthMismatch { left: 1, right: 2 }
        ));
    }

    #[test]
    fn orthogonal_inputs_become_siblings() {
        let mut m = model2();
        m.insert(&[1.0, 0.0], cat("a")).unwrap();
        m.insert(&[0.0, 1.0], cat("b")).unwrap();
        assert_eq!(m.seed_cell().reps().len(), 2);
        assert_eq!(m.total_inputs(), 2);
    }

    #[test]
    fn duplicate_is_absorbed_without_children() {
        let mut m = model2();
        m.insert(&[1.0, 0.0], cat("a")).unwrap();
        m.insert(&[1.0, 0.0], cat("a")).unwrap();
        let reps = m.seed_cell().reps();
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].count(), 2);
        assert!(reps[0].child().is_none());
    }

    #[test]
    fn merge_demotes_literal_and_files_sibling() {
        // cosine([1,0], [0.95,0.05]) = 0.99862 >= theta0, below the
        // duplicate guard: the match splits into two literal children.
        let mut m = model2();
        m.insert(&[1.0, 0.0], cat("a")).unwrap();
        m.insert(&[0.95, 0.05], cat("b")).unwrap();
        let reps = m.seed_cell().reps();
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].count(), 2);
        assert_abs_diff_eq!(reps[0].mean()[0], 0.975, epsilon = 1e-12);
        assert_abs_diff_eq!(reps[0].mean()[1], 0.025, epsilon = 1e-12);
        let child = reps[0].child().expect("child cell");
        assert_eq!(child.reps().len(), 2);
        assert_eq!(child.reps()[0].mean(), &[1.0, 0.0]);
        assert_eq!(child.reps()[1].mean(), &[0.95, 0.05]);
        assert!(child.reps().iter().all(|r| r.count() == 1));
    }

    #[test]
    fn max_depth_stops_descent() {
        let mut m = UcModel::new(
            vec!["a".into(), "b".into()],
            TargetKind::Categorical,
            UcConfig {
                max_depth: Some(0),
                ..UcConfig::default()
            },
        )
        .unwrap();
        m.insert(&[1.0, 0.0], cat("a")).unwrap();
        m.insert(&[0.95, 0.05], cat("b")).unwrap();
        let reps = m.seed_cell().reps();
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].count(), 2);
        assert!(reps[0].child().is_none());
    }

    #[test]
    fn insert_rejects_unnormalized_input() {
        let mut m = model2();
        assert!(matches!(
            m.insert(&[1.5, 0.0], cat("a")).unwrap_err(),
            Error::NotNormalized
        ));
    }

    #[test]
    fn train_orthogonal_rows() {
        let d = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            "y",
            Target::Categorical(vec!["A".into(), "B".into()]),
        )
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        assert_eq!(m.seed_cell().reps().len(), 2);
        assert_eq!(m.total_inputs(), 2);
    }

    #[test]
    fn train_identical_rows_yields_one_literal() {
        let d = Dataset::from_rows(
            vec!["a".into()],
            vec![vec![2.0]; 5],
            "y",
            Target::Categorical(vec!["A".into(); 5]),
        )
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        assert_eq!(m.seed_cell().reps().len(), 1);
        assert_eq!(m.seed_cell().reps()[0].count(), 5);
        assert!(m.seed_cell().reps()[0].child().is_none());
    }

    #[test]
    fn train_rejects_empty_dataset() {
        let d = Dataset::from_rows(
            vec!["a".into()],
            vec![],
            "y",
            Target::Categorical(vec![]),
        )
        .unwrap();
        assert!(matches!(
            UcModel::train(&d, UcConfig::default()).unwrap_err(),
            Error::EmptyDataset
        ));
    }

    /// Partition property: at every cell, representation counts sum to the
    /// inputs routed there.
    pub(crate) fn partition_holds(m: &UcModel) -> bool {
        fn check(cell: &Cell, expected: Option<u64>) -> bool {
            let total: u64 = cell.reps().iter().map(Representation::count).sum();
            if let Some(e) = expected {
                if total != e {
                    return false;
                }
            }
            cell.reps().iter().all(|r| match r.child() {
                Some(c) => check(c, Some(r.count())),
                None => true,
            })
        }
        check(m.seed_cell(), Some(m.total_inputs()))
    }

    #[test]
    fn partition_invariant_after_random_training() {
        let (d, _) = synthesize(&SynthSpec {
            samples: 50,
            informative: 3,
            noise: 5,
            classes: 2,
            separation: 2.0,
            seed: 13,
        })
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        assert!(partition_holds(&m));
        assert_eq!(m.total_inputs(), 50);
    }

    #[test]
    fn classify_routes_to_nearest_prototype() {
        let d = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            "y",
            Target::Categorical(vec!["A".into(), "B".into()]),
        )
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        assert_eq!(m.classify(&[0.9, 0.1]).unwrap(), Prediction::Label("A".into()));
        assert_eq!(m.classify(&[1.0, 0.0]).unwrap(), Prediction::Label("A".into()));
        assert_eq!(m.classify(&[0.1, 0.9]).unwrap(), Prediction::Label("B".into()));
    }

    #[test]
    fn classify_untrained_model_fails() {
        let m = model2();
        assert!(matches!(
            m.classify(&[0.5, 0.5]).unwrap_err(),
            Error::ModelUntrained
        ));
    }

    #[test]
    fn accuracy_on_separated_training_data() {
        let d = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            "y",
            Target::Categorical(vec!["A".into(), "B".into()]),
        )
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        assert_eq!(m.accuracy(&d).unwrap(), 1.0);

        let flipped = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            "y",
            Target::Categorical(vec!["B".into(), "A".into()]),
        )
        .unwrap();
        assert_eq!(m.accuracy(&flipped).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_rejects_numeric_targets() {
        let d = Dataset::from_rows(
            vec!["a".into()],
            vec![vec![0.0], vec![1.0]],
            "y",
            Target::Numeric(vec![0.0, 1.0]),
        )
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        assert!(matches!(m.accuracy(&d).unwrap_err(), Error::KindMismatch(_)));
    }

    #[test]
    fn accuracy_on_separated_synthetic_clusters() {
        let (d, _) = synthesize(&SynthSpec {
            samples: 100,
            informative: 4,
            noise: 4,
            classes: 2,
            separation: 4.0,
            seed: 7,
        })
        .unwrap();
        let (train, test) = d.split(0.5, 1).unwrap();
        let m = UcModel::train(&train, UcConfig::default()).unwrap();
        let acc = m.accuracy(&test).unwrap();
        assert!(acc >= 0.95, "accuracy {acc} below 0.95");
    }

    #[test]
    fn numeric_targets_track_running_mean() {
        let d = Dataset::from_rows(
            vec!["a".into()],
            vec![vec![1.0], vec![1.0], vec![1.0]],
            "y",
            Target::Numeric(vec![1.0, 2.0, 6.0]),
        )
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        match m.classify(&[1.0]).unwrap() {
            Prediction::Value(v) => assert_abs_diff_eq!(v, 3.0, epsilon = 1e-12),
            other => panic!("expected numeric prediction, got {other:?}"),
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (d, _) = synthesize(&SynthSpec {
            samples: 40,
            informative: 2,
            noise: 6,
            classes: 3,
            separation: 2.0,
            seed: 5,
        })
        .unwrap();
        let a = UcModel::train(&d, UcConfig::default()).unwrap();
        let b = UcModel::train(&d, UcConfig::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn model_json_round_trip() {
        let (d, _) = synthesize(&SynthSpec {
            samples: 30,
            informative: 2,
            noise: 3,
            classes: 2,
            separation: 3.0,
            seed: 9,
        })
        .unwrap();
        let m = UcModel::train(&d, UcConfig::default()).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: UcModel = serde_json::from_str(&json).unwrap();
        assert_eq!(json, serde_json::to_string(&back).unwrap());
        assert_eq!(m.accuracy(&d).unwrap(), back.accuracy(&d).unwrap());
    }
}
