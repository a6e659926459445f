//! The knowledge-discovery pipeline and the experiment harnesses built on it.
//!
//! The full pipeline runs seven steps over a train/test pair:
//!
//! 1. train an ensemble of models, each on a differently shuffled train set,
//!    recording every member's train and test accuracy;
//! 2. mine each member's patterns and correlate them with the target;
//! 3. filter each member's correlations into a per-member feature list;
//! 4. filter features by ensemble confidence into the final set;
//! 5. drop all other features from the train and test sets;
//! 6. retrain on the reduced data `eval_repeats` times with fresh shuffle
//!    seeds, recording accuracies;
//! 7. train one final model on the reduced train set in its original order
//!    and extract its patterns for exploration.
//!
//! Every knob and every seed lands in the report, so any number in it can be
//! reproduced from the report alone. Reports serialize deterministically:
//! identical inputs and configuration give byte-identical JSON.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::baselines::{pca, som, SomEncoding};
use crate::dataset::{Dataset, FeatureSet, TargetKind};
use crate::error::{Error, Result};
use crate::model::{UcConfig, UcModel};
use crate::patterns::{self, Pattern};
use crate::selection::{
    ensemble_confidence, select_features_for_model, validate_confidence_min, ConfidenceMap,
    SelectionThresholds,
};

/// Full configuration of a pipeline run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub uc: UcConfig,
    pub thresholds: SelectionThresholds,
    /// Models trained in the selection ensemble.
    pub ensemble_size: usize,
    /// Confidence a feature needs across the ensemble to survive.
    pub confidence_min: f64,
    pub base_seed: u64,
    /// Retrainings used to average accuracies.
    pub eval_repeats: usize,
    /// Train fraction used when a caller starts from a single dataset.
    pub split_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            uc: UcConfig::default(),
            thresholds: SelectionThresholds::default(),
            ensemble_size: 100,
            confidence_min: 1.0,
            base_seed: 0,
            eval_repeats: 100,
            split_fraction: 0.8,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.uc.validate()?;
        validate_confidence_min(self.confidence_min)?;
        if self.ensemble_size == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if self.eval_repeats == 0 {
            return Err(Error::InvalidConfig("eval_repeats must be positive".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "split fraction must be in (0, 1), got {}",
                self.split_fraction
            )));
        }
        Ok(())
    }
}

/// Mean and population standard deviation of recorded accuracies, kept with
/// the raw values so the summary can be recomputed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub mean: f64,
    pub std_dev: f64,
    pub values: Vec<f64>,
}

impl AccuracySummary {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        AccuracySummary {
            mean,
            std_dev: var.sqrt(),
            values,
        }
    }
}

/// Whether the pipeline ran to completion or stopped at the confidence
/// filter with nothing selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineStatus {
    Completed,
    NoRelevantFeatures,
}

/// Everything a pipeline run produces.
///
/// A run aborted at step 4 still carries steps 1-3 (ensemble accuracies,
/// member feature lists, confidences); the `final_*` fields are then `None`
/// and `status` says why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub status: PipelineStatus,
    pub config: PipelineConfig,
    pub feature_names: Vec<String>,
    pub initial_dims: usize,
    pub final_dims: Option<usize>,
    /// `1 - final_dims / initial_dims`.
    pub reduction_fraction: Option<f64>,
    pub ensemble_seeds: Vec<u64>,
    pub member_feature_sets: Vec<FeatureSet>,
    pub confidence: ConfidenceMap,
    pub selected: Option<FeatureSet>,
    pub selected_names: Option<Vec<String>>,
    /// Accuracies of the ensemble members on the full data.
    pub initial_train_accuracy: AccuracySummary,
    pub initial_test_accuracy: AccuracySummary,
    pub eval_seeds: Vec<u64>,
    /// Accuracies of the retrainings on the reduced data.
    pub final_train_accuracy: Option<AccuracySummary>,
    pub final_test_accuracy: Option<AccuracySummary>,
    pub train_accuracy_gain: Option<f64>,
    pub test_accuracy_gain: Option<f64>,
    pub final_patterns: Option<Vec<Pattern>>,
}

fn check_pair(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.feature_names() != test.feature_names() {
        return Err(Error::DatasetMismatch(
            "train and test feature names differ".into(),
        ));
    }
    if train.target_kind() != test.target_kind() {
        return Err(Error::DatasetMismatch(
            "train and test target kinds differ".into(),
        ));
    }
    Ok(())
}

/// Runs the seven-step pipeline over a train/test pair.
///
/// Accuracy is the evaluation metric, so the target must be categorical.
/// When nothing reaches the confidence threshold the run still returns a
/// report with steps 1-3 populated and
/// [`PipelineStatus::NoRelevantFeatures`].
pub fn run_pipeline(train: &Dataset, test: &Dataset, cfg: &PipelineConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    check_pair(train, test)?;
    if train.target_kind() != TargetKind::Categorical {
        return Err(Error::KindMismatch(
            "the pipeline scores models by accuracy and needs a categorical target".into(),
        ));
    }

    // steps 1-3: ensemble of input orders, one feature list per member
    let ensemble_seeds: Vec<u64> = (0..cfg.ensemble_size)
        .map(|i| cfg.base_seed + i as u64)
        .collect();
    let mut member_feature_sets = Vec::with_capacity(cfg.ensemble_size);
    let mut initial_train = Vec::with_capacity(cfg.ensemble_size);
    let mut initial_test = Vec::with_capacity(cfg.ensemble_size);
    for &seed in &ensemble_seeds {
        let model = UcModel::train(&train.shuffle(seed), cfg.uc)?;
        initial_train.push(model.accuracy(train)?);
        initial_test.push(model.accuracy(test)?);
        let set = match select_features_for_model(&model, &cfg.thresholds) {
            Ok(set) => set,
            Err(Error::NoRelevantFeatures) => FeatureSet::default(),
            Err(e) => return Err(e),
        };
        member_feature_sets.push(set);
    }
    let confidence = ensemble_confidence(&member_feature_sets, train.feature_count())?;

    // step 4: confidence filter
    let selected = confidence.at_least(cfg.confidence_min);
    let mut report = PipelineReport {
        schema_version: crate::SCHEMA_VERSION,
        status: PipelineStatus::NoRelevantFeatures,
        config: *cfg,
        feature_names: train.feature_names().to_vec(),
        initial_dims: train.feature_count(),
        final_dims: None,
        reduction_fraction: None,
        ensemble_seeds,
        member_feature_sets,
        confidence,
        selected: None,
        selected_names: None,
        initial_train_accuracy: AccuracySummary::from_values(initial_train),
        initial_test_accuracy: AccuracySummary::from_values(initial_test),
        eval_seeds: Vec::new(),
        final_train_accuracy: None,
        final_test_accuracy: None,
        train_accuracy_gain: None,
        test_accuracy_gain: None,
        final_patterns: None,
    };
    if selected.is_empty() {
        return Ok(report);
    }

    // step 5: reduce both datasets
    let reduced_train = train.reduce(&selected)?;
    let reduced_test = test.reduce(&selected)?;

    // step 6: averaged retrainings on the reduced data
    let eval_seeds: Vec<u64> = (0..cfg.eval_repeats)
        .map(|i| cfg.base_seed + (cfg.ensemble_size + i) as u64)
        .collect();
    let mut final_train = Vec::with_capacity(cfg.eval_repeats);
    let mut final_test = Vec::with_capacity(cfg.eval_repeats);
    for &seed in &eval_seeds {
        let model = UcModel::train(&reduced_train.shuffle(seed), cfg.uc)?;
        final_train.push(model.accuracy(&reduced_train)?);
        final_test.push(model.accuracy(&reduced_test)?);
    }

    // step 7: the final model keeps the original (unshuffled) train order
    let final_model = UcModel::train(&reduced_train, cfg.uc)?;
    let final_patterns = patterns::mine_class_constrained(&final_model)?;

    let final_train = AccuracySummary::from_values(final_train);
    let final_test = AccuracySummary::from_values(final_test);
    report.status = PipelineStatus::Completed;
    report.final_dims = Some(selected.len());
    report.reduction_fraction =
        Some(1.0 - selected.len() as f64 / train.feature_count() as f64);
    report.selected_names = Some(
        selected
            .indices()
            .iter()
            .map(|&j| train.feature_names()[j].clone())
            .collect(),
    );
    report.selected = Some(selected);
    report.eval_seeds = eval_seeds;
    report.train_accuracy_gain = Some(final_train.mean - report.initial_train_accuracy.mean);
    report.test_accuracy_gain = Some(final_test.mean - report.initial_test_accuracy.mean);
    report.final_train_accuracy = Some(final_train);
    report.final_test_accuracy = Some(final_test);
    report.final_patterns = Some(final_patterns);
    Ok(report)
}

/// One repetition of the pattern-validity loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternValidityIteration {
    pub seed: u64,
    pub initial_train: f64,
    pub initial_test: f64,
    /// `None` when this order's model found no relevant feature.
    pub selected: Option<FeatureSet>,
    pub final_dims: Option<usize>,
    pub final_train: Option<f64>,
    pub final_test: Option<f64>,
}

/// Averages over the pattern-validity repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternValidityReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub initial_train_accuracy: AccuracySummary,
    pub initial_test_accuracy: AccuracySummary,
    /// Over the iterations whose selection succeeded.
    pub final_train_accuracy: AccuracySummary,
    pub final_test_accuracy: AccuracySummary,
    pub train_accuracy_gain: f64,
    pub test_accuracy_gain: f64,
    pub mean_reduction_fraction: f64,
    pub failed_selections: usize,
    pub iterations: Vec<PatternValidityIteration>,
}

/// Pattern-validity experiment: `eval_repeats` repetitions, each training
/// one model on its own input order, reducing with that single model's
/// patterns, and retraining on the reduced data in the same order.
///
/// Repetitions whose selection finds nothing are recorded and skipped in the
/// final averages; if every repetition fails the experiment errs with
/// [`Error::NoRelevantFeatures`].
pub fn experiment_pattern_validity(
    train: &Dataset,
    test: &Dataset,
    cfg: &PipelineConfig,
) -> Result<PatternValidityReport> {
    cfg.validate()?;
    check_pair(train, test)?;
    if train.target_kind() != TargetKind::Categorical {
        return Err(Error::KindMismatch(
            "the experiment scores models by accuracy and needs a categorical target".into(),
        ));
    }
    let mut iterations = Vec::with_capacity(cfg.eval_repeats);
    for i in 0..cfg.eval_repeats {
        let seed = cfg.base_seed + i as u64;
        let shuffled = train.shuffle(seed);
        let model = UcModel::train(&shuffled, cfg.uc)?;
        let initial_train = model.accuracy(train)?;
        let initial_test = model.accuracy(test)?;
        let mut iteration = PatternValidityIteration {
            seed,
            initial_train,
            initial_test,
            selected: None,
            final_dims: None,
            final_train: None,
            final_test: None,
        };
        match select_features_for_model(&model, &cfg.thresholds) {
            Ok(set) => {
                let reduced_train = train.reduce(&set)?;
                let reduced_test = test.reduce(&set)?;
                // same input order as the initial model, on fewer columns
                let retrained = UcModel::train(&reduced_train.shuffle(seed), cfg.uc)?;
                iteration.final_train = Some(retrained.accuracy(&reduced_train)?);
                iteration.final_test = Some(retrained.accuracy(&reduced_test)?);
                iteration.final_dims = Some(set.len());
                iteration.selected = Some(set);
            }
            Err(Error::NoRelevantFeatures) => {}
            Err(e) => return Err(e),
        }
        iterations.push(iteration);
    }

    let succeeded: Vec<&PatternValidityIteration> =
        iterations.iter().filter(|it| it.selected.is_some()).collect();
    if succeeded.is_empty() {
        return Err(Error::NoRelevantFeatures);
    }
    let initial_train_accuracy =
        AccuracySummary::from_values(iterations.iter().map(|it| it.initial_train).collect());
    let initial_test_accuracy =
        AccuracySummary::from_values(iterations.iter().map(|it| it.initial_test).collect());
    let final_train_accuracy = AccuracySummary::from_values(
        succeeded.iter().map(|it| it.final_train.expect("succeeded")).collect(),
    );
    let final_test_accuracy = AccuracySummary::from_values(
        succeeded.iter().map(|it| it.final_test.expect("succeeded")).collect(),
    );
    let mean_reduction_fraction = succeeded
        .iter()
        .map(|it| 1.0 - it.final_dims.expect("succeeded") as f64 / train.feature_count() as f64)
        .sum::<f64>()
        / succeeded.len() as f64;
    Ok(PatternValidityReport {
        schema_version: crate::SCHEMA_VERSION,
        config: *cfg,
        train_accuracy_gain: final_train_accuracy.mean - initial_train_accuracy.mean,
        test_accuracy_gain: final_test_accuracy.mean - initial_test_accuracy.mean,
        mean_reduction_fraction,
        failed_selections: iterations.len() - succeeded.len(),
        initial_train_accuracy,
        initial_test_accuracy,
        final_train_accuracy,
        final_test_accuracy,
        iterations,
    })
}

/// A dimensionality-reduction method entered in the comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BaselineSpec {
    /// Pattern-based reduction (the pattern-validity experiment's protocol).
    Proposal,
    Pca {
        dims: usize,
    },
    Som {
        grid_side: usize,
        epochs: usize,
        encoding: SomEncoding,
    },
}

impl BaselineSpec {
    pub fn label(&self) -> String {
        match self {
            BaselineSpec::Proposal => "proposal".to_string(),
            BaselineSpec::Pca { dims } => format!("pca:{dims}"),
            BaselineSpec::Som {
                grid_side,
                encoding,
                ..
            } => match encoding {
                SomEncoding::BmuCoords => "som:2".to_string(),
                SomEncoding::UnitDistances => format!("som:{}", grid_side * grid_side),
            },
        }
    }
}

/// One comparison row, in table column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub method: String,
    pub initial_train: f64,
    pub initial_test: f64,
    pub final_train: f64,
    pub final_test: f64,
    pub train_gain: f64,
    pub test_gain: f64,
    pub reduction: f64,
}

/// The comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub rows: Vec<BaselineRow>,
}

impl BaselineComparison {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record([
            "method",
            "initial_train",
            "initial_test",
            "final_train",
            "final_test",
            "train_gain",
            "test_gain",
            "reduction",
        ])?;
        for row in &self.rows {
            writer.write_record([
                row.method.clone(),
                row.initial_train.to_string(),
                row.initial_test.to_string(),
                row.final_train.to_string(),
                row.final_test.to_string(),
                row.train_gain.to_string(),
                row.test_gain.to_string(),
                row.reduction.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Compares dimensionality-reduction methods by the accuracy a model reaches
/// on their reduced data.
///
/// Every method is scored by `eval_repeats` trainings on different input
/// orders of its reduced train set. The initial (full data) accuracies are
/// shared across rows. PCA and SOM fit on the min-max normalized train set
/// and map the test set with the training parameters.
pub fn experiment_baseline_comparison(
    train: &Dataset,
    test: &Dataset,
    cfg: &PipelineConfig,
    specs: &[BaselineSpec],
) -> Result<BaselineComparison> {
    cfg.validate()?;
    check_pair(train, test)?;
    if specs.is_empty() {
        return Err(Error::InvalidConfig("no baseline methods listed".into()));
    }

    let proposal = if specs.contains(&BaselineSpec::Proposal) {
        Some(experiment_pattern_validity(train, test, cfg)?)
    } else {
        None
    };
    // Initial accuracies use the same seeds as the proposal run, so reuse
    // its numbers when available instead of training the models twice.
    let (initial_train, initial_test) = match &proposal {
        Some(r) => (
            r.initial_train_accuracy.clone(),
            r.initial_test_accuracy.clone(),
        ),
        None => {
            let mut tr = Vec::with_capacity(cfg.eval_repeats);
            let mut te = Vec::with_capacity(cfg.eval_repeats);
            for i in 0..cfg.eval_repeats {
                let model = UcModel::train(&train.shuffle(cfg.base_seed + i as u64), cfg.uc)?;
                tr.push(model.accuracy(train)?);
                te.push(model.accuracy(test)?);
            }
            (
                AccuracySummary::from_values(tr),
                AccuracySummary::from_values(te),
            )
        }
    };

    let (train_norm, norm) = train.normalize()?;
    let test_norm = norm.apply(test)?;

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let row = match spec {
            BaselineSpec::Proposal => {
                let r = proposal.as_ref().expect("requested above");
                BaselineRow {
                    method: spec.label(),
                    initial_train: initial_train.mean,
                    initial_test: initial_test.mean,
                    final_train: r.final_train_accuracy.mean,
                    final_test: r.final_test_accuracy.mean,
                    train_gain: r.train_accuracy_gain,
                    test_gain: r.test_accuracy_gain,
                    reduction: r.mean_reduction_fraction,
                }
            }
            BaselineSpec::Pca { dims } => {
                let model = pca::fit(&train_norm, *dims)?;
                let reduced_train = pca::transform(&model, &train_norm)?;
                let reduced_test = pca::transform(&model, &test_norm)?;
                score_reduced(
                    spec.label(),
                    &reduced_train,
                    &reduced_test,
                    cfg,
                    &initial_train,
                    &initial_test,
                    train.feature_count(),
                )?
            }
            BaselineSpec::Som {
                grid_side,
                epochs,
                encoding,
            } => {
                let model = som::fit(&train_norm, *grid_side, *epochs, cfg.base_seed, *encoding)?;
                let reduced_train = som::transform(&model, &train_norm)?;
                let reduced_test = som::transform(&model, &test_norm)?;
                score_reduced(
                    spec.label(),
                    &reduced_train,
                    &reduced_test,
                    cfg,
                    &initial_train,
                    &initial_test,
                    train.feature_count(),
                )?
            }
        };
        rows.push(row);
    }
    Ok(BaselineComparison {
        schema_version: crate::SCHEMA_VERSION,
        config: *cfg,
        rows,
    })
}

fn score_reduced(
    method: String,
    reduced_train: &Dataset,
    reduced_test: &Dataset,
    cfg: &PipelineConfig,
    initial_train: &AccuracySummary,
    initial_test: &AccuracySummary,
    initial_dims: usize,
) -> Result<BaselineRow> {
    let mut tr = Vec::with_capacity(cfg.eval_repeats);
    let mut te = Vec::with_capacity(cfg.eval_repeats);
    for i in 0..cfg.eval_repeats {
        let model = UcModel::train(&reduced_train.shuffle(cfg.base_seed + i as u64), cfg.uc)?;
        tr.push(model.accuracy(reduced_train)?);
        te.push(model.accuracy(reduced_test)?);
    }
    let final_train = AccuracySummary::from_values(tr);
    let final_test = AccuracySummary::from_values(te);
    Ok(BaselineRow {
        method,
        initial_train: initial_train.mean,
        initial_test: initial_test.mean,
        train_gain: final_train.mean - initial_train.mean,
        test_gain: final_test.mean - initial_test.mean,
        final_train: final_train.mean,
        final_test: final_test.mean,
        reduction: 1.0 - reduced_train.feature_count() as f64 / initial_dims as f64,
    })
}
