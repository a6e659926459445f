//! Turning correlation reports into feature sets.
//!
//! Single-model reduction keeps the features whose correlation with the
//! target is both significant and strong. Because training is order
//! sensitive, a single model's selection is itself order sensitive; the
//! ensemble variant trains many models on different input orders, scores
//! each feature by the fraction of models that kept it (its *confidence*),
//! and keeps the features above a confidence threshold.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureSet, TargetKind};
use crate::error::{Error, Result};
use crate::model::{UcConfig, UcModel};
use crate::patterns;
use crate::stats::{correlate_patterns, FeatureCorrelationReport};

/// Hard floor for the correlation threshold: weaker correlations never
/// support a meaningful reduction.
pub const CORRELATION_FLOOR: f64 = 0.5;

/// Correlation-magnitude and significance cutoffs for keeping a feature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionThresholds {
    r_min: f64,
    p_max: f64,
}

impl Default for SelectionThresholds {
    fn default() -> Self {
        SelectionThresholds {
            r_min: 0.6,
            p_max: 0.01,
        }
    }
}

impl SelectionThresholds {
    /// `r_min` must exceed [`CORRELATION_FLOOR`]; `p_max` must lie in `(0, 1)`.
    pub fn new(r_min: f64, p_max: f64) -> Result<Self> {
        if !(r_min > CORRELATION_FLOOR && r_min <= 1.0) {
            return Err(Error::InvalidThreshold(format!(
                "correlation threshold must be in ({CORRELATION_FLOOR}, 1], got {r_min}"
            )));
        }
        if !(p_max > 0.0 && p_max < 1.0) {
            return Err(Error::InvalidThreshold(format!(
                "p-value threshold must be in (0, 1), got {p_max}"
            )));
        }
        Ok(SelectionThresholds { r_min, p_max })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }
}

/// Per-feature fraction of ensemble members that selected it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceMap {
    confidences: Vec<f64>,
    ensemble_size: usize,
}

impl ConfidenceMap {
    pub fn confidence(&self, feature: usize) -> f64 {
        self.confidences[feature]
    }

    pub fn confidences(&self) -> &[f64] {
        &self.confidences
    }

    pub fn feature_count(&self) -> usize {
        self.confidences.len()
    }

    pub fn ensemble_size(&self) -> usize {
        self.ensemble_size
    }

    /// Features whose confidence reaches `min` (may be empty).
    pub fn at_least(&self, min: f64) -> FeatureSet {
        FeatureSet::from_indices(
            self.confidences
                .iter()
                .enumerate()
                .filter(|(_, &c)| c >= min)
                .map(|(j, _)| j),
        )
    }

    /// CSV rows: feature, confidence, selected.
    pub fn write_csv<W: Write>(
        &self,
        feature_names: &[String],
        selected: &FeatureSet,
        w: W,
    ) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(["feature", "confidence", "selected"])?;
        for (j, c) in self.confidences.iter().enumerate() {
            let name = feature_names.get(j).map(String::as_str).unwrap_or("");
            writer.write_record([
                name.to_string(),
                c.to_string(),
                selected.contains(j).to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Keeps every feature with at least one strong, significant, non-degenerate
/// correlation entry (any class qualifies for categorical targets).
///
/// Errs with [`Error::NoRelevantFeatures`] when nothing qualifies: the data
/// then offers no meaningful reduction for this target.
pub fn select_features_single(
    report: &FeatureCorrelationReport,
    thresholds: &SelectionThresholds,
) -> Result<FeatureSet> {
    let keep = report.features.iter().enumerate().filter_map(|(j, entry)| {
        let qualifies = entry
            .results()
            .iter()
            .any(|c| !c.degenerate && c.p <= thresholds.p_max && c.r.abs() >= thresholds.r_min);
        qualifies.then_some(j)
    });
    let set = FeatureSet::from_indices(keep);
    if set.is_empty() {
        return Err(Error::NoRelevantFeatures);
    }
    Ok(set)
}

/// Mines a trained model (class-constrained for categorical targets, seed
/// cell for numeric ones), correlates, and filters.
pub fn select_features_for_model(
    model: &UcModel,
    thresholds: &SelectionThresholds,
) -> Result<FeatureSet> {
    let mined = match model.target_kind() {
        TargetKind::Categorical => patterns::mine_class_constrained(model)?,
        TargetKind::Numeric => patterns::mine_unconstrained(model)?,
    };
    let report = correlate_patterns(&mined, model.target_kind())?;
    select_features_single(&report, thresholds)
}

/// Confidence of each feature: the fraction of member sets containing it.
pub fn ensemble_confidence(sets: &[FeatureSet], feature_count: usize) -> Result<ConfidenceMap> {
    if sets.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut counts = vec![0usize; feature_count];
    for set in sets {
        for &j in set.indices() {
            if j >= feature_count {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    count: feature_count,
                });
            }
            counts[j] += 1;
        }
    }
    Ok(ConfidenceMap {
        confidences: counts.iter().map(|&c| c as f64 / sets.len() as f64).collect(),
        ensemble_size: sets.len(),
    })
}

/// Ensemble feature selection over `ensemble_size` input orders.
///
/// Member `i` trains on `train` shuffled with seed `base_seed + i`, reduces
/// it with [`select_features_for_model`], and contributes its feature list
/// (an empty one when no feature qualifies — failed members still count in
/// the confidence denominator). The final set keeps features with confidence
/// at or above `confidence_min`.
///
/// `confidence_min` below 0.5 is rejected: a feature missing from most
/// orders is not credibly relevant.
pub fn select_features_ensemble(
    train: &Dataset,
    config: UcConfig,
    thresholds: &SelectionThresholds,
    ensemble_size: usize,
    confidence_min: f64,
    base_seed: u64,
) -> Result<(FeatureSet, ConfidenceMap)> {
    validate_confidence_min(confidence_min)?;
    if ensemble_size == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mut sets = Vec::with_capacity(ensemble_size);
    for i in 0..ensemble_size {
        let shuffled = train.shuffle(base_seed + i as u64);
        let model = UcModel::train(&shuffled, config)?;
        let set = match select_features_for_model(&model, thresholds) {
            Ok(set) => set,
            Err(Error::NoRelevantFeatures) => FeatureSet::default(),
            Err(e) => return Err(e),
        };
        sets.push(set);
    }
    let confidence = ensemble_confidence(&sets, train.feature_count())?;
    let selected = confidence.at_least(confidence_min);
    if selected.is_empty() {
        return Err(Error::NoRelevantFeatures);
    }
    Ok((selected, confidence))
}

pub(crate) fn validate_confidence_min(confidence_min: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&confidence_min) {
        return Err(Error::InvalidThreshold(format!(
            "confidence threshold must be in [0.5, 1], got {confidence_min}"
        )));
    }
    if confidence_min < 1.0 {
        log::warn!(
            "confidence threshold {confidence_min} keeps features that some input orders rejected"
        );
    }
    Ok(())
}
