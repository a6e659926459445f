//! Pattern extraction from a trained model.
//!
//! A pattern is a read-only snapshot of a representation picked as a data
//! pattern. Two regimes exist:
//!
//! * unconstrained — the seed cell's representations, the most generic
//!   clusters of the input domain;
//! * class-constrained — the shallowest representations that belong to a
//!   single class. Their parents mix classes (unless they sit in the seed
//!   cell) and their descendants share their class, so together they cover
//!   every training input exactly once with maximal generality.
//!
//! Mining never mutates the model, so patterns can be re-extracted after
//! further inserts without retraining.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::TargetKind;
use crate::error::{Error, Result};
use crate::model::{Representation, UcModel};

/// Immutable snapshot of a representation selected as a pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    /// Representation mean in normalized `[0, 1]` space.
    pub vector: Vec<f64>,
    /// The same mean mapped back to original units.
    pub denorm_vector: Vec<f64>,
    /// Inputs the representation absorbed.
    pub count: u64,
    pub depth: u32,
    pub label_hist: BTreeMap<String, u64>,
    /// Present iff the histogram holds exactly one class.
    pub pure_class: Option<String>,
    /// Running target mean (numeric-target models only).
    pub target_mean: Option<f64>,
    /// Absorbed input rows, when the model was trained in audit mode.
    #[serde(skip)]
    pub absorbed: Vec<usize>,
}

impl Pattern {
    fn snapshot(rep: &Representation, model: &UcModel) -> Pattern {
        Pattern {
            vector: rep.mean().to_vec(),
            denorm_vector: model.norm().denormalize_row(rep.mean()),
            count: rep.count(),
            depth: rep.depth(),
            label_hist: rep.label_hist().clone(),
            pure_class: rep.pure_class().map(str::to_string),
            target_mean: rep.target_mean(),
            absorbed: rep.absorbed_rows().to_vec(),
        }
    }
}

/// The seed cell's representations, in creation order.
///
/// Their counts sum to the model's total inputs: seed-level siblings never
/// share an input.
pub fn mine_unconstrained(model: &UcModel) -> Result<Vec<Pattern>> {
    if model.total_inputs() == 0 {
        return Err(Error::ModelUntrained);
    }
    Ok(model
        .seed_cell()
        .reps()
        .iter()
        .map(|rep| Pattern::snapshot(rep, model))
        .collect())
}

/// The most generic single-class representations, depth first in creation
/// order.
///
/// A representation is emitted when it belongs to one class and either sits
/// in the seed cell or has a mixed-class parent; its descendants are skipped
/// since they share its class. A childless mixed representation (possible
/// only through contradictory duplicate labels or a `max_depth` cap) is
/// emitted as-is so the cover stays complete; such a pattern carries no
/// `pure_class` and is rejected downstream by
/// [`correlate_patterns`](crate::stats::correlate_patterns).
pub fn mine_class_constrained(model: &UcModel) -> Result<Vec<Pattern>> {
    if model.total_inputs() == 0 {
        return Err(Error::ModelUntrained);
    }
    if model.target_kind() != TargetKind::Categorical {
        return Err(Error::KindMismatch(
            "class-constrained mining needs a categorical target".into(),
        ));
    }
    fn visit(rep: &Representation, model: &UcModel, out: &mut Vec<Pattern>) {
        if rep.pure_class().is_some() {
            out.push(Pattern::snapshot(rep, model));
            return;
        }
        match rep.child() {
            Some(cell) => {
                for child in cell.reps() {
                    visit(child, model, out);
                }
            }
            None => out.push(Pattern::snapshot(rep, model)),
        }
    }
    let mut out = Vec::new();
    for rep in model.seed_cell().reps() {
        visit(rep, model, &mut out);
    }
    Ok(out)
}

/// CSV rows: denormalized feature values, then count, depth and class.
pub fn write_csv<W: Write>(patterns: &[Pattern], feature_names: &[String], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = feature_names.iter().map(String::as_str).collect();
    header.extend(["count", "depth", "class"]);
    writer.write_record(&header)?;
    for p in patterns {
        let mut record: Vec<String> = p.denorm_vector.iter().map(|v| v.to_string()).collect();
        record.push(p.count.to_string());
        record.push(p.depth.to_string());
        record.push(p.pure_class.clone().unwrap_or_default());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
