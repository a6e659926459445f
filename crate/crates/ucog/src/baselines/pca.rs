//! Principal component analysis over [`Dataset`]s.

use serde::{Deserialize, Serialize};

use super::linalg;
use crate::dataset::{Dataset, Target};
use crate::error::{Error, Result};

/// How many features a covariance matrix may have before fitting switches
/// from a full Jacobi decomposition to power iteration with deflation.
const JACOBI_FEATURE_LIMIT: usize = 64;

/// Fitted principal components, descending by explained variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// Orthonormal component vectors, one per kept dimension. The first
    /// nonzero entry of each component is made positive so fits are
    /// reproducible across eigensolvers.
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    /// Set when fewer positive eigenvalues existed than requested; the model
    /// then carries only the available components.
    truncated: bool,
}

impl PcaModel {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn dims(&self) -> usize {
        self.components.len()
    }
}

/// Fits the top `k` principal components of the sample covariance.
pub fn fit(data: &Dataset, k: usize) -> Result<PcaModel> {
    let n = data.n_samples();
    let f = data.feature_count();
    if n < 2 {
        return Err(Error::TooFewSamples { got: n, needed: 2 });
    }
    let max_k = (n - 1).min(f);
    if k == 0 || k > max_k {
        return Err(Error::InvalidConfig(format!(
            "component count must be in [1, {max_k}], got {k}"
        )));
    }

    let mut mean = vec![0.0; f];
    for row in data.rows() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    let mut cov = vec![vec![0.0; f]; f];
    for row in data.rows() {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..f {
            for j in i..f {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..f {
        for j in i..f {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }

    let (eigenvalues, eigenvectors) = if f <= JACOBI_FEATURE_LIMIT {
        linalg::jacobi_eigen(&cov)
    } else {
        linalg::power_top_k(&cov, k)
    };

    let scale = eigenvalues.first().copied().unwrap_or(0.0).abs().max(1.0);
    let positive = eigenvalues
        .iter()
        .take(k)
        .filter(|&&l| l > scale * 1e-12)
        .count();
    let kept = positive.min(k);
    if kept < k {
        log::warn!("covariance has only {kept} positive eigenvalues, asked for {k}");
    }

    let mut components: Vec<Vec<f64>> = eigenvectors.into_iter().take(kept).collect();
    for c in components.iter_mut() {
        if let Some(first) = c.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                for v in c.iter_mut() {
                    *v = -*v;
                }
            }
        }
    }

    Ok(PcaModel {
        mean,
        components,
        eigenvalues: eigenvalues.into_iter().take(kept).collect(),
        truncated: kept < k,
    })
}

/// Projects every row onto the fitted components; the target rides along.
pub fn transform(model: &PcaModel, data: &Dataset) -> Result<Dataset> {
    if data.feature_count() != model.mean.len() {
        return Err(Error::LengthMismatch {
            left: data.feature_count(),
            right: model.mean.len(),
        });
    }
    let names = (0..model.dims()).map(|j| format!("pc{j}")).collect();
    let rows: Vec<Vec<f64>> = data
        .rows()
        .map(|row| {
            let centered: Vec<f64> = row.iter().zip(&model.mean).map(|(v, m)| v - m).collect();
            model
                .components
                .iter()
                .map(|c| linalg::dot(c, &centered))
                .collect()
        })
        .collect();
    let target: Target = data.target().clone();
    Dataset::from_rows(names, rows, data.target_name(), target)
}
