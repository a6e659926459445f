//! Classic online self-organizing map on a square grid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Target};
use crate::error::{Error, Result};

const ALPHA_START: f64 = 0.5;
const ALPHA_END: f64 = 0.01;
const RADIUS_END: f64 = 0.5;

/// How a fitted map encodes a sample as features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SomEncoding {
    /// Two features: the best-matching unit's grid row and column.
    BmuCoords,
    /// One feature per unit: the Euclidean distance to its weight vector.
    UnitDistances,
}

/// A trained map: `grid_side^2` units in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    grid_side: usize,
    /// Unit weight vectors, row-major over the grid.
    weights: Vec<Vec<f64>>,
    epochs: usize,
    encoding: SomEncoding,
}

impl SomModel {
    pub fn grid_side(&self) -> usize {
        self.grid_side
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn encoding(&self) -> SomEncoding {
        self.encoding
    }

    /// Output feature count under the model's encoding.
    pub fn dims(&self) -> usize {
        match self.encoding {
            SomEncoding::BmuCoords => 2,
            SomEncoding::UnitDistances => self.weights.len(),
        }
    }

    /// Best-matching unit: the closest weight vector by Euclidean distance,
    /// ties resolved toward the lowest unit index.
    pub fn bmu(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.weights[0].len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.weights[0].len(),
            });
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, w) in self.weights.iter().enumerate() {
            let d = dist2(x, w);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        Ok(best)
    }
}

/// Trains a `grid_side` x `grid_side` map with seeded uniform `[0, 1]`
/// weights.
///
/// Online updates: every epoch presents the rows in dataset order; each row
/// pulls the whole grid toward itself under a Gaussian neighborhood centered
/// on its best-matching unit. Learning rate and radius decay linearly across
/// epochs, `0.5 -> 0.01` and `grid_side / 2 -> 0.5`.
pub fn fit(
    data: &Dataset,
    grid_side: usize,
    epochs: usize,
    seed: u64,
    encoding: SomEncoding,
) -> Result<SomModel> {
    if grid_side == 0 || epochs == 0 {
        return Err(Error::InvalidConfig(
            "SOM needs a positive grid side and epoch count".into(),
        ));
    }
    if data.n_samples() == 0 {
        return Err(Error::EmptyDataset);
    }
    let f = data.feature_count();
    let units = grid_side * grid_side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<Vec<f64>> = (0..units)
        .map(|_| (0..f).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();

    let radius_start = grid_side as f64 / 2.0;
    for epoch in 0..epochs {
        let frac = if epochs > 1 {
            epoch as f64 / (epochs - 1) as f64
        } else {
            0.0
        };
        let alpha = ALPHA_START + (ALPHA_END - ALPHA_START) * frac;
        let sigma = radius_start + (RADIUS_END - radius_start) * frac;
        for row in data.rows() {
            let mut bmu = 0;
            let mut best_d = f64::INFINITY;
            for (i, w) in weights.iter().enumerate() {
                let d = dist2(row, w);
                if d < best_d {
                    best_d = d;
                    bmu = i;
                }
            }
            let (br, bc) = (bmu / grid_side, bmu % grid_side);
            for (i, w) in weights.iter_mut().enumerate() {
                let (r, c) = (i / grid_side, i % grid_side);
                let dr = r as f64 - br as f64;
                let dc = c as f64 - bc as f64;
                let grid_d2 = dr * dr + dc * dc;
                let h = (-grid_d2 / (2.0 * sigma * sigma)).exp();
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += alpha * h * (xj - *wj);
                }
            }
        }
    }
    Ok(SomModel {
        grid_side,
        weights,
        epochs,
        encoding,
    })
}

/// Encodes every row under the model's encoding; the target rides along.
pub fn transform(model: &SomModel, data: &Dataset) -> Result<Dataset> {
    if data.feature_count() != model.weights[0].len() {
        return Err(Error::LengthMismatch {
            left: data.feature_count(),
            right: model.weights[0].len(),
        });
    }
    let (names, rows): (Vec<String>, Vec<Vec<f64>>) = match model.encoding {
        SomEncoding::BmuCoords => {
            let names = vec!["som_row".to_string(), "som_col".to_string()];
            let rows = data
                .rows()
                .map(|row| {
                    let bmu = model.bmu(row).expect("length checked");
                    vec![
                        (bmu / model.grid_side) as f64,
                        (bmu % model.grid_side) as f64,
                    ]
                })
                .collect();
            (names, rows)
        }
        SomEncoding::UnitDistances => {
            let names = (0..model.weights.len()).map(|i| format!("unit{i}")).collect();
            let rows = data
                .rows()
                .map(|row| model.weights.iter().map(|w| dist2(row, w).sqrt()).collect())
                .collect();
            (names, rows)
        }
    };
    let target: Target = data.target().clone();
    Dataset::from_rows(names, rows, data.target_name(), target)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
