//! Tabular datasets, standardization and repeated random train/test splits.

mod csv_io;
mod synthetic;

pub use self::csv_io::{load_csv, parse_csv};
pub use self::synthetic::{make_synthetic, SyntheticKind};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Labeled feature matrix. Features are row-major, `len() × n_features()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Validates shapes, finiteness, and that every class occurs at least once.
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_features = feature_names.len();
        if n_features == 0 {
            return Err(Error::InvalidArgument(
                "dataset has no feature columns".into(),
            ));
        }
        if labels.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "dataset needs at least 2 rows, got {}",
                labels.len()
            )));
        }
        if class_names.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "dataset needs at least 2 classes, got {}",
                class_names.len()
            )));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * n_features,
                actual: features.len(),
                context: "feature buffer (rows × columns)",
            });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite feature at row {}, column {}",
                i / n_features,
                i % n_features
            )));
        }
        let mut seen = vec![false; class_names.len()];
        for &y in &labels {
            *seen.get_mut(y).ok_or(Error::LabelOutOfRange {
                label: y,
                num_classes: class_names.len(),
            })? = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "class `{}` has no rows",
                class_names[missing]
            )));
        }
        Ok(Dataset {
            features,
            n_features,
            labels,
            feature_names,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order. The subset may lack some classes.
    pub fn subset(&self, indices: &[usize]) -> Subset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Subset {
            features,
            labels,
            n_features: self.n_features,
        }
    }
}

/// A selection of rows copied out of a [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub n_features: usize,
}

impl Subset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// Per-column affine map fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations; 1 for constant columns.
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Fits column means and population standard deviations.
    pub fn fit(features: &[f64], n_features: usize) -> Result<Self> {
        if n_features == 0 || features.is_empty() {
            return Err(Error::Empty("standardizer fit set"));
        }
        if features.len() % n_features != 0 {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                actual: features.len() % n_features,
                context: "standardizer fit rows",
            });
        }
        let n = (features.len() / n_features) as f64;
        let mut means = Vec::with_capacity(n_features);
        let mut scales = Vec::with_capacity(n_features);
        for col in 0..n_features {
            let column = features.iter().skip(col).step_by(n_features);
            let first = features[col];
            if column.clone().all(|&v| v == first) {
                means.push(first);
                scales.push(1.0);
                continue;
            }
            let mean = column.clone().sum::<f64>() / n;
            let var = column.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            means.push(mean);
            scales.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Ok(Standardizer { means, scales })
    }

    pub fn transform(&self, features: &[f64]) -> Vec<f64> {
        let d = self.means.len();
        features
            .iter()
            .enumerate()
            .map(|(i, v)| (v - self.means[i % d]) / self.scales[i % d])
            .collect()
    }

    pub fn transform_in_place(&self, features: &mut [f64]) {
        let d = self.means.len();
        for (i, v) in features.iter_mut().enumerate() {
            *v = (*v - self.means[i % d]) / self.scales[i % d];
        }
    }
}

/// Fits a [`Standardizer`] on a training subset.
pub fn fit_standardizer(train: &Subset) -> Result<Standardizer> {
    Standardizer::fit(&train.features, train.n_features)
}

/// Repeated random train/test partitioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub test_fraction: f64,
    pub n_splits: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            seed: 0,
            test_fraction: 0.3,
            n_splits: 20,
        }
    }
}

/// Train and test row indices for one split, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// SplitMix64 finalizer; decorrelates nearby seeds.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a named random stream of split `index` under `master`.
pub fn derive_seed(master: u64, index: u64, stream: u64) -> u64 {
    mix64(mix64(mix64(master) ^ index) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

const SPLIT_STREAM: u64 = 1;

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.n_splits == 0 {
            return Err(Error::InvalidArgument("n_splits must be positive".into()));
        }
        Ok(())
    }

    /// `round(test_fraction · n)`.
    pub fn test_size(&self, n: usize) -> usize {
        (self.test_fraction * n as f64).round() as usize
    }

    /// Indices of split `split_index` for a dataset of `n` rows.
    pub fn indices(&self, n: usize, split_index: usize) -> Result<SplitIndices> {
        self.validate()?;
        if split_index >= self.n_splits {
            return Err(Error::InvalidArgument(format!(
                "split index {split_index} out of range for {} splits",
                self.n_splits
            )));
        }
        let n_test = self.test_size(n);
        if n_test == 0 || n_test >= n {
            return Err(Error::InvalidArgument(format!(
                "test fraction {} of {n} rows leaves an empty train or test set",
                self.test_fraction
            )));
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(self.seed, split_index as u64, SPLIT_STREAM));
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut test = perm[..n_test].to_vec();
        let mut train = perm[n_test..].to_vec();
        test.sort_unstable();
        train.sort_unstable();
        Ok(SplitIndices { train, test })
    }
}

/// Materializes split `split_index` of `dataset` as (train, test).
pub fn split(dataset: &Dataset, plan: &SplitPlan, split_index: usize) -> Result<(Subset, Subset)> {
    let idx = plan.indices(dataset.len(), split_index)?;
    Ok((dataset.subset(&idx.train), dataset.subset(&idx.test)))
}
