use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DatasetError, FeatureVector, Label, NormalizationParams};
use crate::seed;

/// Labeled train and test sets plus the unlabeled pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDataset {
    pub train_labeled: Vec<FeatureVector>,
    pub test_labeled: Vec<FeatureVector>,
    pub pool_unlabeled: Vec<FeatureVector>,
    pub normalization_params: NormalizationParams,
}

impl SplitDataset {
    pub fn len(&self) -> usize {
        self.train_labeled.len() + self.test_labeled.len() + self.pool_unlabeled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureVector> {
        self.train_labeled.iter().chain(&self.test_labeled).chain(&self.pool_unlabeled)
    }
}

/// Splits labeled vectors into train and test with a seeded shuffle; every
/// unlabeled vector goes to the pool. The test set takes
/// `round(labeled * test_fraction)` rows. With no labels at all, everything
/// lands in the pool.
pub fn split(
    vectors: Vec<FeatureVector>,
    labels: &[(String, Label)],
    test_fraction: f64,
    rng_seed: u64,
    params: NormalizationParams,
) -> Result<SplitDataset, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidTestFraction(test_fraction));
    }
    let mut ids = HashSet::with_capacity(vectors.len());
    for v in &vectors {
        if !ids.insert(v.user_id.as_str()) {
            return Err(DatasetError::DuplicateId(v.user_id.clone()));
        }
    }
    let label_of: HashMap<&str, Label> = labels.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    if let Some((id, _)) = labels.iter().find(|(id, _)| !ids.contains(id.as_str())) {
        return Err(DatasetError::UnknownLabeledId(id.clone()));
    }

    let n_labeled = label_of.len();
    let n_test = (n_labeled as f64 * test_fraction).round() as usize;
    if n_labeled > 0 && (n_test == 0 || n_test == n_labeled) {
        return Err(DatasetError::EmptyPartition { labeled: n_labeled, fraction: test_fraction });
    }

    let mut labeled = Vec::with_capacity(n_labeled);
    let mut pool = Vec::with_capacity(vectors.len() - n_labeled);
    for mut v in vectors {
        match label_of.get(v.user_id.as_str()) {
            Some(label) => {
                v.label = Some(*label);
                labeled.push(v);
            }
            None => {
                v.label = None;
                pool.push(v);
            }
        }
    }
    labeled.shuffle(&mut seed::rng(rng_seed, 0x5EED_5911));
    let train = labeled.split_off(n_test);
    Ok(SplitDataset { train_labeled: train, test_labeled: labeled, pool_unlabeled: pool, normalization_params: params })
}
