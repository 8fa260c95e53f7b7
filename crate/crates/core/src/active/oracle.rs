use serde::{Deserialize, Serialize};

use crate::dataset::{label_with_noise, Features, Label, LinearRule, NormalizationParams, OracleParams};

/// Source of labels for queried instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Oracle {
    /// Labels by rule, with no human involved.
    Simulated(SimulatedOracle),
    /// Labels arrive from a person through the annotation service.
    Interactive,
}

/// Linear threshold rule over normalized feature rows plus deterministic
/// label noise keyed on `(seed, user_id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedOracle {
    pub rule: LinearRule,
    pub noise: f64,
    pub seed: u64,
}

impl SimulatedOracle {
    /// Re-expresses a rule stated over raw features for the dataset's
    /// normalized rows. With the same params that generated a synthetic
    /// corpus, the oracle reproduces the corpus' ground-truth labels.
    pub fn for_dataset(params: &OracleParams, normalization: &NormalizationParams) -> Self {
        SimulatedOracle { rule: params.rule.in_normalized_space(normalization), noise: params.noise, seed: params.seed }
    }

    pub fn label(&self, user_id: &str, normalized: &Features) -> Label {
        label_with_noise(self.rule.fires(normalized), user_id, self.noise, self.seed)
    }
}
