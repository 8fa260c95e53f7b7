//! Classifiers for the trust label: a Gini random forest and a linear
//! soft-margin SVM with sigmoid probability calibration.

mod forest;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Label;

pub use forest::{train_forest, ForestModel, ForestParams, Node, Tree};
pub use svm::{fit_sigmoid, train_svm, LinearModel, Sigmoid, SvmParams};

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set holds a single class")]
    SingleClass,
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("rows have inconsistent widths")]
    RaggedRows,
    #[error("invalid hyperparameter: {0}")]
    InvalidParams(String),
    #[error("unknown learner `{0}`; expected forest or svm")]
    UnknownLearner(String),
    #[error("snapshot error: {0}")]
    Snapshot(String),
}

/// Class probabilities for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub p_trustworthy: f64,
}

impl ProbEstimate {
    pub fn new(p_trustworthy: f64) -> Self {
        ProbEstimate { p_trustworthy: p_trustworthy.clamp(0.0, 1.0) }
    }

    pub fn p_untrustworthy(&self) -> f64 {
        1.0 - self.p_trustworthy
    }

    /// Distribution indexed by [`Label::as_index`].
    pub fn as_array(&self) -> [f64; 2] {
        [self.p_untrustworthy(), self.p_trustworthy]
    }

    pub fn predicted(&self) -> Label {
        Label::from_bool(self.p_trustworthy >= 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Forest,
    Svm,
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LearnerKind::Forest => "forest",
            LearnerKind::Svm => "svm",
        })
    }
}

impl FromStr for LearnerKind {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forest" | "rfc" => Ok(LearnerKind::Forest),
            "svm" => Ok(LearnerKind::Svm),
            other => Err(LearnError::UnknownLearner(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub forest: ForestParams,
    pub svm: SvmParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnerModel {
    Forest(ForestModel),
    Svm(LinearModel),
}

impl LearnerModel {
    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerModel::Forest(_) => LearnerKind::Forest,
            LearnerModel::Svm(_) => LearnerKind::Svm,
        }
    }

    pub fn proba(&self, x: &[f64]) -> ProbEstimate {
        match self {
            LearnerModel::Forest(m) => m.proba(x),
            LearnerModel::Svm(m) => m.proba(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        self.proba(x).predicted()
    }

    /// JSON snapshot carrying a format version and the full model.
    pub fn to_snapshot(&self) -> String {
        let snapshot = Snapshot { format: SNAPSHOT_FORMAT.into(), version: SNAPSHOT_VERSION, model: self.clone() };
        serde_json::to_string_pretty(&snapshot).expect("models serialize")
    }

    pub fn from_snapshot(text: &str) -> Result<Self, LearnError> {
        let snapshot: Snapshot = serde_json::from_str(text).map_err(|e| LearnError::Snapshot(e.to_string()))?;
        if snapshot.format != SNAPSHOT_FORMAT || snapshot.version != SNAPSHOT_VERSION {
            return Err(LearnError::Snapshot(format!(
                "unsupported snapshot {} v{}",
                snapshot.format, snapshot.version
            )));
        }
        Ok(snapshot.model)
    }
}

const SNAPSHOT_FORMAT: &str = "trustscore-model";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    version: u32,
    model: LearnerModel,
}

pub fn train<R: AsRef<[f64]> + Sync>(
    kind: LearnerKind,
    rows: &[R],
    labels: &[Label],
    config: &LearnerConfig,
    seed: u64,
) -> Result<LearnerModel, LearnError> {
    Ok(match kind {
        LearnerKind::Forest => LearnerModel::Forest(train_forest(rows, labels, &config.forest, seed)?),
        LearnerKind::Svm => LearnerModel::Svm(train_svm(rows, labels, &config.svm, seed)?),
    })
}

/// Fraction of positions where prediction and truth agree.
pub fn accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64, LearnError> {
    if predictions.len() != truth.len() {
        return Err(LearnError::LengthMismatch { rows: predictions.len(), labels: truth.len() });
    }
    if predictions.is_empty() {
        return Err(LearnError::EmptyTrainingSet);
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

pub(crate) fn check_training_set<R: AsRef<[f64]>>(rows: &[R], labels: &[Label]) -> Result<usize, LearnError> {
    if rows.len() != labels.len() {
        return Err(LearnError::LengthMismatch { rows: rows.len(), labels: labels.len() });
    }
    if rows.is_empty() {
        return Err(LearnError::EmptyTrainingSet);
    }
    let width = rows[0].as_ref().len();
    if rows.iter().any(|r| r.as_ref().len() != width) {
        return Err(LearnError::RaggedRows);
    }
    let first = labels[0];
    if labels.iter().all(|l| *l == first) {
        return Err(LearnError::SingleClass);
    }
    Ok(width)
}
