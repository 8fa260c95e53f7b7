//! Pool-based active learning.
//!
//! A [`Session`] starts from a small labeled training set, a fixed labeled
//! test set and an unlabeled pool. Each round it retrains the learner, asks
//! the [`Strategy`] for the most informative pool instances, has an
//! [`Oracle`] label them, and records test accuracy on the learning curve.

mod curve;
mod oracle;
mod session;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learn::LearnError;

pub use curve::{write_curves, CurveGroup, CURVE_COLUMNS};
pub use oracle::{Oracle, SimulatedOracle};
pub use session::{top_k, CurvePoint, Session, SessionConfig, SessionState, SessionStatus, StepOutcome, StopReason};

#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("the unlabeled pool is empty")]
    PoolEmpty,
    #[error("a queried batch is still waiting for labels")]
    PendingBatchExists,
    #[error("no batch is waiting for labels")]
    NoPendingBatch,
    #[error("labels do not match the pending batch (missing: {missing:?}, unexpected: {unexpected:?})")]
    LabelMismatch { missing: Vec<String>, unexpected: Vec<String> },
    #[error("session has completed")]
    Completed,
    #[error("session has not been started")]
    NotStarted,
    #[error("session was already started")]
    AlreadyStarted,
    #[error("the interactive oracle cannot label automatically")]
    NeedsHumanOracle,
    #[error("learner error: {0}")]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uncertainty,
    Margin,
    Entropy,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Uncertainty, Strategy::Margin, Strategy::Entropy, Strategy::Random];

    /// Informativeness of a class distribution, oriented so that larger is
    /// queried first. Margin is negated; random has no score.
    pub fn priority(self, distribution: &[f64]) -> f64 {
        match self {
            Strategy::Uncertainty => uncertainty_score(distribution),
            Strategy::Margin => -margin_score(distribution),
            Strategy::Entropy => entropy_score(distribution),
            Strategy::Random => 0.0,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Uncertainty => "uncertainty",
            Strategy::Margin => "margin",
            Strategy::Entropy => "entropy",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = SessionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uncertainty" => Ok(Strategy::Uncertainty),
            "margin" => Ok(Strategy::Margin),
            "entropy" => Ok(Strategy::Entropy),
            "random" => Ok(Strategy::Random),
            other => Err(SessionError::InvalidConfig(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Least confidence: one minus the top class probability.
pub fn uncertainty_score(distribution: &[f64]) -> f64 {
    1.0 - distribution.iter().copied().fold(0.0, f64::max)
}

/// Gap between the two most probable classes. Small gaps are ambiguous.
pub fn margin_score(distribution: &[f64]) -> f64 {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &p in distribution {
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
    }
    if second == f64::NEG_INFINITY {
        first
    } else {
        first - second
    }
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy_score(distribution: &[f64]) -> f64 {
    -distribution.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}
