use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Oracle, SessionError, Strategy};
use crate::dataset::{Features, Label, SplitDataset};
use crate::learn::{self, LearnerConfig, LearnerKind, LearnerModel, ProbEstimate};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub learner: LearnerKind,
    pub strategy: Strategy,
    pub batch_size: usize,
    pub max_iterations: usize,
    /// Early stop when the best accuracy of the last `patience` rounds does
    /// not beat the best before them by at least this much.
    pub min_improvement: f64,
    /// Plateau window in rounds; 0 disables early stopping.
    pub patience: usize,
    pub seed: u64,
    #[serde(default)]
    pub learner_config: LearnerConfig,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            learner: LearnerKind::Forest,
            strategy: Strategy::Entropy,
            batch_size: 100,
            max_iterations: 100,
            min_improvement: 0.001,
            patience: 5,
            seed: 0,
            learner_config: LearnerConfig::default(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.batch_size == 0 {
            return Err(SessionError::InvalidConfig("batch_size must be positive".into()));
        }
        if !self.min_improvement.is_finite() || self.min_improvement < 0.0 {
            return Err(SessionError::InvalidConfig("min_improvement must be a non-negative number".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub labeled_count: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    PoolExhausted,
    Plateau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "reason", rename_all = "snake_case")]
pub enum SessionStatus {
    Created,
    Active,
    Completed(StopReason),
}

/// What one labeling round produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub point: CurvePoint,
    pub labeled: Vec<String>,
    pub status: SessionStatus,
}

/// Everything about a session except the dataset and the trained model.
/// The model is a deterministic function of this state and is rebuilt on
/// restore.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub config: SessionConfig,
    pub train: Vec<(String, Label)>,
    pub test: Vec<(String, Label)>,
    pub pool: BTreeSet<String>,
    pub pending: Vec<String>,
    /// Ids queried so far, one entry per round.
    pub queries: Vec<Vec<String>>,
    pub history: Vec<CurvePoint>,
    pub iteration: usize,
    pub status: SessionStatus,
}

#[derive(Clone)]
pub struct Session {
    state: SessionState,
    features: Arc<HashMap<String, Features>>,
    queried: HashSet<String>,
    model: Option<LearnerModel>,
}

impl Session {
    pub fn new(dataset: &SplitDataset, config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        if dataset.test_labeled.is_empty() {
            return Err(SessionError::InvalidConfig("dataset has no test rows".into()));
        }
        let labeled = |rows: &[crate::dataset::FeatureVector]| -> Vec<(String, Label)> {
            rows.iter().filter_map(|v| v.label.map(|l| (v.user_id.clone(), l))).collect()
        };
        let state = SessionState {
            config,
            train: labeled(&dataset.train_labeled),
            test: labeled(&dataset.test_labeled),
            pool: dataset.pool_unlabeled.iter().map(|v| v.user_id.clone()).collect(),
            pending: Vec::new(),
            queries: Vec::new(),
            history: Vec::new(),
            iteration: 0,
            status: SessionStatus::Created,
        };
        Ok(Session { state, features: Arc::new(index(dataset)), queried: HashSet::new(), model: None })
    }

    /// Rebuilds a session from persisted state, retraining the model.
    pub fn restore(dataset: &SplitDataset, state: SessionState) -> Result<Self, SessionError> {
        Self::restore_with_index(Arc::new(index(dataset)), state)
    }

    pub fn restore_with_index(
        features: Arc<HashMap<String, Features>>,
        state: SessionState,
    ) -> Result<Self, SessionError> {
        let queried = state.queries.iter().flatten().cloned().collect();
        let mut session = Session { state, features, queried, model: None };
        if session.state.status != SessionStatus::Created {
            session.model = Some(session.train_model()?);
        }
        Ok(session)
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn config(&self) -> &SessionConfig {
        &self.state.config
    }

    pub fn history(&self) -> &[CurvePoint] {
        &self.state.history
    }

    pub fn pending(&self) -> &[String] {
        &self.state.pending
    }

    pub fn status(&self) -> SessionStatus {
        self.state.status
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.state.status, SessionStatus::Completed(_))
    }

    pub fn model(&self) -> Option<&LearnerModel> {
        self.model.as_ref()
    }

    pub fn labeled_count(&self) -> usize {
        self.state.train.len()
    }

    pub fn pool_size(&self) -> usize {
        self.state.pool.len()
    }

    /// `|train| + |test| + |pool| + |pending|`; constant over a session.
    pub fn instance_count(&self) -> usize {
        self.state.train.len() + self.state.test.len() + self.state.pool.len() + self.state.pending.len()
    }

    pub fn features_of(&self, id: &str) -> Option<&Features> {
        self.features.get(id)
    }

    pub fn shared_index(&self) -> Arc<HashMap<String, Features>> {
        Arc::clone(&self.features)
    }

    pub fn proba(&self, id: &str) -> Option<ProbEstimate> {
        Some(self.model.as_ref()?.proba(self.features.get(id)?))
    }

    /// Trains on the seed labels and records the first curve point.
    pub fn start(&mut self) -> Result<CurvePoint, SessionError> {
        if self.state.status != SessionStatus::Created {
            return Err(SessionError::AlreadyStarted);
        }
        let point = self.retrain_and_evaluate()?;
        self.state.status = SessionStatus::Active;
        self.update_status();
        Ok(point)
    }

    fn train_model(&self) -> Result<LearnerModel, SessionError> {
        let rows: Vec<&[f64]> = self.state.train.iter().map(|(id, _)| &self.features[id][..]).collect();
        let labels: Vec<Label> = self.state.train.iter().map(|(_, l)| *l).collect();
        let cfg = &self.state.config;
        let seed = seed::mix(cfg.seed, self.state.iteration as u64);
        Ok(learn::train(cfg.learner, &rows, &labels, &cfg.learner_config, seed)?)
    }

    /// Retrains on the current labeled set and appends test accuracy to the
    /// history. Only the test set is used for evaluation.
    fn retrain_and_evaluate(&mut self) -> Result<CurvePoint, SessionError> {
        let model = self.train_model()?;
        let hits = self.state.test.par_iter().filter(|(id, label)| model.predict(&self.features[id]) == *label).count();
        let point = CurvePoint {
            iteration: self.state.iteration,
            labeled_count: self.state.train.len(),
            accuracy: hits as f64 / self.state.test.len() as f64,
        };
        self.state.history.push(point);
        self.model = Some(model);
        Ok(point)
    }

    fn update_status(&mut self) {
        let cfg = &self.state.config;
        let reason = if self.state.iteration >= cfg.max_iterations {
            Some(StopReason::MaxIterations)
        } else if self.state.pool.is_empty() {
            Some(StopReason::PoolExhausted)
        } else if plateaued(&self.state.history, cfg.patience, cfg.min_improvement) {
            Some(StopReason::Plateau)
        } else {
            None
        };
        if let Some(reason) = reason {
            self.state.status = SessionStatus::Completed(reason);
        }
    }

    /// Picks the next batch from the pool and moves it to pending.
    pub fn select_batch(&mut self) -> Result<Vec<String>, SessionError> {
        match self.state.status {
            SessionStatus::Created => return Err(SessionError::NotStarted),
            SessionStatus::Completed(_) => return Err(SessionError::Completed),
            SessionStatus::Active => {}
        }
        if !self.state.pending.is_empty() {
            return Err(SessionError::PendingBatchExists);
        }
        if self.state.pool.is_empty() {
            return Err(SessionError::PoolEmpty);
        }
        let model = self.model.as_ref().ok_or(SessionError::NotStarted)?;
        let cfg = &self.state.config;
        let k = cfg.batch_size.min(self.state.pool.len());
        let batch: Vec<String> = match cfg.strategy {
            Strategy::Random => {
                let ids: Vec<&String> = self.state.pool.iter().collect();
                let mut rng = seed::rng(cfg.seed, 0xBA7C_0000 ^ self.state.iteration as u64);
                sample(&mut rng, ids.len(), k).into_iter().map(|i| ids[i].clone()).collect()
            }
            strategy => {
                let pool: Vec<&String> = self.state.pool.iter().collect();
                let mut scored: Vec<(f64, &String)> = pool
                    .par_iter()
                    .map(|id| (strategy.priority(&model.proba(&self.features[*id]).as_array()), *id))
                    .collect();
                rank_and_take(&mut scored, k)
            }
        };
        for id in &batch {
            self.state.pool.remove(id);
            self.queried.insert(id.clone());
        }
        self.state.queries.push(batch.clone());
        self.state.pending = batch.clone();
        Ok(batch)
    }

    /// Moves the pending batch into the labeled training set.
    pub fn submit_labels(&mut self, labels: &HashMap<String, Label>) -> Result<(), SessionError> {
        if self.is_complete() {
            return Err(SessionError::Completed);
        }
        if self.state.pending.is_empty() {
            return Err(SessionError::NoPendingBatch);
        }
        let pending: HashSet<&String> = self.state.pending.iter().collect();
        let mut missing: Vec<String> =
            self.state.pending.iter().filter(|id| !labels.contains_key(*id)).cloned().collect();
        let mut unexpected: Vec<String> = labels.keys().filter(|id| !pending.contains(id)).cloned().collect();
        if !missing.is_empty() || !unexpected.is_empty() {
            missing.sort();
            unexpected.sort();
            return Err(SessionError::LabelMismatch { missing, unexpected });
        }
        let batch = std::mem::take(&mut self.state.pending);
        self.state.train.extend(batch.into_iter().map(|id| {
            let label = labels[&id];
            (id, label)
        }));
        Ok(())
    }

    /// Applies labels for the pending batch, retrains, evaluates, and queues
    /// the next batch unless the session has finished.
    pub fn advance(&mut self, labels: &HashMap<String, Label>) -> Result<StepOutcome, SessionError> {
        let labeled = self.state.pending.clone();
        self.submit_labels(labels)?;
        self.state.iteration += 1;
        let point = self.retrain_and_evaluate()?;
        self.update_status();
        if !self.is_complete() {
            self.select_batch()?;
        }
        Ok(StepOutcome { point, labeled, status: self.state.status })
    }

    /// One round with an automatic oracle: query, label, retrain, evaluate.
    pub fn al_step(&mut self, oracle: &Oracle) -> Result<StepOutcome, SessionError> {
        let Oracle::Simulated(sim) = oracle else {
            return Err(SessionError::NeedsHumanOracle);
        };
        if self.is_complete() {
            return Err(SessionError::Completed);
        }
        if self.state.pending.is_empty() {
            self.select_batch()?;
        }
        let labels: HashMap<String, Label> =
            self.state.pending.iter().map(|id| (id.clone(), sim.label(id, &self.features[id]))).collect();
        let labeled = self.state.pending.clone();
        self.submit_labels(&labels)?;
        self.state.iteration += 1;
        let point = self.retrain_and_evaluate()?;
        self.update_status();
        Ok(StepOutcome { point, labeled, status: self.state.status })
    }

    /// Runs rounds until the iteration budget, the pool, or the plateau rule
    /// ends the session.
    pub fn al_run(&mut self, oracle: &Oracle) -> Result<&[CurvePoint], SessionError> {
        if self.state.status == SessionStatus::Created {
            self.start()?;
        }
        while !self.is_complete() {
            self.al_step(oracle)?;
        }
        Ok(&self.state.history)
    }

    pub fn was_queried(&self, id: &str) -> bool {
        self.queried.contains(id)
    }
}

/// The `k` candidates a non-random strategy queries first: highest
/// priority, ties broken by id ascending.
pub fn top_k(strategy: Strategy, candidates: &[(String, ProbEstimate)], k: usize) -> Vec<String> {
    let mut scored: Vec<(f64, &String)> =
        candidates.iter().map(|(id, p)| (strategy.priority(&p.as_array()), id)).collect();
    rank_and_take(&mut scored, k)
}

/// Sorts by priority descending, then id ascending, and keeps the first `k`.
fn rank_and_take(scored: &mut [(f64, &String)], k: usize) -> Vec<String> {
    scored.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.iter().take(k).map(|(_, id)| (*id).clone()).collect()
}

fn plateaued(history: &[CurvePoint], patience: usize, min_improvement: f64) -> bool {
    if patience == 0 || history.len() <= patience {
        return false;
    }
    let split = history.len() - patience;
    let best = |points: &[CurvePoint]| points.iter().map(|p| p.accuracy).fold(f64::NEG_INFINITY, f64::max);
    best(&history[split..]) - best(&history[..split]) < min_improvement
}

fn index(dataset: &SplitDataset) -> HashMap<String, Features> {
    dataset.iter().map(|v| (v.user_id.clone(), v.values)).collect()
}
