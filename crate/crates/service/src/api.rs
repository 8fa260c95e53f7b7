//! Request handlers and wire types.

use std::collections::HashMap;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use trustscore_core::active::{CurvePoint, Session, SessionConfig, SessionStatus, Strategy};
use trustscore_core::dataset::raw_features;
use trustscore_core::dataset::table::ScoreRow;
use trustscore_core::learn::LearnerKind;
use trustscore_core::{Label, TweetRecord, FEATURE_NAMES};

use crate::error::ApiError;
use crate::store::SessionRecord;
use crate::{AppState, Slot};

pub(crate) fn routes() -> Router<AppState> {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/batch", get(get_batch))
        .route("/sessions/{id}/labels", post(post_labels))
        .route("/sessions/{id}/curve", get(get_curve))
        .route("/users/{id}/scorecard", get(get_scorecard))
}

/// Token identifying the batch queued after `iteration` rounds.
pub fn batch_token(session_id: &str, iteration: usize) -> String {
    format!("{session_id}-{iteration}")
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub learner: Option<String>,
    pub strategy: Option<String>,
    pub batch_size: Option<usize>,
    pub max_iterations: Option<usize>,
    pub min_improvement: Option<f64>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,
    /// Must name the loaded dataset when given.
    pub dataset: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub status: SessionStatus,
    pub batch_token: Option<String>,
    pub batch_size: usize,
    pub labeled_count: usize,
    pub pool_size: usize,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeatureCell {
    pub name: String,
    pub value: f64,
    /// Unnormalized value, when the account's scorecard is loaded.
    pub raw: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BatchInstance {
    pub user_id: String,
    pub features: Vec<FeatureCell>,
    pub scorecard: Option<ScoreRow>,
    pub tweets: Vec<TweetRecord>,
    pub p_trustworthy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BatchView {
    pub session_id: String,
    pub batch_token: Option<String>,
    pub iteration: usize,
    pub complete: bool,
    pub status: SessionStatus,
    pub labeled_count: usize,
    pub pool_size: usize,
    pub learner: LearnerKind,
    pub strategy: Strategy,
    pub instances: Vec<BatchInstance>,
}

#[derive(Debug, Deserialize)]
pub struct LabelSubmission {
    pub batch_token: String,
    /// `user_id -> label`; a label is `"trustworthy"`, `"untrustworthy"`,
    /// `1`, `0`, `true` or `false`.
    pub labels: HashMap<String, Value>,
}

/// Result of one accepted label submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub batch_token: String,
    pub point: CurvePoint,
    pub complete: bool,
    pub status: SessionStatus,
    pub next_batch_token: Option<String>,
    pub next_batch_size: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveView {
    pub session_id: String,
    pub learner: LearnerKind,
    pub strategy: Strategy,
    pub status: SessionStatus,
    pub points: Vec<CurvePoint>,
}

async fn healthz(State(state): State<AppState>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "dataset": state.catalog().dataset_name,
        "sessions": state.session_count(),
    }))
}

fn parse_create(req: CreateSession, dataset_name: &str) -> Result<SessionConfig, ApiError> {
    if let Some(name) = &req.dataset {
        if name != dataset_name {
            return Err(ApiError::not_found(format!("unknown dataset `{name}`")));
        }
    }
    let mut config = SessionConfig::default();
    if let Some(l) = &req.learner {
        config.learner =
            l.parse().map_err(|e: trustscore_core::learn::LearnError| ApiError::bad_request(e.to_string()))?;
    }
    if let Some(s) = &req.strategy {
        config.strategy =
            s.parse().map_err(|e: trustscore_core::active::SessionError| ApiError::bad_request(e.to_string()))?;
    }
    config.batch_size = req.batch_size.unwrap_or(config.batch_size);
    config.max_iterations = req.max_iterations.unwrap_or(config.max_iterations);
    config.min_improvement = req.min_improvement.unwrap_or(config.min_improvement);
    config.patience = req.patience.unwrap_or(config.patience);
    config.seed = req.seed.unwrap_or(config.seed);
    config.validate()?;
    Ok(config)
}

fn current_token(slot: &Slot) -> Option<String> {
    (!slot.session.pending().is_empty()).then(|| batch_token(&slot.record.session_id, slot.session.state().iteration))
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Json<SessionCreated>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let config = parse_create(req, &state.catalog().dataset_name)?;
    let session_id = state.allocate_id();
    let worker = state.clone();
    let slot = tokio::task::spawn_blocking(move || -> Result<Slot, ApiError> {
        let catalog = worker.catalog();
        let mut session = Session::new(&catalog.dataset, config)?;
        session.start()?;
        if !session.is_complete() {
            session.select_batch()?;
        }
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let record =
            SessionRecord { session_id, created_unix, state: session.state().clone(), receipts: Default::default() };
        worker.inner.store.save(&record).map_err(|e| ApiError::internal(format!("persisting session: {e}")))?;
        Ok(Slot { session, record })
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;

    let created = SessionCreated {
        session_id: slot.record.session_id.clone(),
        status: slot.session.status(),
        batch_token: current_token(&slot),
        batch_size: slot.session.pending().len(),
        labeled_count: slot.session.labeled_count(),
        pool_size: slot.session.pool_size(),
        curve: slot.session.history().to_vec(),
    };
    tracing::info!(session = %created.session_id, "created session");
    state.insert(slot);
    Ok(Json(created))
}

fn find(state: &AppState, id: &str) -> Result<std::sync::Arc<tokio::sync::Mutex<Slot>>, ApiError> {
    state.slot(id).ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
}

async fn get_batch(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<BatchView>, ApiError> {
    let slot = find(&state, &id)?;
    let slot = slot.lock().await;
    let session = &slot.session;
    if !session.is_complete() && session.pending().is_empty() {
        return Err(ApiError::conflict("no batch is waiting for labels"));
    }
    let catalog = state.catalog();
    let instances = session
        .pending()
        .iter()
        .map(|user_id| {
            let values = session.features_of(user_id).copied().unwrap_or([0.0; trustscore_core::FEATURE_COUNT]);
            let scorecard = catalog.scorecards.get(user_id).cloned();
            let raw = scorecard.as_ref().map(|row| raw_features(&row.card(), &row.user()));
            let features = FEATURE_NAMES
                .iter()
                .enumerate()
                .map(|(i, name)| FeatureCell { name: name.to_string(), value: values[i], raw: raw.map(|r| r[i]) })
                .collect();
            BatchInstance {
                user_id: user_id.clone(),
                features,
                scorecard,
                tweets: catalog.sample_tweets.get(user_id).cloned().unwrap_or_default(),
                p_trustworthy: session.proba(user_id).map(|p| p.p_trustworthy).unwrap_or(0.5),
            }
        })
        .collect();
    let config = session.config();
    Ok(Json(BatchView {
        session_id: id,
        batch_token: current_token(&slot),
        iteration: session.state().iteration,
        complete: session.is_complete(),
        status: session.status(),
        labeled_count: session.labeled_count(),
        pool_size: session.pool_size(),
        learner: config.learner,
        strategy: config.strategy,
        instances,
    }))
}

fn parse_label(id: &str, value: &Value) -> Result<Label, ApiError> {
    let label = match value {
        Value::String(s) => s.parse().ok(),
        Value::Bool(b) => Some(Label::from_bool(*b)),
        Value::Number(n) => match n.as_u64() {
            Some(1) => Some(Label::Trustworthy),
            Some(0) => Some(Label::Untrustworthy),
            _ => None,
        },
        _ => None,
    };
    label.ok_or_else(|| ApiError::bad_request(format!("invalid label for `{id}`: {value}")))
}

async fn post_labels(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<LabelSubmission>, JsonRejection>,
) -> Result<Json<StepReport>, ApiError> {
    let slot = find(&state, &id)?;
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    // one writer per session; a concurrent submission is rejected, not queued
    let mut guard = slot.try_lock_owned().map_err(|_| ApiError::conflict("session is busy with another submission"))?;

    if let Some(original) = guard.record.receipts.get(&req.batch_token) {
        return Err(ApiError {
            status: StatusCode::CONFLICT,
            body: json!({ "error": "batch already submitted", "original": original }),
        });
    }
    if guard.session.is_complete() {
        return Err(ApiError::conflict("session has completed"));
    }
    if current_token(&guard).as_deref() != Some(req.batch_token.as_str()) {
        return Err(ApiError::conflict(format!("batch token `{}` is not the pending batch", req.batch_token)));
    }
    let labels = req
        .labels
        .iter()
        .map(|(id, v)| Ok((id.clone(), parse_label(id, v)?)))
        .collect::<Result<HashMap<String, Label>, ApiError>>()?;

    let worker = state.clone();
    let token = req.batch_token;
    tokio::task::spawn_blocking(move || -> Result<StepReport, ApiError> {
        let slot = &mut *guard;
        let backup = slot.session.clone();
        let outcome = slot.session.advance(&labels)?;
        let report = StepReport {
            batch_token: token.clone(),
            point: outcome.point,
            complete: slot.session.is_complete(),
            status: outcome.status,
            next_batch_token: current_token(slot),
            next_batch_size: slot.session.pending().len(),
        };
        let mut record = slot.record.clone();
        record.state = slot.session.state().clone();
        record.receipts.insert(token, report.clone());
        if let Err(e) = worker.inner.store.save(&record) {
            slot.session = backup;
            return Err(ApiError::internal(format!("persisting session: {e}")));
        }
        slot.record = record;
        Ok(report)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map(Json)
}

async fn get_curve(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<CurveView>, ApiError> {
    let slot = find(&state, &id)?;
    let slot = slot.lock().await;
    let config = slot.session.config();
    Ok(Json(CurveView {
        session_id: id,
        learner: config.learner,
        strategy: config.strategy,
        status: slot.session.status(),
        points: slot.session.history().to_vec(),
    }))
}

async fn get_scorecard(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ScoreRow>, ApiError> {
    state
        .catalog()
        .scorecards
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown user `{id}`")))
}
