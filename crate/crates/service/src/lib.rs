//! HTTP service that lets a person act as the labeling oracle for active
//! learning sessions over a prepared dataset.
//!
//! Endpoints:
//!
//! - `POST /sessions` creates a session, trains the first model and queues
//!   the first batch.
//! - `GET /sessions/{id}/batch` returns the pending batch with display data.
//! - `POST /sessions/{id}/labels` labels the whole pending batch.
//! - `GET /sessions/{id}/curve` returns the learning curve.
//! - `GET /users/{id}/scorecard` returns a scored account.
//! - `GET /healthz`
//!
//! Every mutation is written to the session store before the response goes
//! out, and sessions are restored from the store on startup.

pub mod api;
mod error;
mod store;

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::Router;
use tokio::sync::Mutex;
use tower_http::services::ServeDir;
use trustscore_core::active::Session;
use trustscore_core::dataset::load_dataset;
use trustscore_core::dataset::table::{read_scorecards, ScoreRow};
use trustscore_core::model::parse_tweets;
use trustscore_core::{Features, SplitDataset, TweetRecord};

pub use error::{ApiError, StartupError};
pub use store::{SessionRecord, SessionStore};

/// Tweets shown per account in a batch.
pub const SAMPLE_TWEETS: usize = 10;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: String,
    pub dataset: PathBuf,
    pub data_dir: PathBuf,
    /// Scorecard table for display payloads and the scorecard endpoint.
    pub scorecards: Option<PathBuf>,
    /// Tweet file for sample tweets in batch payloads.
    pub tweets: Option<PathBuf>,
    /// Static UI bundle served at `/`.
    pub ui_dir: Option<PathBuf>,
}

/// Immutable inputs shared by every session.
pub struct Catalog {
    pub dataset_name: String,
    pub dataset: Arc<SplitDataset>,
    pub index: Arc<HashMap<String, Features>>,
    pub scorecards: HashMap<String, ScoreRow>,
    /// Up to [`SAMPLE_TWEETS`] most-engaged tweets per author.
    pub sample_tweets: HashMap<String, Vec<TweetRecord>>,
}

impl Catalog {
    pub fn new(
        dataset_name: String,
        dataset: SplitDataset,
        scorecards: Vec<ScoreRow>,
        tweets: Vec<TweetRecord>,
    ) -> Self {
        let index = dataset.iter().map(|v| (v.user_id.clone(), v.values)).collect();
        Catalog {
            dataset_name,
            dataset: Arc::new(dataset),
            index: Arc::new(index),
            scorecards: scorecards.into_iter().map(|r| (r.user_id.clone(), r)).collect(),
            sample_tweets: sample_tweets(tweets),
        }
    }
}

fn sample_tweets(tweets: Vec<TweetRecord>) -> HashMap<String, Vec<TweetRecord>> {
    let mut by_author: HashMap<String, Vec<TweetRecord>> = HashMap::new();
    for t in tweets {
        by_author.entry(t.author_id.clone()).or_default().push(t);
    }
    for list in by_author.values_mut() {
        list.sort_by(|a, b| {
            (b.retweet_count + b.like_count)
                .cmp(&(a.retweet_count + a.like_count))
                .then_with(|| a.tweet_id.cmp(&b.tweet_id))
        });
        list.truncate(SAMPLE_TWEETS);
    }
    by_author
}

/// A live session plus the bookkeeping persisted with it.
pub(crate) struct Slot {
    pub session: Session,
    pub record: SessionRecord,
}

pub(crate) struct Inner {
    pub catalog: Catalog,
    pub store: SessionStore,
    pub sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
    pub next_id: AtomicU64,
}

#[derive(Clone)]
pub struct AppState {
    pub(crate) inner: Arc<Inner>,
}

impl AppState {
    /// Reads the dataset and optional side files, opens the session store and
    /// restores persisted sessions.
    pub fn load(config: &ServiceConfig) -> Result<Self, StartupError> {
        let dataset = load_dataset(&config.dataset)
            .map_err(|source| StartupError::Dataset { path: config.dataset.display().to_string(), source })?;
        let scorecards = match &config.scorecards {
            Some(path) => {
                let file = File::open(path)
                    .map_err(|e| StartupError::Scorecards { path: path.display().to_string(), source: e.into() })?;
                read_scorecards(BufReader::new(file))
                    .map_err(|source| StartupError::Scorecards { path: path.display().to_string(), source })?
            }
            None => Vec::new(),
        };
        let tweets = match &config.tweets {
            Some(path) => {
                let err = |source| StartupError::Tweets { path: path.display().to_string(), source };
                let file = File::open(path).map_err(|e| err(e.into()))?;
                let parsed = parse_tweets(BufReader::new(file)).map_err(err)?;
                for e in &parsed.errors {
                    tracing::warn!(line = e.line, "skipping tweet: {}", e.message);
                }
                parsed.records
            }
            None => Vec::new(),
        };
        let name = dataset_name(&config.dataset);
        Self::with_catalog(Catalog::new(name, dataset, scorecards, tweets), &config.data_dir)
    }

    pub fn with_catalog(catalog: Catalog, data_dir: &Path) -> Result<Self, StartupError> {
        let store_err =
            |e: std::io::Error| StartupError::Store { path: data_dir.display().to_string(), message: e.to_string() };
        let store = SessionStore::open(data_dir).map_err(store_err)?;
        let mut sessions = HashMap::new();
        let mut max_id = 0;
        for record in store.load_all().map_err(store_err)? {
            let session = Session::restore_with_index(Arc::clone(&catalog.index), record.state.clone())
                .map_err(|e| store_err(std::io::Error::other(format!("{}: {e}", record.session_id))))?;
            if let Some(n) = record.session_id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                max_id = max_id.max(n);
            }
            tracing::info!(session = %record.session_id, "restored session");
            sessions.insert(record.session_id.clone(), Arc::new(Mutex::new(Slot { session, record })));
        }
        Ok(AppState {
            inner: Arc::new(Inner {
                catalog,
                store,
                sessions: RwLock::new(sessions),
                next_id: AtomicU64::new(max_id + 1),
            }),
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.inner.catalog
    }

    pub fn session_count(&self) -> usize {
        self.inner.sessions.read().expect("session map lock").len()
    }

    pub(crate) fn allocate_id(&self) -> String {
        format!("s{}", self.inner.next_id.fetch_add(1, Ordering::SeqCst))
    }

    pub(crate) fn slot(&self, id: &str) -> Option<Arc<Mutex<Slot>>> {
        self.inner.sessions.read().expect("session map lock").get(id).cloned()
    }

    pub(crate) fn insert(&self, slot: Slot) {
        let id = slot.record.session_id.clone();
        self.inner.sessions.write().expect("session map lock").insert(id, Arc::new(Mutex::new(slot)));
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn router(state: AppState, ui_dir: Option<&Path>) -> Router {
    let app = api::routes().with_state(state);
    match ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Loads inputs, binds the listener and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), StartupError> {
    let loaded = config.clone();
    let state = tokio::task::spawn_blocking(move || AppState::load(&loaded)).await.expect("startup task panicked")?;
    let listener = tokio::net::TcpListener::bind(&config.listen)
        .await
        .map_err(|source| StartupError::Bind { addr: config.listen.clone(), source })?;
    let addr = listener.local_addr().map_err(StartupError::Serve)?;
    tracing::info!(%addr, dataset = %state.catalog().dataset_name, "listening");
    axum::serve(listener, router(state, config.ui_dir.as_deref()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(StartupError::Serve)
}
