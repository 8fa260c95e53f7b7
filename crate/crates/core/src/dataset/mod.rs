//! Feature vectors, normalization, splitting and dataset persistence.

mod io;
mod normalize;
mod split;
mod synthetic;
pub mod table;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::UserRecord;
use crate::scoring::ScoreCard;

pub use io::{load_dataset, metadata_path, save_dataset, DATASET_FORMAT_VERSION};
pub use normalize::{
    apply_clip, fit_clip, fit_transform, min_max_normalize, nearest_rank, ClipBounds, FeatureParams,
    NormalizationParams,
};
pub use split::{split, SplitDataset};
pub use synthetic::{generate_synthetic, label_with_noise, LinearRule, OracleParams, SyntheticParams};

pub const FEATURE_COUNT: usize = 19;

pub type Features = [f64; FEATURE_COUNT];

/// Column order of every feature vector.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "followers_count",
    "friends_count",
    "statuses_count",
    "listed_count",
    "total_tweets",
    "retweet_ratio",
    "liked_ratio",
    "url_ratio",
    "hashtag_ratio",
    "mention_ratio",
    "original_content_ratio",
    "positive_count",
    "neutral_count",
    "negative_count",
    "sentiment_score",
    "tweet_credibility",
    "social_reputation",
    "retweet_hindex_plus_like_hindex",
    "influence_score",
];

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// Binary class; encoded as 1 (trustworthy) and 0 (untrustworthy).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Untrustworthy,
    Trustworthy,
}

impl Label {
    pub fn as_index(self) -> usize {
        match self {
            Label::Untrustworthy => 0,
            Label::Trustworthy => 1,
        }
    }

    pub fn from_bool(trustworthy: bool) -> Self {
        if trustworthy {
            Label::Trustworthy
        } else {
            Label::Untrustworthy
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Untrustworthy => Label::Trustworthy,
            Label::Trustworthy => Label::Untrustworthy,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Untrustworthy => "untrustworthy",
            Label::Trustworthy => "trustworthy",
        })
    }
}

impl FromStr for Label {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "trustworthy" => Ok(Label::Trustworthy),
            "0" | "untrustworthy" => Ok(Label::Untrustworthy),
            other => Err(DatasetError::Format(format!("unknown label `{other}`"))),
        }
    }
}

/// Which features are clipped, and at which percentiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub clip_low: f64,
    pub clip_high: f64,
    /// Per feature: `true` when the feature has no natural upper bound and is
    /// percentile-clipped before normalization.
    pub unbounded: [bool; FEATURE_COUNT],
}

impl Default for FeatureSchema {
    fn default() -> Self {
        let mut unbounded = [false; FEATURE_COUNT];
        for name in [
            "followers_count",
            "friends_count",
            "statuses_count",
            "listed_count",
            "total_tweets",
            "positive_count",
            "neutral_count",
            "negative_count",
            "social_reputation",
            "retweet_hindex_plus_like_hindex",
            "influence_score",
        ] {
            unbounded[feature_index(name).unwrap()] = true;
        }
        FeatureSchema { clip_low: 1.0, clip_high: 99.0, unbounded }
    }
}

impl FeatureSchema {
    pub fn with_clip(mut self, low: f64, high: f64) -> Self {
        self.clip_low = low;
        self.clip_high = high;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub user_id: String,
    pub values: Features,
    pub label: Option<Label>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("empty feature matrix")]
    EmptyMatrix,
    #[error("invalid percentiles ({low}, {high}); need 0 <= low < high <= 100")]
    InvalidPercentiles { low: f64, high: f64 },
    #[error("no user record for scorecard `{0}`")]
    MissingUser(String),
    #[error("labeled id `{0}` is not in the dataset")]
    UnknownLabeledId(String),
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidTestFraction(f64),
    #[error("split of {labeled} labeled rows at test fraction {fraction} leaves an empty partition")]
    EmptyPartition { labeled: usize, fraction: f64 },
    #[error("duplicate user_id `{0}`")]
    DuplicateId(String),
    #[error("dataset format error: {0}")]
    Format(String),
    #[error("dataset version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Raw (unnormalized) feature row for one scored account.
pub fn raw_features(card: &ScoreCard, user: &UserRecord) -> Features {
    let b = &card.basic;
    [
        user.followers_count as f64,
        user.friends_count as f64,
        user.statuses_count as f64,
        user.listed_count as f64,
        b.total_tweets as f64,
        b.retweet_ratio,
        b.liked_ratio,
        b.url_ratio,
        b.hashtag_ratio,
        b.mention_ratio,
        b.original_content_ratio,
        card.counts.positive as f64,
        card.counts.neutral as f64,
        card.counts.negative as f64,
        card.sentiment_score,
        card.tweet_credibility,
        card.social_reputation,
        (card.retweet_hindex + card.like_hindex) as f64,
        card.influence_score,
    ]
}

/// One unnormalized, unlabeled vector per scorecard, in scorecard order.
pub fn assemble(cards: &[ScoreCard], users: &[UserRecord]) -> Result<Vec<FeatureVector>, DatasetError> {
    let by_id: HashMap<&str, &UserRecord> = users.iter().map(|u| (u.user_id.as_str(), u)).collect();
    cards
        .iter()
        .map(|card| {
            let user =
                by_id.get(card.user_id.as_str()).ok_or_else(|| DatasetError::MissingUser(card.user_id.clone()))?;
            Ok(FeatureVector { user_id: card.user_id.clone(), values: raw_features(card, user), label: None })
        })
        .collect()
}

/// Assembled vectors through clip + normalize + split in one call.
pub fn build_split_dataset(
    raw: Vec<FeatureVector>,
    labels: &[(String, Label)],
    schema: &FeatureSchema,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitDataset, DatasetError> {
    let matrix: Vec<Features> = raw.iter().map(|v| v.values).collect();
    let (normalized, params) = fit_transform(&matrix, schema)?;
    let vectors = raw.into_iter().zip(normalized).map(|(v, values)| FeatureVector { values, ..v }).collect();
    split(vectors, labels, test_fraction, seed, params)
}
