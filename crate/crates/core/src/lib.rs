//! Account trust scoring and human-in-the-loop active learning.
//!
//! The pipeline runs in stages:
//!
//! 1. [`model`] ingests archived user and tweet records into a [`Corpus`].
//! 2. [`features`], [`sentiment`] and [`scoring`] turn each account into a
//!    [`ScoreCard`] whose headline number is the influence score.
//! 3. [`dataset`] assembles 19-feature vectors, clips and min-max normalizes
//!    them, and splits them into labeled train/test sets and an unlabeled pool.
//! 4. [`learn`] provides a random forest and a calibrated linear SVM.
//! 5. [`active`] drives pool-based active learning with uncertainty, margin
//!    and entropy sampling against a simulated or human oracle.

pub mod active;
pub mod dataset;
pub mod experiment;
pub mod features;
pub mod learn;
pub mod model;
pub mod scoring;
pub mod seed;
pub mod sentiment;

pub use active::{Oracle, Session, SessionConfig, Strategy};
pub use dataset::{FeatureVector, Features, Label, SplitDataset, FEATURE_COUNT, FEATURE_NAMES};
pub use features::BasicFeatures;
pub use learn::{LearnerKind, LearnerModel, ProbEstimate};
pub use model::{Corpus, TweetRecord, UserRecord};
pub use scoring::ScoreCard;
pub use sentiment::{Lexicon, SentimentCounts};
