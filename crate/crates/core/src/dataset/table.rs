//! CSV tables exchanged between pipeline stages: scorecards and label lists.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{DatasetError, Label};
use crate::features::BasicFeatures;
use crate::model::UserRecord;
use crate::scoring::ScoreCard;
use crate::sentiment::SentimentCounts;

pub const SCORECARD_COLUMNS: [&str; 22] = [
    "user_id",
    "screen_name",
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
    "social_reputation",
    "retweet_hindex",
    "like_hindex",
    "tweet_credibility",
    "influence_score",
];

/// One scorecard row, flattened with the account counts it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub user_id: String,
    pub screen_name: String,
    pub followers_count: u64,
    pub friends_count: u64,
    pub statuses_count: u64,
    pub listed_count: u64,
    pub total_tweets: usize,
    pub retweet_ratio: f64,
    pub liked_ratio: f64,
    pub url_ratio: f64,
    pub hashtag_ratio: f64,
    pub mention_ratio: f64,
    pub original_content_ratio: f64,
    pub positive_count: usize,
    pub neutral_count: usize,
    pub negative_count: usize,
    pub sentiment_score: f64,
    pub social_reputation: f64,
    pub retweet_hindex: usize,
    pub like_hindex: usize,
    pub tweet_credibility: f64,
    pub influence_score: f64,
}

impl ScoreRow {
    pub fn new(user: &UserRecord, card: &ScoreCard) -> Self {
        let b = &card.basic;
        ScoreRow {
            user_id: card.user_id.clone(),
            screen_name: user.screen_name.clone(),
            followers_count: user.followers_count,
            friends_count: user.friends_count,
            statuses_count: user.statuses_count,
            listed_count: user.listed_count,
            total_tweets: b.total_tweets,
            retweet_ratio: b.retweet_ratio,
            liked_ratio: b.liked_ratio,
            url_ratio: b.url_ratio,
            hashtag_ratio: b.hashtag_ratio,
            mention_ratio: b.mention_ratio,
            original_content_ratio: b.original_content_ratio,
            positive_count: card.counts.positive,
            neutral_count: card.counts.neutral,
            negative_count: card.counts.negative,
            sentiment_score: card.sentiment_score,
            social_reputation: card.social_reputation,
            retweet_hindex: card.retweet_hindex,
            like_hindex: card.like_hindex,
            tweet_credibility: card.tweet_credibility,
            influence_score: card.influence_score,
        }
    }

    pub fn user(&self) -> UserRecord {
        UserRecord {
            user_id: self.user_id.clone(),
            screen_name: self.screen_name.clone(),
            followers_count: self.followers_count,
            friends_count: self.friends_count,
            statuses_count: self.statuses_count,
            listed_count: self.listed_count,
            is_protected: false,
        }
    }

    pub fn card(&self) -> ScoreCard {
        ScoreCard {
            user_id: self.user_id.clone(),
            basic: BasicFeatures {
                total_tweets: self.total_tweets,
                retweet_ratio: self.retweet_ratio,
                liked_ratio: self.liked_ratio,
                url_ratio: self.url_ratio,
                hashtag_ratio: self.hashtag_ratio,
                mention_ratio: self.mention_ratio,
                original_content_ratio: self.original_content_ratio,
            },
            counts: SentimentCounts {
                positive: self.positive_count,
                neutral: self.neutral_count,
                negative: self.negative_count,
            },
            sentiment_score: self.sentiment_score,
            social_reputation: self.social_reputation,
            retweet_hindex: self.retweet_hindex,
            like_hindex: self.like_hindex,
            tweet_credibility: self.tweet_credibility,
            influence_score: self.influence_score,
        }
    }
}

/// Writes the header even when there are no rows.
pub fn write_scorecards<W: Write>(out: W, rows: &[ScoreRow]) -> Result<(), DatasetError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(SCORECARD_COLUMNS)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_scorecards<R: Read>(input: R) -> Result<Vec<ScoreRow>, DatasetError> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader.deserialize().collect::<Result<Vec<ScoreRow>, _>>()?;
    Ok(rows)
}

/// `user_id,label` with labels as `1`/`0` or `trustworthy`/`untrustworthy`.
pub fn read_labels<R: Read>(input: R) -> Result<Vec<(String, Label)>, DatasetError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let (Some(id), Some(label)) = (record.get(0), record.get(1)) else {
            return Err(DatasetError::Format("labels need `user_id,label` columns".into()));
        };
        labels.push((id.to_string(), label.parse()?));
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(out: W, labels: &[(String, Label)]) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["user_id", "label"])?;
    for (id, label) in labels {
        writer.write_record([id.as_str(), &label.as_index().to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
