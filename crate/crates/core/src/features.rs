//! Per-user tweet ratio features.
//!
//! Every ratio counts the tweets that qualify (at least one retweet, at least
//! one like, at least one URL, ...) and divides by the number of tweets, so
//! each value lies in `[0, 1]`. An empty tweet list yields zero for all ratios.

use serde::{Deserialize, Serialize};

use crate::model::TweetRecord;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BasicFeatures {
    pub total_tweets: usize,
    pub retweet_ratio: f64,
    pub liked_ratio: f64,
    pub url_ratio: f64,
    pub hashtag_ratio: f64,
    pub mention_ratio: f64,
    pub original_content_ratio: f64,
}

fn fraction(tweets: &[TweetRecord], qualifies: impl Fn(&TweetRecord) -> bool) -> f64 {
    if tweets.is_empty() {
        return 0.0;
    }
    let hits = tweets.iter().filter(|t| qualifies(t)).count();
    hits as f64 / tweets.len() as f64
}

pub fn retweet_ratio(tweets: &[TweetRecord]) -> f64 {
    fraction(tweets, |t| t.retweet_count >= 1)
}

pub fn liked_ratio(tweets: &[TweetRecord]) -> f64 {
    fraction(tweets, |t| t.like_count >= 1)
}

pub fn url_ratio(tweets: &[TweetRecord]) -> f64 {
    fraction(tweets, |t| t.url_count >= 1)
}

pub fn hashtag_ratio(tweets: &[TweetRecord]) -> f64 {
    fraction(tweets, |t| t.hashtag_count >= 1)
}

pub fn mention_ratio(tweets: &[TweetRecord]) -> f64 {
    fraction(tweets, |t| t.mention_count >= 1)
}

/// Share of tweets that are not reposts of another account.
pub fn original_content_ratio(tweets: &[TweetRecord]) -> f64 {
    if tweets.is_empty() {
        return 0.0;
    }
    let reposts = tweets.iter().filter(|t| t.is_retweet_of_other).count();
    (tweets.len() - reposts) as f64 / tweets.len() as f64
}

pub fn basic_features(tweets: &[TweetRecord]) -> BasicFeatures {
    BasicFeatures {
        total_tweets: tweets.len(),
        retweet_ratio: retweet_ratio(tweets),
        liked_ratio: liked_ratio(tweets),
        url_ratio: url_ratio(tweets),
        hashtag_ratio: hashtag_ratio(tweets),
        mention_ratio: mention_ratio(tweets),
        original_content_ratio: original_content_ratio(tweets),
    }
}
