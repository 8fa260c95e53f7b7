//! Derived per-user scores and the influence score that averages them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{basic_features, BasicFeatures};
use crate::model::{Corpus, TweetRecord, UserRecord};
use crate::sentiment::{sentiment_counts, sentiment_score, Lexicon, SentimentCounts};

/// All derived scores for one account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub user_id: String,
    pub basic: BasicFeatures,
    pub counts: SentimentCounts,
    pub sentiment_score: f64,
    pub social_reputation: f64,
    pub retweet_hindex: usize,
    pub like_hindex: usize,
    pub tweet_credibility: f64,
    pub influence_score: f64,
}

impl ScoreCard {
    /// The five quantities averaged into the influence score.
    pub fn influence_components(&self) -> [f64; 5] {
        [
            self.sentiment_score,
            self.tweet_credibility,
            self.social_reputation,
            self.retweet_hindex as f64,
            self.like_hindex as f64,
        ]
    }
}

/// `ln((1+followers)^2) + ln(1+statuses) - ln(1+friends)`.
///
/// The follower term is squared, weighting audience size above activity and
/// following.
pub fn social_reputation(followers: u64, friends: u64, statuses: u64) -> f64 {
    let f = followers as f64;
    ((1.0 + f) * (1.0 + f)).ln() + (1.0 + statuses as f64).ln() - (1.0 + friends as f64).ln()
}

/// Engagement h-index: sort descending and walk the list; the first position
/// (1-based) whose value falls below the position ends the run, and the count
/// of positions passed so far is the index. A list that never falls below
/// its position scores its own length.
pub fn h_index(engagements: &[u64]) -> usize {
    let mut sorted = engagements.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    for (idx, &value) in sorted.iter().enumerate() {
        let position = idx + 1;
        if value < position as u64 {
            return idx;
        }
    }
    sorted.len()
}

/// Mean of the retweet, liked, hashtag and URL ratios, scaled by the share
/// of original content.
pub fn tweet_credibility(basic: &BasicFeatures) -> f64 {
    let engagement = (basic.retweet_ratio + basic.liked_ratio + basic.hashtag_ratio + basic.url_ratio) / 4.0;
    engagement * basic.original_content_ratio
}

pub fn influence_score(sentiment: f64, credibility: f64, reputation: f64, retweet_h: usize, like_h: usize) -> f64 {
    (sentiment + credibility + reputation + retweet_h as f64 + like_h as f64) / 5.0
}

pub fn score_user(user: &UserRecord, tweets: &[TweetRecord], lexicon: &Lexicon) -> ScoreCard {
    let basic = basic_features(tweets);
    let counts = sentiment_counts(tweets, lexicon);
    let sentiment = sentiment_score(counts);
    let reputation = social_reputation(user.followers_count, user.friends_count, user.statuses_count);
    let retweets: Vec<u64> = tweets.iter().map(|t| t.retweet_count).collect();
    let likes: Vec<u64> = tweets.iter().map(|t| t.like_count).collect();
    let retweet_hindex = h_index(&retweets);
    let like_hindex = h_index(&likes);
    let credibility = tweet_credibility(&basic);
    ScoreCard {
        user_id: user.user_id.clone(),
        basic,
        counts,
        sentiment_score: sentiment,
        social_reputation: reputation,
        retweet_hindex,
        like_hindex,
        tweet_credibility: credibility,
        influence_score: influence_score(sentiment, credibility, reputation, retweet_hindex, like_hindex),
    }
}

/// Scores every account of a corpus, in corpus order.
pub fn score_corpus(corpus: &Corpus, lexicon: &Lexicon) -> Vec<ScoreCard> {
    corpus.users().par_iter().map(|u| score_user(u, corpus.tweets_of(&u.user_id), lexicon)).collect()
}
