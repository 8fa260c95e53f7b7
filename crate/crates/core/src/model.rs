//! Corpus types and ingestion of archived account and tweet records.
//!
//! Archives are JSON Lines: one object per line. Unknown keys are ignored.
//! Tweets may omit `url_count`, `hashtag_count` and `mention_count`, in which
//! case the counts are recovered by scanning the tweet text.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate user_id `{0}`")]
    DuplicateUser(String),
    #[error("duplicate tweet_id `{0}`")]
    DuplicateTweet(String),
    #[error("tweet `{tweet_id}` references unknown author `{author_id}`")]
    DanglingAuthor { tweet_id: String, author_id: String },
    #[error("empty user_id")]
    EmptyUserId,
}

/// A rejected input line. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Records accepted from a stream together with the lines that were rejected.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub screen_name: String,
    pub followers_count: u64,
    pub friends_count: u64,
    pub statuses_count: u64,
    pub listed_count: u64,
    pub is_protected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub text: String,
    pub retweet_count: u64,
    pub like_count: u64,
    pub is_retweet_of_other: bool,
    pub url_count: u64,
    pub hashtag_count: u64,
    pub mention_count: u64,
}

impl TweetRecord {
    /// Builds a tweet, deriving entity counts from the text.
    pub fn from_text(
        tweet_id: impl Into<String>,
        author_id: impl Into<String>,
        text: impl Into<String>,
        retweet_count: u64,
        like_count: u64,
        is_retweet_of_other: bool,
    ) -> Self {
        let text = text.into();
        let entities = EntityCounts::scan(&text);
        TweetRecord {
            tweet_id: tweet_id.into(),
            author_id: author_id.into(),
            text,
            retweet_count,
            like_count,
            is_retweet_of_other,
            url_count: entities.urls,
            hashtag_count: entities.hashtags,
            mention_count: entities.mentions,
        }
    }
}

/// URL, hashtag and mention counts recovered from raw tweet text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EntityCounts {
    pub urls: u64,
    pub hashtags: u64,
    pub mentions: u64,
}

impl EntityCounts {
    pub fn scan(text: &str) -> Self {
        let mut counts = EntityCounts::default();
        for token in text.split_whitespace() {
            if token.starts_with("http://") || token.starts_with("https://") {
                counts.urls += 1;
            } else if token.len() > 1 && token.starts_with('#') {
                counts.hashtags += 1;
            } else if token.len() > 1 && token.starts_with('@') {
                counts.mentions += 1;
            }
        }
        counts
    }
}

#[derive(Deserialize)]
struct RawTweet {
    tweet_id: String,
    author_id: String,
    text: String,
    retweet_count: u64,
    like_count: u64,
    is_retweet_of_other: bool,
    url_count: Option<u64>,
    hashtag_count: Option<u64>,
    mention_count: Option<u64>,
}

impl From<RawTweet> for TweetRecord {
    fn from(raw: RawTweet) -> Self {
        let scanned = if raw.url_count.is_none() || raw.hashtag_count.is_none() || raw.mention_count.is_none() {
            EntityCounts::scan(&raw.text)
        } else {
            EntityCounts::default()
        };
        TweetRecord {
            url_count: raw.url_count.unwrap_or(scanned.urls),
            hashtag_count: raw.hashtag_count.unwrap_or(scanned.hashtags),
            mention_count: raw.mention_count.unwrap_or(scanned.mentions),
            tweet_id: raw.tweet_id,
            author_id: raw.author_id,
            text: raw.text,
            retweet_count: raw.retweet_count,
            like_count: raw.like_count,
            is_retweet_of_other: raw.is_retweet_of_other,
        }
    }
}

fn parse_lines<R, Raw, T>(input: R, validate: impl Fn(&Raw) -> Option<String>) -> Result<Parsed<T>, DataError>
where
    R: BufRead,
    Raw: serde::de::DeserializeOwned + Into<T>,
{
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Raw>(&line) {
            Ok(raw) => match validate(&raw) {
                None => records.push(raw.into()),
                Some(message) => errors.push(LineError { line: idx + 1, message }),
            },
            Err(e) => errors.push(LineError { line: idx + 1, message: e.to_string() }),
        }
    }
    Ok(Parsed { records, errors })
}

/// Reads line-delimited user records. Malformed lines are collected, not fatal;
/// a repeated `user_id` is.
pub fn parse_users<R: BufRead>(input: R) -> Result<Parsed<UserRecord>, DataError> {
    let parsed: Parsed<UserRecord> =
        parse_lines(input, |u: &UserRecord| u.user_id.is_empty().then(|| "empty user_id".to_string()))?;
    let mut seen = HashSet::new();
    for user in &parsed.records {
        if !seen.insert(user.user_id.as_str()) {
            return Err(DataError::DuplicateUser(user.user_id.clone()));
        }
    }
    Ok(parsed)
}

/// Reads line-delimited tweet records.
pub fn parse_tweets<R: BufRead>(input: R) -> Result<Parsed<TweetRecord>, DataError> {
    parse_lines(input, |t: &RawTweet| t.tweet_id.is_empty().then(|| "empty tweet_id".to_string()))
}

/// Users plus their tweets, grouped by author in ingestion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    users: Vec<UserRecord>,
    tweets_by_user: HashMap<String, Vec<TweetRecord>>,
}

impl Corpus {
    pub fn users(&self) -> &[UserRecord] {
        &self.users
    }

    pub fn tweets_of(&self, user_id: &str) -> &[TweetRecord] {
        self.tweets_by_user.get(user_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn user(&self, user_id: &str) -> Option<&UserRecord> {
        self.users.iter().find(|u| u.user_id == user_id)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn tweet_count(&self) -> usize {
        self.tweets_by_user.values().map(Vec::len).sum()
    }

    /// Iterates users with their tweets in user ingestion order.
    pub fn iter(&self) -> impl Iterator<Item = (&UserRecord, &[TweetRecord])> {
        self.users.iter().map(move |u| (u, self.tweets_of(&u.user_id)))
    }
}

/// Assembles a referentially complete corpus. Users without tweets are kept
/// with an empty list.
pub fn build_corpus(users: Vec<UserRecord>, tweets: Vec<TweetRecord>) -> Result<Corpus, DataError> {
    let mut tweets_by_user: HashMap<String, Vec<TweetRecord>> = HashMap::with_capacity(users.len());
    for user in &users {
        if user.user_id.is_empty() {
            return Err(DataError::EmptyUserId);
        }
        if tweets_by_user.insert(user.user_id.clone(), Vec::new()).is_some() {
            return Err(DataError::DuplicateUser(user.user_id.clone()));
        }
    }
    let mut tweet_ids = HashSet::with_capacity(tweets.len());
    for tweet in tweets {
        if !tweet_ids.insert(tweet.tweet_id.clone()) {
            return Err(DataError::DuplicateTweet(tweet.tweet_id));
        }
        match tweets_by_user.get_mut(&tweet.author_id) {
            Some(list) => list.push(tweet),
            None => return Err(DataError::DanglingAuthor { tweet_id: tweet.tweet_id, author_id: tweet.author_id }),
        }
    }
    Ok(Corpus { users, tweets_by_user })
}

/// Minimum number of tweets a public account needs to count as active.
pub const DEFAULT_MIN_TWEETS: usize = 1;

/// Keeps public accounts that have both followers and friends and at least
/// [`DEFAULT_MIN_TWEETS`] tweets.
pub fn filter_eligible(corpus: &Corpus) -> Corpus {
    filter_eligible_with(corpus, DEFAULT_MIN_TWEETS)
}

pub fn filter_eligible_with(corpus: &Corpus, min_tweets: usize) -> Corpus {
    let mut users = Vec::new();
    let mut tweets_by_user = HashMap::new();
    for (user, tweets) in corpus.iter() {
        let eligible =
            !user.is_protected && user.followers_count > 0 && user.friends_count > 0 && tweets.len() >= min_tweets;
        if eligible {
            users.push(user.clone());
            tweets_by_user.insert(user.user_id.clone(), tweets.to_vec());
        }
    }
    Corpus { users, tweets_by_user }
}
