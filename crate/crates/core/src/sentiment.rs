//! Lexicon-based tweet polarity and the per-user sentiment score.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TweetRecord;

const DEFAULT_LEXICON: &str = include_str!("../data/default_lexicon.txt");

#[derive(Debug, Error, PartialEq)]
pub enum LexiconError {
    #[error("line {line}: expected `token weight`")]
    Malformed { line: usize },
    #[error("line {line}: weight {weight} outside [-1, 1]")]
    WeightOutOfRange { line: usize, weight: f64 },
    #[error("`{0}` is declared both as a negator and as a scored token")]
    NegatorConflict(String),
}

/// Token polarity weights plus negator tokens that flip the next scored token.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
    negators: HashSet<String>,
}

impl Lexicon {
    pub fn new(
        entries: impl IntoIterator<Item = (String, f64)>,
        negators: impl IntoIterator<Item = String>,
    ) -> Result<Self, LexiconError> {
        let mut map = HashMap::new();
        for (token, weight) in entries {
            if !(-1.0..=1.0).contains(&weight) {
                return Err(LexiconError::WeightOutOfRange { line: 0, weight });
            }
            map.insert(token.to_lowercase(), weight);
        }
        let negators: HashSet<String> = negators.into_iter().map(|n| n.to_lowercase()).collect();
        if let Some(clash) = negators.iter().find(|n| map.contains_key(*n)) {
            return Err(LexiconError::NegatorConflict(clash.clone()));
        }
        Ok(Lexicon { entries: map, negators })
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        DEFAULT_LEXICON.parse().expect("built-in lexicon is well formed")
    }

    pub fn weight(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Scored tokens with positive (`true`) or negative weight, sorted.
    pub fn tokens_with_sign(&self, positive: bool) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .entries
            .iter()
            .filter(|(_, w)| if positive { **w > 0.0 } else { **w < 0.0 })
            .map(|(t, _)| t.as_str())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Parses the lexicon file format: `token weight` per line, `!token` for a
/// negator, `#` comments and blank lines ignored.
impl FromStr for Lexicon {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut entries = Vec::new();
        let mut negators = Vec::new();
        for (idx, raw) in s.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(neg) = line.strip_prefix('!') {
                let neg = neg.trim();
                if neg.is_empty() || neg.contains(char::is_whitespace) {
                    return Err(LexiconError::Malformed { line: lineno });
                }
                negators.push(neg.to_string());
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(token), Some(weight), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(LexiconError::Malformed { line: lineno });
            };
            let weight: f64 = weight.parse().map_err(|_| LexiconError::Malformed { line: lineno })?;
            if !(-1.0..=1.0).contains(&weight) {
                return Err(LexiconError::WeightOutOfRange { line: lineno, weight });
            }
            entries.push((token.to_string(), weight));
        }
        Lexicon::new(entries, negators)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Neutral,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Neutral => "neutral",
            Polarity::Negative => "negative",
        })
    }
}

fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase)
}

/// Mean weight of the lexicon tokens found in `text`; a token directly after a
/// negator counts with flipped sign. Zero when nothing matches.
pub fn polarity(text: &str, lexicon: &Lexicon) -> f64 {
    let mut sum = 0.0;
    let mut matched = 0usize;
    let mut negate = false;
    for token in tokenize(text) {
        if let Some(w) = lexicon.weight(&token) {
            sum += if negate { -w } else { w };
            matched += 1;
        }
        negate = lexicon.is_negator(&token);
    }
    if matched == 0 {
        0.0
    } else {
        sum / matched as f64
    }
}

pub fn classify_polarity(score: f64) -> Polarity {
    if score > 0.0 {
        Polarity::Positive
    } else if score < 0.0 {
        Polarity::Negative
    } else {
        Polarity::Neutral
    }
}

pub fn classify_tweet(text: &str, lexicon: &Lexicon) -> Polarity {
    classify_polarity(polarity(text, lexicon))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentCounts {
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
}

impl SentimentCounts {
    pub fn total(&self) -> usize {
        self.positive + self.neutral + self.negative
    }
}

pub fn sentiment_counts(tweets: &[TweetRecord], lexicon: &Lexicon) -> SentimentCounts {
    let mut counts = SentimentCounts::default();
    for tweet in tweets {
        match classify_tweet(&tweet.text, lexicon) {
            Polarity::Positive => counts.positive += 1,
            Polarity::Neutral => counts.neutral += 1,
            Polarity::Negative => counts.negative += 1,
        }
    }
    counts
}

/// Share of non-negative tweets. A user with no tweets scores 1.0.
pub fn sentiment_score(counts: SentimentCounts) -> f64 {
    let non_negative = counts.neutral + counts.positive;
    let total = non_negative + counts.negative;
    if total == 0 {
        return 1.0;
    }
    non_negative as f64 / total as f64
}
