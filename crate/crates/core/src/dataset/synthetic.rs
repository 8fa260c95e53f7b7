//! Seeded synthetic corpora with known ground-truth labels.
//!
//! Each generated account has a latent quality in `[0, 1]` that raises its
//! chance of original, engaging, positive tweets. Labels come from a linear
//! threshold rule over the account's raw feature vector, optionally flipped
//! with a fixed per-account probability.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, LogNormal};
use serde::{Deserialize, Serialize};

use super::{feature_index, raw_features, Features, Label, NormalizationParams, FEATURE_COUNT};
use crate::model::{build_corpus, Corpus, TweetRecord, UserRecord};
use crate::scoring::score_user;
use crate::seed;
use crate::sentiment::Lexicon;

/// `weights · x > threshold` over a 19-feature row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRule {
    pub weights: Vec<f64>,
    pub threshold: f64,
}

impl LinearRule {
    pub fn score(&self, x: &Features) -> f64 {
        self.weights.iter().zip(x.iter()).map(|(w, v)| w * v).sum()
    }

    pub fn fires(&self, x: &Features) -> bool {
        self.score(x) > self.threshold
    }

    /// The same rule expressed over min-max scaled rows. Exact for features
    /// that are not clipped; weights on clipped features see the clipped
    /// values instead of the raw ones.
    pub fn in_normalized_space(&self, params: &NormalizationParams) -> LinearRule {
        let mut threshold = self.threshold;
        let weights = self
            .weights
            .iter()
            .zip(&params.features)
            .map(|(w, p)| {
                threshold -= w * p.min;
                w * (p.max - p.min)
            })
            .collect();
        LinearRule { weights, threshold }
    }
}

impl Default for LinearRule {
    /// Trustworthy when `2 * tweet_credibility + sentiment_score > 1.15`.
    fn default() -> Self {
        let mut weights = vec![0.0; FEATURE_COUNT];
        weights[feature_index("tweet_credibility").unwrap()] = 2.0;
        weights[feature_index("sentiment_score").unwrap()] = 1.0;
        LinearRule { weights, threshold: 1.15 }
    }
}

/// Ground-truth rule plus label noise. The noise flip for an account depends
/// only on `(seed, user_id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub rule: LinearRule,
    pub noise: f64,
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams { rule: LinearRule::default(), noise: 0.0, seed: 0 }
    }
}

pub fn label_with_noise(rule_fires: bool, user_id: &str, noise: f64, seed: u64) -> Label {
    let label = Label::from_bool(rule_fires);
    if noise > 0.0 && seed::unit_draw(seed, user_id) < noise {
        label.flipped()
    } else {
        label
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub oracle: OracleParams,
    pub min_tweets: usize,
    pub max_tweets: usize,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams { oracle: OracleParams::default(), min_tweets: 5, max_tweets: 40 }
    }
}

const FILLER: [&str; 20] = [
    "today", "policy", "meeting", "the", "vote", "city", "budget", "plan", "team", "office", "update", "morning",
    "report", "people", "bill", "week", "local", "council", "school", "road",
];

/// Generates `n_users` eligible accounts with tweets, and their labels.
pub fn generate_synthetic(n_users: usize, rng_seed: u64, params: &SyntheticParams) -> (Corpus, Vec<(String, Label)>) {
    let lexicon = Lexicon::builtin();
    let positive = lexicon.tokens_with_sign(true);
    let negative = lexicon.tokens_with_sign(false);
    let mut rng = seed::rng(rng_seed, 0x5717);

    let mut users = Vec::with_capacity(n_users);
    let mut tweets = Vec::new();
    let mut next_tweet = 0usize;
    for i in 0..n_users {
        let quality: f64 = rng.random();
        let user = UserRecord {
            user_id: format!("u{i:06}"),
            screen_name: format!("account_{i}"),
            followers_count: lognormal(&mut rng, 4.0 + 3.0 * quality, 1.2).max(1),
            friends_count: lognormal(&mut rng, 5.0, 1.0).max(1),
            statuses_count: lognormal(&mut rng, 7.0, 1.5),
            listed_count: lognormal(&mut rng, 1.0 + 2.0 * quality, 1.0),
            is_protected: false,
        };
        let reach = 1.0 + (1.0 + user.followers_count as f64).ln() / 2.0;
        let n_tweets = rng.random_range(params.min_tweets..=params.max_tweets.max(params.min_tweets));
        for _ in 0..n_tweets {
            let repost = rng.random_bool(0.6 - 0.5 * quality);
            let mut words: Vec<String> = Vec::new();
            if repost {
                words.push("RT".into());
                words.push(format!("@src{}", rng.random_range(0..500)));
            }
            for _ in 0..rng.random_range(3..7) {
                words.push(FILLER.choose(&mut rng).unwrap().to_string());
            }
            let draw: f64 = rng.random();
            if draw < 0.15 + 0.5 * quality {
                words.push(positive.choose(&mut rng).unwrap().to_string());
            } else if draw > 0.65 + 0.3 * quality {
                words.push(negative.choose(&mut rng).unwrap().to_string());
            }
            if rng.random_bool(0.15 + 0.35 * quality) {
                words.push(format!("https://t.co/{:08x}", rng.random::<u32>()));
            }
            if rng.random_bool(0.1 + 0.4 * quality) {
                words.push(format!("#topic{}", rng.random_range(0..50)));
            }
            if rng.random_bool(0.3) {
                words.push(format!("@user{}", rng.random_range(0..1000)));
            }
            let retweets = if rng.random_bool(0.15 + 0.6 * quality) {
                engagement(&mut rng, reach * (1.0 + 4.0 * quality))
            } else {
                0
            };
            let likes = if rng.random_bool(0.25 + 0.6 * quality) {
                engagement(&mut rng, 2.0 * reach * (1.0 + 4.0 * quality))
            } else {
                0
            };
            tweets.push(TweetRecord::from_text(
                format!("t{next_tweet:08}"),
                user.user_id.clone(),
                words.join(" "),
                retweets,
                likes,
                repost,
            ));
            next_tweet += 1;
        }
        users.push(user);
    }
    let corpus = build_corpus(users, tweets).expect("generated corpus is consistent");
    let oracle = &params.oracle;
    let labels = corpus
        .iter()
        .map(|(user, tweets)| {
            let card = score_user(user, tweets, &lexicon);
            let fires = oracle.rule.fires(&raw_features(&card, user));
            (user.user_id.clone(), label_with_noise(fires, &user.user_id, oracle.noise, oracle.seed))
        })
        .collect();
    (corpus, labels)
}

fn lognormal(rng: &mut impl Rng, mu: f64, sigma: f64) -> u64 {
    LogNormal::new(mu, sigma).expect("valid lognormal").sample(rng).round() as u64
}

fn engagement(rng: &mut impl Rng, scale: f64) -> u64 {
    let e: f64 = Exp1.sample(rng);
    1 + (e * scale).floor() as u64
}
