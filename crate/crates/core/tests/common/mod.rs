#![allow(dead_code)]

use trustscore_core::{TweetRecord, UserRecord};

/// Account with hand-checkable scores: retweet ratio 0.4, like ratio 0.6,
/// URL and hashtag ratios 0.2, half reposts, six positive, three neutral and
/// one negative tweet, retweet h-index 3 and like h-index 5.
pub fn worked_example() -> (UserRecord, Vec<TweetRecord>) {
    let user = UserRecord {
        user_id: "worked".into(),
        screen_name: "worked_example".into(),
        followers_count: 100,
        friends_count: 10,
        statuses_count: 50,
        listed_count: 2,
        is_protected: false,
    };
    let rows: [(&str, u64, u64, bool); 10] = [
        ("great day with the team", 5, 9, false),
        ("good news for the city #budget", 4, 8, false),
        ("happy to announce https://t.co/abc", 3, 7, false),
        ("love this plan", 1, 6, false),
        ("excellent meeting today", 0, 5, false),
        ("RT @src1 wonderful report #local", 0, 1, true),
        ("RT @src2 the council meets https://t.co/def", 0, 0, true),
        ("RT @src3 weekly update", 0, 0, true),
        ("RT @src4 road works on monday", 0, 0, true),
        ("RT @src5 terrible traffic", 0, 0, true),
    ];
    let tweets = rows
        .iter()
        .enumerate()
        .map(|(i, (text, rt, likes, repost))| {
            TweetRecord::from_text(format!("w{i}"), "worked", *text, *rt, *likes, *repost)
        })
        .collect();
    (user, tweets)
}

/// Influence of the worked example, composed from exact component values.
pub fn worked_example_influence() -> f64 {
    let reputation = 2.0 * 101f64.ln() + 51f64.ln() - 11f64.ln();
    (0.9 + 0.175 + reputation + 3.0 + 5.0) / 5.0
}

/// Largest `h` such that at least `h` entries are `>= h`, by exhaustive search.
pub fn h_index_oracle(xs: &[u64]) -> usize {
    (0..=xs.len()).rev().find(|&h| xs.iter().filter(|&&x| x >= h as u64).count() >= h).unwrap_or(0)
}
