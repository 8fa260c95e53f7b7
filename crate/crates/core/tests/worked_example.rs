mod common;

use trustscore_core::dataset::{assemble, feature_index, raw_features};
use trustscore_core::scoring::{h_index, score_user};
use trustscore_core::Lexicon;

#[test]
fn worked_example_components() {
    let (user, tweets) = common::worked_example();
    let card = score_user(&user, &tweets, &Lexicon::builtin());
    let b = &card.basic;
    assert_eq!(b.total_tweets, 10);
    assert_eq!(
        (b.retweet_ratio, b.liked_ratio, b.url_ratio, b.hashtag_ratio, b.original_content_ratio),
        (0.4, 0.6, 0.2, 0.2, 0.5)
    );
    assert_eq!((card.counts.positive, card.counts.neutral, card.counts.negative), (6, 3, 1));
    assert_eq!(card.sentiment_score, 0.9);
    assert_eq!(card.tweet_credibility, 0.175);
    assert_eq!((card.retweet_hindex, card.like_hindex), (3, 5));
    assert!((card.social_reputation - 10.7642).abs() < 1e-4);
    assert!((card.influence_score - common::worked_example_influence()).abs() < 1e-12);
    let mean = card.influence_components().iter().sum::<f64>() / 5.0;
    assert_eq!(card.influence_score, mean);
}

#[test]
fn influence_is_last_feature() {
    let (user, tweets) = common::worked_example();
    let card = score_user(&user, &tweets, &Lexicon::builtin());
    let row = raw_features(&card, &user);
    assert_eq!(row[18], card.influence_score);
    assert_eq!(feature_index("influence_score"), Some(18));
    let vectors = assemble(std::slice::from_ref(&card), &[user]).unwrap();
    assert_eq!(vectors[0].values, row);
    assert_eq!(vectors[0].user_id, "worked");
}

#[test]
fn h_index_spec_examples() {
    assert_eq!(h_index(&[5, 4, 3, 2, 1]), 3);
    assert_eq!(h_index(&[]), 0);
    assert_eq!(h_index(&[0, 0, 0]), 0);
    assert_eq!(h_index(&[100]), 1);
    assert_eq!(h_index(&[3, 3, 3]), 3);
    for xs in [vec![5u64, 4, 3, 2, 1], vec![10, 8, 5, 4, 3], vec![25, 8, 5, 3, 3], vec![1, 1, 1, 1]] {
        assert_eq!(h_index(&xs), common::h_index_oracle(&xs), "{xs:?}");
    }
}
