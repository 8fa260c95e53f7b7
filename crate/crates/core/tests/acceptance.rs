//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion not listed as a known deviation fails.
//!
//! Run with `cargo test -p trustscore-core --test acceptance`.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use trustscore_core::active::{top_k, CurvePoint, Oracle, Session, SessionConfig, Strategy};
use trustscore_core::dataset::{
    build_split_dataset, load_dataset, save_dataset, FeatureSchema, FeatureVector, Label, SplitDataset,
};
use trustscore_core::experiment::{prepare, run_curve, SyntheticSetup};
use trustscore_core::learn::{self, LearnerConfig, LearnerKind, LearnerModel};
use trustscore_core::scoring::{h_index, influence_score, score_user, social_reputation, tweet_credibility};
use trustscore_core::sentiment::sentiment_score;
use trustscore_core::{seed, BasicFeatures, Lexicon, ProbEstimate, SentimentCounts};

struct Report {
    failures: Vec<String>,
    known: Vec<String>,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: String) {
        emit(&format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
        if !pass {
            self.failures.push(name.to_string());
        }
    }

    /// A failing criterion whose cause is understood and recorded.
    fn known_deviation(&mut self, name: &str, pass: bool, detail: String) {
        emit(&format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL (known deviation)" }));
        if !pass {
            self.known.push(name.to_string());
        }
    }
}

// Test output capture only intercepts the print macros; write directly so
// the report is visible without --nocapture.
fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn main() {
    let mut report = Report { failures: Vec::new(), known: Vec::new() };
    emit("acceptance suite");
    h_index_equivalence(&mut report);
    formula_fixtures(&mut report);
    reported_accuracies(&mut report);
    strategy_degeneracy(&mut report);
    pipeline_invariants(&mut report);
    learner_sanity(&mut report);
    session_conservation(&mut report);
    emit(&format!("summary: {} failed, {} known deviations", report.failures.len(), report.known.len()));
    if !report.failures.is_empty() {
        std::process::exit(1);
    }
}

fn h_index_equivalence(report: &mut Report) {
    let mut rng = seed::rng(2024, 1);
    let cases: Vec<Vec<u64>> = (0..1000)
        .map(|_| {
            let len = rng.random_range(0..=200);
            let cap = *[10u64, 200, 10_000].get(rng.random_range(0..3)).unwrap();
            (0..len).map(|_| rng.random_range(0..=cap)).collect()
        })
        .collect();
    let start = Instant::now();
    let mismatches = cases.iter().filter(|xs| h_index(xs) != common::h_index_oracle(xs)).count();
    let elapsed = start.elapsed();
    report.line(
        "h-index oracle equivalence",
        mismatches == 0 && elapsed.as_secs_f64() < 1.0,
        format!("1000 vectors, {mismatches} mismatches, {:.3} s", elapsed.as_secs_f64()),
    );
}

fn formula_fixtures(report: &mut Report) {
    let rs = social_reputation(100, 10, 50);
    let rs_expected = 2.0 * 101f64.ln() + 51f64.ln() - 11f64.ln();
    let basic = BasicFeatures {
        total_tweets: 10,
        retweet_ratio: 0.4,
        liked_ratio: 0.6,
        url_ratio: 0.2,
        hashtag_ratio: 0.2,
        mention_ratio: 0.0,
        original_content_ratio: 0.5,
    };
    let cr = tweet_credibility(&basic);
    let cs = sentiment_score(SentimentCounts { positive: 6, neutral: 3, negative: 1 });
    let literal = influence_score(0.9, 0.175, 10.7642, 3, 5);
    let ok = (rs - rs_expected).abs() <= 1e-9 && cr == 0.175 && cs == 0.9 && (literal - 3.96784).abs() <= 1e-9;
    report.line(
        "formula fixtures",
        ok,
        format!(
            "social_reputation={rs:.12} (expected {rs_expected:.12}), tweet_credibility={cr}, \
             sentiment_score={cs}, influence(0.9,0.175,10.7642,3,5)={literal:.9}"
        ),
    );

    let (user, tweets) = common::worked_example();
    let card = score_user(&user, &tweets, &Lexicon::builtin());
    let exact = common::worked_example_influence();
    let composed_ok = (card.influence_score - exact).abs() <= 1e-12;
    report.line(
        "worked example composes end to end",
        composed_ok,
        format!(
            "scored influence {:.12}, exact composition {exact:.12}, h=({}, {}), credibility {}, sentiment {}",
            card.influence_score, card.retweet_hindex, card.like_hindex, card.tweet_credibility, card.sentiment_score
        ),
    );
    let gap = (card.influence_score - 3.96784).abs();
    report.known_deviation(
        "worked example influence = 3.96784 within 1e-9",
        gap <= 1e-9,
        format!(
            "exact value {:.10} differs by {gap:.2e}; 3.96784 comes from rounding social reputation to 10.7642",
            card.influence_score
        ),
    );
}

fn reported_accuracies(report: &mut Report) {
    emit(
        "INFO published accuracies not reproducible: uncertainty 97.6% forest / 96.8% svm, margin 97.6% / 96.2%, \
         entropy 98.4% / 97% were measured on a 50,000-account labeled crawl that is not available; \
         the synthetic substitute below stands in",
    );
    let start = Instant::now();
    let mut entropy_final = Vec::new();
    let mut random_final = Vec::new();
    for s in 0..10u64 {
        let setup = SyntheticSetup { n_users: 5000, seed_labels: 100, test_size: 500, noise: 0.05, seed: s };
        let prepared = prepare(&setup).expect("synthetic dataset");
        for (strategy, sink) in [(Strategy::Entropy, &mut entropy_final), (Strategy::Random, &mut random_final)] {
            let config = SessionConfig {
                learner: LearnerKind::Forest,
                strategy,
                batch_size: 20,
                max_iterations: 25,
                patience: 0,
                seed: s,
                ..Default::default()
            };
            let curve = run_curve(&prepared.dataset, &prepared.oracle, config).expect("session runs");
            assert_eq!(curve.len(), 26);
            sink.push(curve.last().unwrap().accuracy);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (e, r) = (mean(&entropy_final), mean(&random_final));
    report.line(
        "synthetic substitute: forest+entropy",
        e >= 0.90 && e >= r - 0.01 && elapsed < 120.0,
        format!("10-seed mean final accuracy entropy {e:.4}, random {r:.4}, {elapsed:.1} s"),
    );
}

fn strategy_degeneracy(report: &mut Report) {
    let mut rng = seed::rng(7, 2);
    let mut disagreements = 0;
    for _ in 0..1000 {
        let mut distances = HashSet::new();
        let mut candidates = Vec::new();
        while candidates.len() < 200 {
            let p: f64 = rng.random();
            if distances.insert(((p - 0.5).abs()).to_bits()) {
                candidates.push((format!("c{:03}", candidates.len()), ProbEstimate::new(p)));
            }
        }
        for k in [1, 10, 100] {
            let sets: Vec<BTreeSet<String>> = [Strategy::Uncertainty, Strategy::Margin, Strategy::Entropy]
                .iter()
                .map(|s| top_k(*s, &candidates, k).into_iter().collect())
                .collect();
            if sets[0] != sets[1] || sets[0] != sets[2] {
                disagreements += 1;
            }
        }
    }
    report.line(
        "binary strategy degeneracy",
        disagreements == 0,
        format!("1000 fixtures x k in {{1, 10, 100}}, {disagreements} disagreeing selections"),
    );
}

fn pipeline_invariants(report: &mut Report) {
    let mut rng = seed::rng(11, 3);
    let heavy = LogNormal::new(3.0, 2.0).unwrap();
    let raw: Vec<FeatureVector> = (0..50_000)
        .map(|i| FeatureVector {
            user_id: format!("p{i:05}"),
            values: std::array::from_fn(|j| if j % 3 == 0 { rng.random() } else { heavy.sample(&mut rng) }),
            label: None,
        })
        .collect();
    let labels: Vec<(String, Label)> =
        (0..1000).map(|i| (format!("p{:05}", i * 50), Label::from_bool(i % 3 == 0))).collect();
    let dataset = build_split_dataset(raw, &labels, &FeatureSchema::default(), 0.2, 5).expect("split");
    let in_range = dataset.iter().all(|v| v.values.iter().all(|x| (0.0..=1.0).contains(x)));
    let sizes = (dataset.train_labeled.len(), dataset.test_labeled.len(), dataset.pool_unlabeled.len());

    let ids: Vec<&str> = dataset.iter().map(|v| v.user_id.as_str()).collect();
    let unique: HashSet<&str> = ids.iter().copied().collect();
    let disjoint_exhaustive = ids.len() == 50_000 && unique.len() == 50_000;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.csv");
    save_dataset(&dataset, &path).unwrap();
    let loaded: SplitDataset = load_dataset(&path).unwrap();
    let round_trip = loaded == dataset;

    report.line(
        "pipeline invariants",
        in_range && sizes == (800, 200, 49_000) && disjoint_exhaustive && round_trip,
        format!(
            "values in [0,1]: {in_range}, train/test/pool = {}/{}/{}, disjoint+exhaustive: {disjoint_exhaustive}, \
             save/load identical: {round_trip}",
            sizes.0, sizes.1, sizes.2
        ),
    );
}

fn learner_sanity(report: &mut Report) {
    let setup = SyntheticSetup { n_users: 1000, seed_labels: 800, test_size: 200, noise: 0.0, seed: 42 };
    let prepared = prepare(&setup).expect("synthetic dataset");
    let ds = &prepared.dataset;
    let rows: Vec<&[f64]> = ds.train_labeled.iter().map(|v| &v.values[..]).collect();
    let labels: Vec<Label> = ds.train_labeled.iter().map(|v| v.label.unwrap()).collect();
    let config = LearnerConfig::default();
    let mut details = Vec::new();
    let mut ok = true;
    for kind in [LearnerKind::Forest, LearnerKind::Svm] {
        let model = learn::train(kind, &rows, &labels, &config, 9).unwrap();
        let again = learn::train(kind, &rows, &labels, &config, 9).unwrap();
        let predictions: Vec<Label> = ds.test_labeled.iter().map(|v| model.predict(&v.values)).collect();
        let truth: Vec<Label> = ds.test_labeled.iter().map(|v| v.label.unwrap()).collect();
        let acc = learn::accuracy(&predictions, &truth).unwrap();
        let snapshot = model.to_snapshot();
        let identical = snapshot == again.to_snapshot();
        let restored = LearnerModel::from_snapshot(&snapshot).map(|m| m == model).unwrap_or(false);
        ok &= acc >= 0.95 && identical && restored;
        details.push(format!("{kind} held-out {acc:.3}, snapshots identical {identical}, restore exact {restored}"));
    }
    report.line("learner sanity", ok, details.join("; "));
}

fn session_conservation(report: &mut Report) {
    let setup = SyntheticSetup { n_users: 1500, seed_labels: 50, test_size: 200, noise: 0.05, seed: 8 };
    let prepared = prepare(&setup).expect("synthetic dataset");
    let run = |oracle: &Oracle| -> (Vec<CurvePoint>, bool, bool) {
        let config = SessionConfig { batch_size: 25, max_iterations: 10, patience: 0, seed: 3, ..Default::default() };
        let mut session = Session::new(&prepared.dataset, config).unwrap();
        let total = session.instance_count();
        let mut conserved = true;
        let mut seen = HashSet::new();
        let mut fresh = true;
        session.start().unwrap();
        for _ in 0..10 {
            let step = session.al_step(oracle).unwrap();
            conserved &= session.instance_count() == total && session.pending().is_empty();
            for id in step.labeled {
                fresh &= seen.insert(id);
            }
        }
        let train: HashSet<&str> = session.state().train.iter().map(|(id, _)| id.as_str()).collect();
        conserved &= train.len() == session.state().train.len();
        conserved &= session.state().pool.iter().all(|id| !train.contains(id.as_str()));
        (session.history().to_vec(), conserved, fresh)
    };
    let (first, conserved, fresh) = run(&prepared.oracle);
    let (second, _, _) = run(&prepared.oracle);
    let increasing = first.windows(2).all(|w| w[1].labeled_count > w[0].labeled_count);
    report.line(
        "session conservation",
        conserved && fresh && first == second && first.len() == 11 && increasing,
        format!(
            "10 steps: partitions conserved {conserved}, no relabeling {fresh}, history reproducible {}, \
             final accuracy {:.3}",
            first == second,
            first.last().unwrap().accuracy
        ),
    );
}
