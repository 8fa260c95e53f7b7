use trustscore_core::active::{CurvePoint, Session, SessionConfig, Strategy};
use trustscore_core::experiment::{prepare, run_curve, SyntheticSetup};
use trustscore_core::LearnerKind;

/// Labels needed before the curve first reaches `target`; runs that never
/// reach it are charged one batch past their final budget.
fn budget(curve: &[CurvePoint], target: f64, batch: usize) -> usize {
    curve
        .iter()
        .find(|p| p.accuracy >= target)
        .map(|p| p.labeled_count)
        .unwrap_or_else(|| curve.last().unwrap().labeled_count + batch)
}

fn config(learner: LearnerKind, strategy: Strategy, seed: u64) -> SessionConfig {
    SessionConfig { learner, strategy, batch_size: 20, max_iterations: 20, patience: 0, seed, ..Default::default() }
}

#[test]
fn informed_strategies_need_no_more_labels_than_random() {
    let batch = 20;
    let target = 0.93;
    let mut budgets = [0usize; 4];
    for seed in 0..10u64 {
        let setup = SyntheticSetup { n_users: 2000, seed_labels: 60, test_size: 400, noise: 0.0, seed: 100 + seed };
        let prepared = prepare(&setup).unwrap();
        for (i, strategy) in Strategy::ALL.into_iter().enumerate() {
            let curve =
                run_curve(&prepared.dataset, &prepared.oracle, config(LearnerKind::Forest, strategy, seed)).unwrap();
            budgets[i] += budget(&curve, target, batch);
        }
    }
    let mean: Vec<f64> = budgets.iter().map(|b| *b as f64 / 10.0).collect();
    let random = mean[3];
    for (strategy, m) in Strategy::ALL.iter().zip(&mean).take(3) {
        assert!(*m <= random + batch as f64, "{strategy}: {m} labels vs random {random}");
    }
}

#[test]
fn zero_noise_sessions_reach_high_accuracy() {
    let setup = SyntheticSetup { n_users: 2000, seed_labels: 100, test_size: 400, noise: 0.0, seed: 9 };
    let prepared = prepare(&setup).unwrap();
    for learner in [LearnerKind::Forest, LearnerKind::Svm] {
        let curve = run_curve(&prepared.dataset, &prepared.oracle, config(learner, Strategy::Entropy, 1)).unwrap();
        let best = curve.iter().map(|p| p.accuracy).fold(0.0, f64::max);
        assert!(best >= 0.95, "{learner}: {best}");
    }
}

#[test]
fn identical_configs_give_identical_histories() {
    let setup = SyntheticSetup { n_users: 800, seed_labels: 40, test_size: 100, noise: 0.05, seed: 2 };
    let prepared = prepare(&setup).unwrap();
    for learner in [LearnerKind::Forest, LearnerKind::Svm] {
        for strategy in Strategy::ALL {
            let a = run_curve(&prepared.dataset, &prepared.oracle, config(learner, strategy, 4)).unwrap();
            let b = run_curve(&prepared.dataset, &prepared.oracle, config(learner, strategy, 4)).unwrap();
            assert_eq!(a, b, "{learner} {strategy}");
        }
    }
}

#[test]
fn accuracy_is_measured_on_the_test_set_only() {
    let setup = SyntheticSetup { n_users: 600, seed_labels: 40, test_size: 100, noise: 0.0, seed: 6 };
    let prepared = prepare(&setup).unwrap();
    let mut session = Session::new(&prepared.dataset, config(LearnerKind::Forest, Strategy::Margin, 0)).unwrap();
    session.start().unwrap();
    for _ in 0..3 {
        session.al_step(&prepared.oracle).unwrap();
        let model = session.model().unwrap();
        let test = &prepared.dataset.test_labeled;
        let hits = test.iter().filter(|v| Some(model.predict(&v.values)) == v.label).count();
        assert_eq!(session.history().last().unwrap().accuracy, hits as f64 / test.len() as f64);
    }
}
