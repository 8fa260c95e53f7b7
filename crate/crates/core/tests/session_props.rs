use std::collections::HashSet;

use proptest::prelude::*;
use std::sync::OnceLock;
use trustscore_core::active::{Session, SessionConfig, SessionStatus, Strategy};
use trustscore_core::experiment::{prepare, Prepared, SyntheticSetup};
use trustscore_core::learn::LearnerConfig;
use trustscore_core::LearnerKind;

fn fixture() -> &'static Prepared {
    static PREPARED: OnceLock<Prepared> = OnceLock::new();
    PREPARED.get_or_init(|| {
        prepare(&SyntheticSetup { n_users: 300, seed_labels: 20, test_size: 60, noise: 0.1, seed: 12 }).unwrap()
    })
}

fn strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    prop::sample::select(Strategy::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sessions_conserve_and_never_requery(
        strategy in strategy(),
        svm in any::<bool>(),
        batch_size in 1usize..80,
        max_iterations in 0usize..8,
        patience in 0usize..4,
        seed in any::<u64>(),
    ) {
        let prepared = fixture();
        let mut learner_config = LearnerConfig::default();
        learner_config.forest.n_trees = 15;
        learner_config.svm.epochs = 20;
        let config = SessionConfig {
            learner: if svm { LearnerKind::Svm } else { LearnerKind::Forest },
            strategy,
            batch_size,
            max_iterations,
            patience,
            seed,
            learner_config,
            ..Default::default()
        };
        let mut session = Session::new(&prepared.dataset, config).unwrap();
        let total = session.instance_count();
        session.start().unwrap();
        let mut seen = HashSet::new();
        while !session.is_complete() {
            let step = session.al_step(&prepared.oracle).unwrap();
            prop_assert!(!step.labeled.is_empty() && step.labeled.len() <= batch_size);
            for id in step.labeled {
                prop_assert!(seen.insert(id));
            }
            prop_assert_eq!(session.instance_count(), total);
        }
        let history = session.history();
        prop_assert!(history.len() <= max_iterations + 1);
        prop_assert!(history.windows(2).all(|w| w[1].labeled_count > w[0].labeled_count));
        prop_assert!(history.iter().enumerate().all(|(i, p)| p.iteration == i));
        prop_assert!(matches!(session.status(), SessionStatus::Completed(_)));
        let pool: HashSet<&String> = session.state().pool.iter().collect();
        prop_assert!(seen.iter().all(|id| !pool.contains(id)));
    }
}
