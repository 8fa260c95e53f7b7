//! Simulated active-learning experiments on synthetic corpora.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::active::{CurvePoint, Oracle, Session, SessionConfig, SessionError, SimulatedOracle};
use crate::dataset::{
    assemble, build_split_dataset, generate_synthetic, DatasetError, FeatureSchema, OracleParams, SplitDataset,
    SyntheticParams,
};
use crate::scoring::score_corpus;
use crate::seed;
use crate::sentiment::Lexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSetup {
    pub n_users: usize,
    /// Labeled rows used to train the first model.
    pub seed_labels: usize,
    /// Labeled rows held out for evaluation.
    pub test_size: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSetup {
    fn default() -> Self {
        SyntheticSetup { n_users: 5000, seed_labels: 100, test_size: 500, noise: 0.05, seed: 0 }
    }
}

/// A dataset with its matching simulated oracle.
pub struct Prepared {
    pub dataset: SplitDataset,
    pub oracle: Oracle,
    pub oracle_params: OracleParams,
}

/// Generates, scores, normalizes and splits a synthetic corpus. A seeded
/// sample of `seed_labels + test_size` accounts keeps its labels; the rest
/// form the pool.
pub fn prepare(setup: &SyntheticSetup) -> Result<Prepared, DatasetError> {
    let labeled_total = setup.seed_labels + setup.test_size;
    if labeled_total > setup.n_users || setup.seed_labels == 0 || setup.test_size == 0 {
        return Err(DatasetError::EmptyPartition {
            labeled: labeled_total,
            fraction: setup.test_size as f64 / labeled_total.max(1) as f64,
        });
    }
    let params = SyntheticParams {
        oracle: OracleParams { noise: setup.noise, seed: seed::mix(setup.seed, 0x0AC1E), ..Default::default() },
        ..Default::default()
    };
    let (corpus, labels) = generate_synthetic(setup.n_users, setup.seed, &params);
    let cards = score_corpus(&corpus, &Lexicon::builtin());
    let raw = assemble(&cards, corpus.users())?;

    let mut rng = seed::rng(setup.seed, 0x1ABE);
    let mut chosen: Vec<usize> = sample(&mut rng, labels.len(), labeled_total).into_vec();
    chosen.sort_unstable();
    let known: Vec<_> = chosen.into_iter().map(|i| labels[i].clone()).collect();

    let test_fraction = setup.test_size as f64 / labeled_total as f64;
    let dataset = build_split_dataset(raw, &known, &FeatureSchema::default(), test_fraction, setup.seed)?;
    let oracle = Oracle::Simulated(SimulatedOracle::for_dataset(&params.oracle, &dataset.normalization_params));
    Ok(Prepared { dataset, oracle, oracle_params: params.oracle })
}

/// Runs one session to completion and returns its learning curve.
pub fn run_curve(
    dataset: &SplitDataset,
    oracle: &Oracle,
    config: SessionConfig,
) -> Result<Vec<CurvePoint>, SessionError> {
    let mut session = Session::new(dataset, config)?;
    session.al_run(oracle)?;
    Ok(session.history().to_vec())
}
