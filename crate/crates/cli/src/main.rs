//! `trustscore`: score account corpora, build normalized datasets, run
//! simulated active-learning experiments and serve annotation sessions.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::seq::index::sample;
use trustscore_core::active::{write_curves, CurveGroup, Oracle, SessionConfig, SimulatedOracle, Strategy};
use trustscore_core::dataset::table::{read_labels, read_scorecards, write_labels, write_scorecards, ScoreRow};
use trustscore_core::dataset::{
    build_split_dataset, feature_index, generate_synthetic, load_dataset, raw_features, save_dataset, FeatureSchema,
    FeatureVector, LinearRule, OracleParams, SyntheticParams,
};
use trustscore_core::experiment::run_curve;
use trustscore_core::learn::LearnerKind;
use trustscore_core::model::{build_corpus, filter_eligible_with, parse_tweets, parse_users, LineError};
use trustscore_core::scoring::score_corpus;
use trustscore_core::{seed, Lexicon, FEATURE_COUNT};

#[derive(Parser)]
#[command(name = "trustscore", version, about = "Account trust scoring and active learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every eligible account of a user/tweet corpus.
    Score(ScoreArgs),
    /// Normalize scorecards into a train/test/pool dataset.
    BuildDataset(BuildArgs),
    /// Run simulated active-learning sessions and write learning curves.
    AlExperiment(ExperimentArgs),
    /// Serve annotation sessions over HTTP.
    Serve(ServeArgs),
    /// Generate a synthetic corpus with ground-truth labels.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ScoreArgs {
    /// Line-delimited JSON user records.
    #[arg(long)]
    users: PathBuf,
    /// Line-delimited JSON tweet records.
    #[arg(long)]
    tweets: PathBuf,
    /// Scorecard CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Sentiment lexicon (`token weight` lines, `!token` for negators).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Accounts with fewer tweets are skipped.
    #[arg(long, default_value_t = 1)]
    min_tweets: usize,
}

#[derive(Args)]
struct BuildArgs {
    /// Scorecard CSV from `score`.
    #[arg(long)]
    scorecards: PathBuf,
    /// CSV of `user_id,label` for the labeled accounts.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Dataset CSV to write; metadata goes next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    clip_low: f64,
    #[arg(long, default_value_t = 99.0)]
    clip_high: f64,
    /// Share of labeled rows held out for evaluation.
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OracleArgs {
    /// Rule weights as `feature=weight` pairs over raw feature values.
    /// Defaults to `tweet_credibility=2,sentiment_score=1`.
    #[arg(long, value_delimiter = ',')]
    rule: Vec<String>,
    /// Rule threshold; the rule fires when the weighted sum exceeds it.
    #[arg(long)]
    rule_threshold: Option<f64>,
    /// Probability that the oracle flips a label.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    oracle_seed: u64,
}

impl OracleArgs {
    fn params(&self) -> Result<OracleParams> {
        if !(0.0..=1.0).contains(&self.noise) {
            bail!("--noise must be within [0, 1]");
        }
        let mut rule = LinearRule::default();
        if !self.rule.is_empty() {
            rule.weights = vec![0.0; FEATURE_COUNT];
            for pair in &self.rule {
                let (name, weight) =
                    pair.split_once('=').with_context(|| format!("rule term `{pair}` is not name=weight"))?;
                let i = feature_index(name.trim()).with_context(|| format!("unknown feature `{name}`"))?;
                rule.weights[i] = weight.trim().parse().with_context(|| format!("bad weight in `{pair}`"))?;
            }
        }
        if let Some(t) = self.rule_threshold {
            rule.threshold = t;
        }
        Ok(OracleParams { rule, noise: self.noise, seed: self.oracle_seed })
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Dataset CSV from `build-dataset`.
    #[arg(long)]
    dataset: PathBuf,
    /// Curve CSV to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "forest")]
    learner: LearnerKind,
    /// Query strategy; repeat to compare several.
    #[arg(long = "strategy", default_values = ["entropy"])]
    strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Plateau window in rounds; 0 disables early stopping.
    #[arg(long, default_value_t = 5)]
    patience: usize,
    #[arg(long, default_value_t = 0.001)]
    min_improvement: f64,
    /// Session seed; repeat for several runs per strategy.
    #[arg(long = "seed", default_values = ["0"])]
    seeds: Vec<u64>,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "TRUSTSCORE_LISTEN", default_value = "127.0.0.1:8080")]
    listen: String,
    #[arg(long, env = "TRUSTSCORE_DATASET")]
    dataset: PathBuf,
    /// Session snapshots are kept under `<data-dir>/sessions`.
    #[arg(long, env = "TRUSTSCORE_DATA_DIR", default_value = "trustscore-data")]
    data_dir: PathBuf,
    #[arg(long, env = "TRUSTSCORE_SCORECARDS")]
    scorecards: Option<PathBuf>,
    #[arg(long, env = "TRUSTSCORE_TWEETS")]
    tweets: Option<PathBuf>,
    /// Static UI bundle to serve at `/`.
    #[arg(long, env = "TRUSTSCORE_UI_DIR")]
    ui_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory for users.jsonl, tweets.jsonl and labels.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    n_users: usize,
    /// Accounts whose labels are written; the rest stay unlabeled.
    #[arg(long, default_value_t = 600)]
    labeled: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    oracle: OracleArgs,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(a) => score(a),
        Command::BuildDataset(a) => build_dataset(a),
        Command::AlExperiment(a) => al_experiment(a),
        Command::Serve(a) => serve(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(errors) => {
            eprintln!("{errors} input error(s) reported");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn report(path: &Path, errors: &[LineError]) -> usize {
    for e in errors {
        eprintln!("{}:{}: {}", path.display(), e.line, e.message);
    }
    errors.len()
}

/// Returns the number of reported input errors.
fn score(args: ScoreArgs) -> Result<usize> {
    let lexicon = match &args.lexicon {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?
            .parse::<Lexicon>()
            .with_context(|| format!("bad lexicon {}", path.display()))?,
        None => Lexicon::builtin(),
    };
    let users = parse_users(open(&args.users)?).with_context(|| args.users.display().to_string())?;
    let tweets = parse_tweets(open(&args.tweets)?).with_context(|| args.tweets.display().to_string())?;
    let errors = report(&args.users, &users.errors) + report(&args.tweets, &tweets.errors);

    let corpus = build_corpus(users.records, tweets.records)?;
    let eligible = filter_eligible_with(&corpus, args.min_tweets);
    let cards = score_corpus(&eligible, &lexicon);
    let rows: Vec<ScoreRow> = eligible.users().iter().zip(&cards).map(|(u, c)| ScoreRow::new(u, c)).collect();
    let mut out = create(&args.out)?;
    write_scorecards(&mut out, &rows)?;
    out.flush()?;
    eprintln!("scored {} of {} accounts -> {}", rows.len(), corpus.len(), args.out.display());
    Ok(errors)
}

fn build_dataset(args: BuildArgs) -> Result<usize> {
    let rows = read_scorecards(open(&args.scorecards)?).with_context(|| args.scorecards.display().to_string())?;
    let labels = match &args.labels {
        Some(path) => read_labels(open(path)?).with_context(|| path.display().to_string())?,
        None => Vec::new(),
    };
    let raw: Vec<FeatureVector> = rows
        .iter()
        .map(|r| FeatureVector { user_id: r.user_id.clone(), values: raw_features(&r.card(), &r.user()), label: None })
        .collect();
    let schema = FeatureSchema::default().with_clip(args.clip_low, args.clip_high);
    let dataset = build_split_dataset(raw, &labels, &schema, args.test_fraction, args.seed)?;
    save_dataset(&dataset, &args.out)?;
    eprintln!(
        "train {} / test {} / pool {} -> {}",
        dataset.train_labeled.len(),
        dataset.test_labeled.len(),
        dataset.pool_unlabeled.len(),
        args.out.display()
    );
    Ok(0)
}

fn al_experiment(args: ExperimentArgs) -> Result<usize> {
    if args.batch_size == 0 || args.max_iters == 0 {
        bail!("--batch-size and --max-iters must be positive");
    }
    let dataset = load_dataset(&args.dataset).with_context(|| args.dataset.display().to_string())?;
    let oracle = Oracle::Simulated(SimulatedOracle::for_dataset(&args.oracle.params()?, &dataset.normalization_params));
    let mut groups = Vec::new();
    for &strategy in &args.strategies {
        for &seed in &args.seeds {
            let config = SessionConfig {
                learner: args.learner,
                strategy,
                batch_size: args.batch_size,
                max_iterations: args.max_iters,
                min_improvement: args.min_improvement,
                patience: args.patience,
                seed,
                ..Default::default()
            };
            let points = run_curve(&dataset, &oracle, config).with_context(|| format!("{strategy} seed {seed}"))?;
            let last = points.last().expect("curve has an initial point");
            eprintln!(
                "{strategy:<12} seed {seed:<4} {} rounds, {} labeled, accuracy {:.4}",
                last.iteration, last.labeled_count, last.accuracy
            );
            groups.push(CurveGroup { strategy, learner: args.learner, seed, points });
        }
    }
    let mut out = create(&args.out)?;
    write_curves(&mut out, &groups)?;
    out.flush()?;
    Ok(0)
}

fn serve(args: ServeArgs) -> Result<usize> {
    let config = trustscore_service::ServiceConfig {
        listen: args.listen,
        dataset: args.dataset,
        data_dir: args.data_dir,
        scorecards: args.scorecards,
        tweets: args.tweets,
        ui_dir: args.ui_dir,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(trustscore_service::serve(config))?;
    Ok(0)
}

fn synth(args: SynthArgs) -> Result<usize> {
    if args.labeled > args.n_users {
        bail!("--labeled exceeds --n-users");
    }
    let params = SyntheticParams { oracle: args.oracle.params()?, ..Default::default() };
    let (corpus, labels) = generate_synthetic(args.n_users, args.seed, &params);
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;

    let mut users = create(&args.out.join("users.jsonl"))?;
    let mut tweets = create(&args.out.join("tweets.jsonl"))?;
    for (user, posted) in corpus.iter() {
        serde_json::to_writer(&mut users, user)?;
        users.write_all(b"\n")?;
        for t in posted {
            serde_json::to_writer(&mut tweets, t)?;
            tweets.write_all(b"\n")?;
        }
    }
    users.flush()?;
    tweets.flush()?;

    let mut chosen = sample(&mut seed::rng(args.seed, 0x1ABE), labels.len(), args.labeled).into_vec();
    chosen.sort_unstable();
    let known: Vec<_> = chosen.into_iter().map(|i| labels[i].clone()).collect();
    let mut out = create(&args.out.join("labels.csv"))?;
    write_labels(&mut out, &known)?;
    out.flush()?;
    eprintln!(
        "{} accounts, {} tweets, {} labeled -> {}",
        corpus.len(),
        corpus.tweet_count(),
        known.len(),
        args.out.display()
    );
    Ok(0)
}
