//! End-to-end runs: data preparation, training, scoring, evaluation, sweeps
//! and the run-directory layout.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::checkpoint::Checkpoint;
use crate::config::{delimiter_byte, DataConfig, RunConfig};
use crate::data::{self, LabeledDataset, Scaler};
use crate::error::{Error, Result};
use crate::metrics::{self, ClassificationSummary, RocCurve};
use crate::model::EnsembleModel;
use crate::scoring::{self, AnomalyReport};
use crate::trainer::{self, TrainOutcome};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";
pub const TEST_DATA_FILE: &str = "test.csv";
pub const SCORES_FILE: &str = "scores.csv";
pub const SCORE_SUMMARY_FILE: &str = "scores.toml";
pub const METRICS_FILE: &str = "metrics.toml";
pub const ROC_FILE: &str = "roc.csv";

/// Train/test split in raw units plus the scaled copies the model sees.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub train_raw: LabeledDataset,
    pub test_raw: LabeledDataset,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub scaler: Scaler,
}

pub fn load_source(cfg: &DataConfig) -> Result<LabeledDataset> {
    match (&cfg.synthetic, &cfg.file) {
        (Some(s), None) => data::make_synthetic(s.kind, s.n_normal, s.n_anomaly, s.dim, s.seed),
        (None, Some(f)) => data::load_delimited(&f.path, &f.label_column, delimiter_byte(&f.delimiter)?),
        _ => Err(Error::Config("exactly one data source must be configured".into())),
    }
}

/// Splits, then fits the scaler on the training rows only.
pub fn prepare_dataset(dataset: &LabeledDataset, cfg: &DataConfig) -> Result<PreparedData> {
    let (train_raw, test_raw) = data::anomaly_split(dataset, cfg.train_fraction, cfg.split_seed)?;
    let (train, scaler) = data::normalize(&train_raw, cfg.normalization)?;
    let test = scaler.apply_dataset(&test_raw)?;
    Ok(PreparedData {
        train_raw,
        test_raw,
        train,
        test,
        scaler,
    })
}

pub fn prepare_data(cfg: &DataConfig) -> Result<PreparedData> {
    prepare_dataset(&load_source(cfg)?, cfg)
}

pub fn build_model(cfg: &RunConfig, data_dim: usize) -> Result<EnsembleModel> {
    EnsembleModel::new(
        cfg.variant,
        cfg.network.architecture(data_dim),
        cfg.weights,
        cfg.generators,
        cfg.discriminators,
        cfg.seed,
    )
}

#[derive(Clone, Debug)]
pub struct TrainedRun {
    pub config: RunConfig,
    pub data: PreparedData,
    pub outcome: TrainOutcome,
}

impl TrainedRun {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            model: self.outcome.model.clone(),
            scaler: Some(self.data.scaler.clone()),
            seed: Some(self.config.seed),
        }
    }

    /// Scores the held-out split, labels attached.
    pub fn score_test(&self, beta: Option<f64>) -> Result<AnomalyReport> {
        score_labeled(&self.outcome.model, &self.data.test, beta, Some(self.config.seed))
    }
}

pub fn train_on(cfg: &RunConfig, data: PreparedData) -> Result<TrainedRun> {
    cfg.validate()?;
    let model = build_model(cfg, data.train.dim())?;
    let outcome = trainer::train(model, data.train.rows(), &cfg.train_config())?;
    Ok(TrainedRun {
        config: cfg.clone(),
        data,
        outcome,
    })
}

pub fn train_run(cfg: &RunConfig) -> Result<TrainedRun> {
    cfg.validate()?;
    train_on(cfg, prepare_data(&cfg.data)?)
}

pub fn score_labeled(
    model: &EnsembleModel,
    dataset: &LabeledDataset,
    beta: Option<f64>,
    seed: Option<u64>,
) -> Result<AnomalyReport> {
    let mut report = scoring::score_dataset(dataset.rows(), model, beta)?;
    report.labels = Some(dataset.labels().to_vec());
    report.seed = seed;
    Ok(report)
}

/// How scores become anomaly flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdRule {
    /// Flag the top fraction equal to the labeled anomaly rate.
    KnownContamination,
    Contamination(f64),
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub auroc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contamination: Option<f64>,
    pub samples: usize,
    pub anomalies: usize,
    #[serde(flatten)]
    pub classification: ClassificationSummary,
    #[serde(skip)]
    pub roc: RocCurve,
}

impl Evaluation {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn evaluate(scores: &[f64], labels: &[u8], rule: ThresholdRule) -> Result<Evaluation> {
    let auroc = metrics::auroc(scores, labels)?;
    let roc = metrics::roc_curve(scores, labels)?;
    let anomalies = labels.iter().filter(|&&l| l == 1).count();
    let (threshold, contamination) = match rule {
        ThresholdRule::Fixed(t) => (t, None),
        ThresholdRule::Contamination(c) => (metrics::threshold_by_contamination(scores, c)?, Some(c)),
        ThresholdRule::KnownContamination => {
            let c = anomalies as f64 / labels.len() as f64;
            (metrics::threshold_by_contamination(scores, c)?, Some(c))
        }
    };
    Ok(Evaluation {
        auroc,
        contamination,
        samples: scores.len(),
        anomalies,
        classification: metrics::prf_at_threshold(scores, labels, threshold)?,
        roc,
    })
}

/// Trains on the configured data and returns the test AUROC.
pub fn run_experiment(cfg: &RunConfig) -> Result<f64> {
    let run = train_run(cfg)?;
    let report = run.score_test(None)?;
    metrics::auroc(&report.scores, run.data.test.labels())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes the checkpoint, history, resolved config and raw test split.
pub fn write_training_outputs(dir: &Path, run: &TrainedRun) -> Result<()> {
    fs::create_dir_all(dir)?;
    run.checkpoint().save(&dir.join(CHECKPOINT_FILE))?;
    trainer::write_history(&run.outcome.history, create(&dir.join(HISTORY_FILE))?)?;
    create(&dir.join(RESOLVED_CONFIG_FILE))?.write_all(run.config.to_toml()?.as_bytes())?;
    data::write_delimited(&run.data.test_raw, create(&dir.join(TEST_DATA_FILE))?, b',')?;
    Ok(())
}

pub fn write_report(dir: &Path, report: &AnomalyReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    report.write_csv(create(&dir.join(SCORES_FILE))?)?;
    create(&dir.join(SCORE_SUMMARY_FILE))?.write_all(report.summary_toml()?.as_bytes())?;
    Ok(())
}

pub fn write_evaluation(dir: &Path, eval: &Evaluation) -> Result<()> {
    fs::create_dir_all(dir)?;
    create(&dir.join(METRICS_FILE))?.write_all(eval.to_toml()?.as_bytes())?;
    eval.roc.write_csv(create(&dir.join(ROC_FILE))?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepKind {
    /// `I = J = size` for each size.
    EnsembleSize(Vec<usize>),
    /// One trained model per seed, scored at each β.
    Beta(Vec<f64>),
}

pub const DEFAULT_SIZES: [usize; 4] = [1, 3, 5, 7];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub setting: String,
    pub value: f64,
    pub seed: u64,
    pub auroc: f64,
}

/// Runs the grid with seed `base.seed + cell`. Ensemble-size cells are
/// numbered setting-major; β cells share one trained model per seed.
pub fn sweep(base: &RunConfig, kind: &SweepKind, n_seeds: usize) -> Result<Vec<SweepRow>> {
    sweep_observed(base, kind, n_seeds, |_| {})
}

/// [`sweep`] with a callback per finished row.
pub fn sweep_observed<F: FnMut(&SweepRow)>(
    base: &RunConfig,
    kind: &SweepKind,
    n_seeds: usize,
    mut observe: F,
) -> Result<Vec<SweepRow>> {
    base.validate()?;
    if n_seeds == 0 {
        return Err(Error::Config("a sweep needs at least one seed".into()));
    }
    let data = prepare_data(&base.data)?;
    let mut rows = Vec::new();
    match kind {
        SweepKind::EnsembleSize(sizes) => {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(Error::Config("ensemble sizes must be positive".into()));
            }
            for (s, &size) in sizes.iter().enumerate() {
                for k in 0..n_seeds {
                    let mut cfg = base.clone();
                    cfg.generators = size;
                    cfg.discriminators = size;
                    cfg.seed = base.seed + (s * n_seeds + k) as u64;
                    let run = train_on(&cfg, data.clone())?;
                    let report = run.score_test(None)?;
                    let row = SweepRow {
                        setting: "ensemble_size".into(),
                        value: size as f64,
                        seed: cfg.seed,
                        auroc: metrics::auroc(&report.scores, data.test.labels())?,
                    };
                    observe(&row);
                    rows.push(row);
                }
            }
        }
        SweepKind::Beta(betas) => {
            if betas.is_empty() || betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
                return Err(Error::Config("beta grid must be non-empty, finite and non-negative".into()));
            }
            for k in 0..n_seeds {
                let mut cfg = base.clone();
                cfg.seed = base.seed + k as u64;
                let run = train_on(&cfg, data.clone())?;
                let terms = scoring::all_pair_terms(data.test.rows(), &run.outcome.model)?;
                for &beta in betas {
                    let per_pair: Vec<Vec<f64>> = terms.iter().map(|(_, t)| t.combine(cfg.variant, beta)).collect();
                    let scores = scoring::average_rows(&per_pair);
                    let row = SweepRow {
                        setting: "beta".into(),
                        value: beta,
                        seed: cfg.seed,
                        auroc: metrics::auroc(&scores, data.test.labels())?,
                    };
                    observe(&row);
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["setting", "value", "seed", "auroc"])
        .map_err(trainer::csv_io)?;
    for r in rows {
        w.write_record([r.setting.clone(), r.value.to_string(), r.seed.to_string(), r.auroc.to_string()])
            .map_err(trainer::csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean AUROC per setting value, in first-seen order.
pub fn sweep_means(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(v, _, _)| *v == r.value) {
            Some(e) => {
                e.1 += r.auroc;
                e.2 += 1;
            }
            None => out.push((r.value, r.auroc, 1)),
        }
    }
    out.into_iter().map(|(v, s, n)| (v, s / n as f64)).collect()
}
