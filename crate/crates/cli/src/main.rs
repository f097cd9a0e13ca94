use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gan_ensemble::autodiff::Norm;
use gan_ensemble::checkpoint::Checkpoint;
use gan_ensemble::config::{self, delimiter_byte, parse_override, string_override, RunConfig};
use gan_ensemble::critic::{self, CriticInstance};
use gan_ensemble::data::{self, LabelColumn, SyntheticKind};
use gan_ensemble::networks::Variant;
use gan_ensemble::pipeline::{self, SweepKind, ThresholdRule};
use gan_ensemble::scoring;
use gan_ensemble::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

#[derive(Parser)]
#[command(name = "gan-ensemble", version, about = "Anomaly detection with ensembles of encoder-decoder GANs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labeled dataset.
    GenerateData(GenerateArgs),
    /// Train an ensemble and write a run directory.
    Train(TrainArgs),
    /// Score a dataset with a trained checkpoint.
    Score(ScoreArgs),
    /// Compute AUROC, ROC rows and thresholded P/R/F1 from a score file.
    Evaluate(EvaluateArgs),
    /// Compare the closed-form optimal critic with an exact LP solve.
    VerifyCritic(VerifyArgs),
    /// Train and score over an ensemble-size or beta grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: SyntheticKind,
    #[arg(long)]
    n_normal: usize,
    #[arg(long, default_value_t = 0)]
    n_anomaly: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ",")]
    delimiter: String,
    #[arg(long)]
    out: PathBuf,
}

/// Flags shared by commands that resolve a run configuration.
#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,
    #[arg(long)]
    generators: Option<usize>,
    #[arg(long)]
    discriminators: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Delimited data file; replaces any synthetic source.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    delimiter: Option<String>,
    /// Any config key, e.g. `--set trainer.batch_size=64`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let text = match &self.config {
            Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
            None => None,
        };
        let mut ov = Vec::new();
        if let Some(v) = self.variant {
            ov.push(string_override("variant", v.name()));
        }
        let numeric = [
            ("generators", self.generators.map(|v| v.to_string())),
            ("discriminators", self.discriminators.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("trainer.max_iter", self.max_iter.map(|v| v.to_string())),
            ("weights.beta", self.beta.map(|v| format!("{v:?}"))),
        ];
        for (key, value) in numeric {
            if let Some(v) = value {
                ov.push(parse_override(&format!("{key}={v}"))?);
            }
        }
        if let Some(p) = &self.data {
            ov.push(string_override("data.file.path", &p.to_string_lossy()));
        }
        if let Some(c) = &self.label_column {
            ov.push(match c.parse::<usize>() {
                Ok(_) => parse_override(&format!("data.file.label_column={c}"))?,
                Err(_) => string_override("data.file.label_column", c),
            });
        }
        if let Some(d) = &self.delimiter {
            ov.push(string_override("data.file.delimiter", d));
        }
        for s in &self.sets {
            ov.push(parse_override(s)?);
        }
        Ok(config::resolve(text.as_deref(), &ov)?)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Run directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also score the held-out split and evaluate it.
    #[arg(long)]
    evaluate: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Raw (unscaled) delimited data; the checkpoint's scaler is applied.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Treat every column as a feature.
    #[arg(long, conflicts_with = "label_column")]
    no_labels: bool,
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// Overrides the checkpoint's score weight.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Score file written by `score`.
    #[arg(long)]
    scores: PathBuf,
    /// Labeled data file to take labels from instead of the score file.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// Flag this fraction as anomalous; defaults to the labeled anomaly rate.
    #[arg(long, conflicts_with = "threshold")]
    contamination: Option<f64>,
    /// Flag scores at or above this value.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    #[value(name = "1")]
    L1,
    #[value(name = "2")]
    L2,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON instance with `train`, `values`, `support`, `weights`, `norm`.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    instance: Option<PathBuf>,
    /// Random instances: max training points, max support points, optional seed.
    #[arg(long, num_args = 2..=3, value_names = ["N", "M", "SEED"])]
    random: Option<Vec<u64>>,
    /// Number of random instances.
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Dimension of random instances; alternates 1 and 2 when absent.
    #[arg(long)]
    dim: Option<usize>,
    /// Norm of random instances; alternates when absent.
    #[arg(long)]
    norm: Option<NormArg>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Report file (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Closed-form grid rows for a 1-D or 2-D instance file.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    resolution: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKindArg {
    EnsembleSize,
    Beta,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    kind: SweepKindArg,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_delimiter = ',', default_values_t = pipeline::DEFAULT_SIZES)]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 1.0, 10.0, 39.0])]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    /// Table file (CSV).
    #[arg(long)]
    out: PathBuf,
}

fn parse_kind(s: &str) -> Result<SyntheticKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn create(path: &Path) -> anyhow::Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    if args.n_normal + args.n_anomaly == 0 {
        return Err(Error::Config("dataset would have no rows".into()).into());
    }
    let ds = data::make_synthetic(args.kind, args.n_normal, args.n_anomaly, args.dim, args.seed)?;
    data::write_delimited(&ds, create(&args.out)?, delimiter_byte(&args.delimiter)?)?;
    println!(
        "wrote {} rows ({} normal, {} anomalous) x {} features to {}",
        ds.len(),
        ds.len() - ds.n_anomalies(),
        ds.n_anomalies(),
        ds.dim(),
        args.out.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let dir = match args.out.or_else(|| cfg.output_dir.clone()) {
        Some(d) => d,
        None => return Err(Error::Config("no run directory: pass --out or set output_dir".into()).into()),
    };
    let data = pipeline::prepare_data(&cfg.data)?;
    println!(
        "training {} with I={} J={} on {} rows x {} features ({} iterations)",
        cfg.variant,
        cfg.generators,
        cfg.discriminators,
        data.train.len(),
        data.train.dim(),
        cfg.train_config().max_iter
    );
    let run = pipeline::train_on(&cfg, data)?;
    pipeline::write_training_outputs(&dir, &run)?;
    println!(
        "generator updates {:?}, discriminator updates {:?}",
        run.outcome.generator_updates, run.outcome.discriminator_updates
    );
    if args.evaluate {
        let report = run.score_test(None)?;
        pipeline::write_report(&dir, &report)?;
        let eval = pipeline::evaluate(&report.scores, run.data.test.labels(), ThresholdRule::KnownContamination)?;
        pipeline::write_evaluation(&dir, &eval)?;
        println!("test AUROC {:.4}, F1 {:.4}", eval.auroc, eval.classification.f1);
    }
    println!("run directory {}", dir.display());
    Ok(())
}

fn score(args: ScoreArgs) -> anyhow::Result<()> {
    let ck = Checkpoint::load(&args.checkpoint)
        .with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let delim = delimiter_byte(&args.delimiter)?;
    let file = File::open(&args.data).with_context(|| format!("opening {}", args.data.display()))?;
    let (rows, labels) = if args.no_labels {
        (data::read_unlabeled(file, delim)?, None)
    } else {
        let label: LabelColumn = args.label_column.parse()?;
        let ds = data::read_delimited(file, &label, delim)?;
        (ds.rows().clone(), Some(ds.labels().to_vec()))
    };
    let rows = match &ck.scaler {
        Some(s) => s.apply(&rows)?,
        None => rows,
    };
    let mut report = scoring::score_dataset(&rows, &ck.model, args.beta)?;
    report.labels = labels;
    report.seed = ck.seed;
    pipeline::write_report(&args.out, &report)?;
    println!(
        "scored {} samples with {} pairs into {}",
        report.len(),
        report.pairs.len(),
        args.out.join(pipeline::SCORES_FILE).display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let file = File::open(&args.scores).with_context(|| format!("opening {}", args.scores.display()))?;
    let table = scoring::read_score_table(file)?;
    let labels = match &args.labels {
        Some(path) => {
            let label: LabelColumn = args.label_column.parse()?;
            data::load_delimited(path, &label, delimiter_byte(&args.delimiter)?)?
                .labels()
                .to_vec()
        }
        None => match table.labels {
            Some(l) => l,
            None => return Err(Error::Data("score file has no labels; pass --labels".into()).into()),
        },
    };
    let rule = match (args.threshold, args.contamination) {
        (Some(t), _) => ThresholdRule::Fixed(t),
        (None, Some(c)) => ThresholdRule::Contamination(c),
        (None, None) => ThresholdRule::KnownContamination,
    };
    let eval = pipeline::evaluate(&table.scores, &labels, rule)?;
    pipeline::write_evaluation(&args.out, &eval)?;
    let c = &eval.classification;
    println!(
        "AUROC {:.6}  precision {:.6}  recall {:.6}  F1 {:.6}  threshold {}",
        eval.auroc, c.precision, c.recall, c.f1, c.threshold
    );
    Ok(())
}

fn verify_critic(args: VerifyArgs) -> anyhow::Result<bool> {
    let instances: Vec<CriticInstance> = match (&args.instance, &args.random) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            vec![CriticInstance::from_json(&text)?]
        }
        (None, Some(r)) => {
            let (n, m, seed) = (r[0] as usize, r[1] as usize, r.get(2).copied().unwrap_or(0));
            if n == 0 || m == 0 {
                return Err(Error::Config("--random needs positive N and M".into()).into());
            }
            if args.dim.is_some_and(|d| d == 0) {
                return Err(Error::Config("--dim must be positive".into()).into());
            }
            let norm = args.norm.map(|n| match n {
                NormArg::L1 => Norm::L1,
                NormArg::L2 => Norm::L2,
            });
            critic::random_instances(seed, args.count, n, m, args.dim, norm)
        }
        (None, None) => bail!("pass --instance or --random"),
    };
    let mut reports = Vec::with_capacity(instances.len());
    let mut all_pass = true;
    for (k, inst) in instances.iter().enumerate() {
        let r = critic::check_theorem(inst, args.tol)?;
        println!(
            "instance {k}: |X|={} |S|={} max deviation {:.3e} oracle Lipschitz {} -> {}",
            inst.train.len(),
            inst.support.len(),
            r.max_deviation,
            if r.oracle_lipschitz.passed { "ok" } else { "violated" },
            if r.passed { "pass" } else { "FAIL" }
        );
        all_pass &= r.passed;
        reports.push(r);
    }
    if let Some(path) = &args.plot {
        let inst = &instances[0];
        let n = inst.train.len();
        let values = critic::oracle_optimal_critic(inst)?.function.values[..n].to_vec();
        let rows = critic::plot_rows(inst, &values, args.resolution)?;
        let mut text = if inst.dim() == 1 { "x,value\n" } else { "x1,x2,value\n" }.to_string();
        for r in rows {
            text += &r.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
            text.push('\n');
        }
        fs::write(path, text)?;
    }
    if let Some(path) = &args.out {
        let body = reports.iter().map(|r| r.to_json()).collect::<Result<Vec<_>, _>>()?;
        fs::write(path, format!("[{}]\n", body.join(",\n")))?;
    }
    println!(
        "{} of {} instances pass at tolerance {:e}",
        reports.iter().filter(|r| r.passed).count(),
        reports.len(),
        args.tol
    );
    Ok(all_pass)
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let kind = match args.kind {
        SweepKindArg::EnsembleSize => SweepKind::EnsembleSize(args.sizes),
        SweepKindArg::Beta => SweepKind::Beta(args.betas),
    };
    let rows = pipeline::sweep_observed(&cfg, &kind, args.seeds, |r| {
        println!("{} = {} seed {}: AUROC {:.4}", r.setting, r.value, r.seed, r.auroc);
    })?;
    pipeline::write_sweep_csv(&rows, create(&args.out)?)?;
    for (value, mean) in pipeline::sweep_means(&rows) {
        println!("mean AUROC at {value}: {mean:.4}");
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_validation() => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenerateData(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Score(a) => score(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(a) => sweep(a),
        Command::VerifyCritic(a) => match verify_critic(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_RUNTIME),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
