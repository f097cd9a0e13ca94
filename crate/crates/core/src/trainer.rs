//! Randomized pair training.
//!
//! Each iteration draws one generator `i` and one discriminator `j`
//! uniformly, draws a minibatch with replacement, takes an ascent step on
//! the adversarial loss for `γⱼ` and then a descent step on the weighted
//! generator objective for generator `i`. f-AnoGAN runs this loop twice:
//! first decoder and critic on the WGAN loss, then the encoder alone on
//! `α₂ L_r + α₃ L_d` with decoder and critic frozen.
//!
//! Randomness comes from three independent ChaCha streams derived from the
//! seed (pairs, minibatches, prior samples), so a one-pair ensemble draws
//! exactly the same batches as the single-model loop.

use std::collections::VecDeque;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{AdamConfig, AdamState, Tape, Tensor};
use crate::error::{Error, Result};
use crate::losses::{self, LossWeights};
use crate::model::EnsembleModel;
use crate::networks::{DiscriminatorBundle, GeneratorBundle, GeneratorParts, Variant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Total iterations, summed over both f-AnoGAN phases.
    pub max_iter: usize,
    pub batch_size: usize,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    /// Weight-clip bound for the WGAN critic.
    pub clip: f64,
    /// Critic updates per iteration for the WGAN critic.
    pub n_critic: usize,
    pub seed: u64,
    /// Relative change between consecutive loss-window means that counts as
    /// converged; 0 disables the check.
    pub convergence_tol: f64,
    pub convergence_window: usize,
    /// Share of `max_iter` given to the first f-AnoGAN phase.
    pub phase_split: f64,
}

impl TrainConfig {
    pub fn for_variant(variant: Variant) -> Self {
        let (lr, batch) = match variant {
            Variant::FAnoGan => (1e-4, 128),
            Variant::Egbad => (2e-4, 1024),
            Variant::Ganomaly => (2e-4, 64),
        };
        TrainConfig {
            max_iter: 1000,
            batch_size: batch,
            lr_generator: lr,
            lr_discriminator: lr,
            clip: 0.01,
            n_critic: 5,
            seed: 0,
            convergence_tol: 1e-4,
            convergence_window: 100,
            phase_split: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if self.batch_size == 0 || self.n_critic == 0 || self.convergence_window == 0 {
            return Err(Error::Config("batch_size, n_critic and convergence_window must be positive".into()));
        }
        if !pos(self.lr_generator) || !pos(self.lr_discriminator) || !pos(self.clip) {
            return Err(Error::Config("learning rates and clip must be positive".into()));
        }
        if !(self.convergence_tol >= 0.0) || !(self.phase_split > 0.0 && self.phase_split < 1.0) {
            return Err(Error::Config("convergence_tol must be ≥ 0 and phase_split in (0, 1)".into()));
        }
        Ok(())
    }

    fn adam_generator(&self) -> AdamConfig {
        AdamConfig::gan(self.lr_generator)
    }

    fn adam_discriminator(&self) -> AdamConfig {
        AdamConfig::gan(self.lr_discriminator)
    }
}

/// Which parameters a step trains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Everything trains together (EGBAD, GANomaly).
    Joint,
    /// f-AnoGAN first phase: decoder and critic on the WGAN loss.
    Adversarial,
    /// f-AnoGAN second phase: encoder only.
    Encoder,
}

impl Phase {
    fn generator_parts(self) -> GeneratorParts {
        match self {
            Phase::Joint => GeneratorParts::ALL,
            Phase::Adversarial => GeneratorParts {
                decoder: true,
                ..GeneratorParts::NONE
            },
            Phase::Encoder => GeneratorParts {
                encoder: true,
                ..GeneratorParts::NONE
            },
        }
    }

    fn weights(self, base: &LossWeights) -> LossWeights {
        match self {
            Phase::Joint => *base,
            Phase::Adversarial => base.with_alphas([base.adversarial, 0.0, 0.0, 0.0]),
            Phase::Encoder => base.with_alphas([0.0, base.reconstruction, base.discriminative, 0.0]),
        }
    }

    fn trains_discriminator(self) -> bool {
        self != Phase::Encoder
    }

    /// Phases run in order for a variant.
    pub fn schedule(variant: Variant) -> &'static [Phase] {
        match variant {
            Variant::FAnoGan => &[Phase::Adversarial, Phase::Encoder],
            _ => &[Phase::Joint],
        }
    }
}

/// Adam states for the parts of one generator.
#[derive(Clone, Debug)]
pub struct GeneratorOptimizer {
    encoder: AdamState,
    decoder: AdamState,
    second_encoder: Option<AdamState>,
}

impl GeneratorOptimizer {
    pub fn new(config: AdamConfig, gen: &GeneratorBundle) -> Self {
        GeneratorOptimizer {
            encoder: AdamState::new(config, &gen.encoder.params()),
            decoder: AdamState::new(config, &gen.decoder.params()),
            second_encoder: gen
                .second_encoder
                .as_ref()
                .map(|e| AdamState::new(config, &e.params())),
        }
    }
}

/// Losses seen by one generator step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorStepLoss {
    pub total: f64,
    pub adversarial: Option<f64>,
}

/// Ascent step on the adversarial loss for one discriminator. Returns the
/// loss before the update. `clip` bounds every parameter afterwards.
pub fn discriminator_step(
    variant: Variant,
    gen: &GeneratorBundle,
    disc: &mut DiscriminatorBundle,
    optim: &mut AdamState,
    batch: &Tensor,
    prior: Option<&Tensor>,
    clip: Option<f64>,
) -> Result<f64> {
    if batch.rows() == 0 {
        return Err(Error::Data("empty minibatch".into()));
    }
    let mut tape = Tape::new();
    let g = gen.bind(&mut tape, GeneratorParts::NONE);
    let d = disc.bind(&mut tape, true);
    let x = tape.constant(batch.clone());
    let p = prior.map(|p| tape.constant(p.clone()));
    let loss = losses::adversarial(&mut tape, variant, x, p, &g, &d)?;
    let value = tape.value(loss).item();
    let ascent = tape.scale(loss, -1.0)?;
    let grads = tape.backward(ascent)?;
    d.net.write_grads(&grads, &mut disc.net);
    optim.step(&mut disc.net.params_mut())?;
    if let Some(c) = clip {
        disc.clip(c);
    }
    Ok(value)
}

/// Descent step on the weighted generator objective for the parts that
/// `phase` trains; everything else is bound as a constant.
pub fn generator_step(
    variant: Variant,
    weights: &LossWeights,
    phase: Phase,
    gen: &mut GeneratorBundle,
    optim: &mut GeneratorOptimizer,
    disc: &DiscriminatorBundle,
    batch: &Tensor,
    prior: Option<&Tensor>,
) -> Result<GeneratorStepLoss> {
    if batch.rows() == 0 {
        return Err(Error::Data("empty minibatch".into()));
    }
    let parts = phase.generator_parts();
    let weights = phase.weights(weights);
    let mut tape = Tape::new();
    let g = gen.bind(&mut tape, parts);
    let d = disc.bind(&mut tape, false);
    let x = tape.constant(batch.clone());
    let p = prior.map(|p| tape.constant(p.clone()));
    let loss = losses::composite_generator_loss(&mut tape, x, p, &g, &d, &weights, variant)?;
    let out = GeneratorStepLoss {
        total: tape.value(loss.total).item(),
        adversarial: loss.adversarial.map(|a| tape.value(a).item()),
    };
    let grads = tape.backward(loss.total)?;
    g.write_grads(&grads, gen);
    if parts.encoder {
        optim.encoder.step(&mut gen.encoder.params_mut())?;
    }
    if parts.decoder {
        optim.decoder.step(&mut gen.decoder.params_mut())?;
    }
    if parts.second_encoder {
        if let (Some(o), Some(e)) = (optim.second_encoder.as_mut(), gen.second_encoder.as_mut()) {
            o.step(&mut e.params_mut())?;
        }
    }
    Ok(out)
}

/// Independent random streams for one training run.
#[derive(Clone, Debug)]
pub struct Streams {
    pairs: ChaCha8Rng,
    batches: ChaCha8Rng,
    prior: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Streams {
            pairs: stream(1),
            batches: stream(2),
            prior: stream(3),
        }
    }

    /// Uniform, independent `(i, j)` with `i < n_gen`, `j < n_disc`.
    pub fn sample_pair(&mut self, n_gen: usize, n_disc: usize) -> (usize, usize) {
        sample_pair(&mut self.pairs, n_gen, n_disc)
    }

    /// `batch_size` rows drawn uniformly with replacement.
    pub fn sample_batch(&mut self, data: &Tensor, batch_size: usize) -> Result<Tensor> {
        let n = data.rows();
        let idx: Vec<usize> = (0..batch_size).map(|_| self.batches.random_range(0..n)).collect();
        data.select_rows(&idx)
    }

    pub fn sample_prior(&mut self, model: &EnsembleModel, n: usize) -> Option<Tensor> {
        match model.variant {
            Variant::Ganomaly => None,
            _ => Some(model.prior.sample(&mut self.prior, n)),
        }
    }
}

pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R, n_gen: usize, n_disc: usize) -> (usize, usize) {
    (rng.random_range(0..n_gen), rng.random_range(0..n_disc))
}

/// Stops when the means of two consecutive loss windows differ by less than
/// `tol` relative to the earlier one.
#[derive(Clone, Debug)]
pub struct ConvergenceMonitor {
    tol: f64,
    window: usize,
    current: VecDeque<f64>,
    previous_mean: Option<f64>,
}

impl ConvergenceMonitor {
    pub fn new(tol: f64, window: usize) -> Self {
        ConvergenceMonitor {
            tol,
            window,
            current: VecDeque::with_capacity(window),
            previous_mean: None,
        }
    }

    /// Records one loss value; true once converged.
    pub fn push(&mut self, loss: f64) -> bool {
        if self.tol <= 0.0 {
            return false;
        }
        self.current.push_back(loss);
        if self.current.len() < self.window {
            return false;
        }
        let mean = self.current.iter().sum::<f64>() / self.window as f64;
        self.current.clear();
        let converged = match self.previous_mean {
            Some(prev) if prev != 0.0 => ((mean - prev) / prev).abs() < self.tol,
            Some(prev) => mean == prev,
            None => false,
        };
        self.previous_mean = Some(mean);
        converged
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub phase: Phase,
    pub generator: usize,
    pub discriminator: usize,
    /// Adversarial loss at the last discriminator step; absent when the
    /// phase does not train discriminators.
    pub adversarial: Option<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: EnsembleModel,
    pub history: Vec<HistoryRow>,
    /// Iterations in which each generator was the sampled one.
    pub generator_updates: Vec<usize>,
    pub discriminator_updates: Vec<usize>,
    /// Phases that stopped on the convergence test rather than the budget.
    pub converged_phases: Vec<Phase>,
}

/// Iterations for each phase of `variant` under `config`.
pub fn phase_budgets(variant: Variant, config: &TrainConfig) -> Vec<(Phase, usize)> {
    match variant {
        Variant::FAnoGan => {
            let first = (config.max_iter as f64 * config.phase_split).round() as usize;
            let first = first.min(config.max_iter);
            vec![
                (Phase::Adversarial, first),
                (Phase::Encoder, config.max_iter - first),
            ]
        }
        _ => vec![(Phase::Joint, config.max_iter)],
    }
}

fn diverged(iteration: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite(detail) => Error::Divergence { iteration, detail },
        other => other,
    }
}

fn check_training_data(data: &Tensor, model: &EnsembleModel) -> Result<()> {
    if data.shape().len() != 2 || data.rows() == 0 {
        return Err(Error::Data("training data must be a non-empty matrix".into()));
    }
    if data.cols() != model.data_dim() {
        return Err(Error::Data(format!(
            "training data has {} features, model expects {}",
            data.cols(),
            model.data_dim()
        )));
    }
    Ok(())
}

struct Optimizers {
    generators: Vec<GeneratorOptimizer>,
    discriminators: Vec<AdamState>,
}

impl Optimizers {
    fn new(model: &EnsembleModel, config: &TrainConfig) -> Self {
        Optimizers {
            generators: model
                .generators
                .iter()
                .map(|g| GeneratorOptimizer::new(config.adam_generator(), g))
                .collect(),
            discriminators: model
                .discriminators
                .iter()
                .map(|d| AdamState::new(config.adam_discriminator(), &d.net.params()))
                .collect(),
        }
    }
}

/// One iteration on pair `(i, j)`.
fn pair_iteration(
    model: &mut EnsembleModel,
    optim: &mut Optimizers,
    streams: &mut Streams,
    data: &Tensor,
    config: &TrainConfig,
    phase: Phase,
    (i, j): (usize, usize),
) -> Result<(Option<f64>, f64)> {
    let variant = model.variant;
    let clip = (variant == Variant::FAnoGan).then_some(config.clip);
    let critic_steps = if variant == Variant::FAnoGan { config.n_critic } else { 1 };

    let mut adversarial = None;
    let mut batch = None;
    if phase.trains_discriminator() {
        for _ in 0..critic_steps {
            let b = streams.sample_batch(data, config.batch_size)?;
            let p = streams.sample_prior(model, b.rows());
            adversarial = Some(discriminator_step(
                variant,
                &model.generators[i],
                &mut model.discriminators[j],
                &mut optim.discriminators[j],
                &b,
                p.as_ref(),
                clip,
            )?);
            batch = Some(b);
        }
    }
    let batch = match batch {
        Some(b) => b,
        None => streams.sample_batch(data, config.batch_size)?,
    };
    let prior = streams.sample_prior(model, batch.rows());
    let g = generator_step(
        variant,
        &model.weights,
        phase,
        &mut model.generators[i],
        &mut optim.generators[i],
        &model.discriminators[j],
        &batch,
        prior.as_ref(),
    )?;
    Ok((adversarial, g.total))
}

/// Trains an ensemble on normal rows `data`.
pub fn train(model: EnsembleModel, data: &Tensor, config: &TrainConfig) -> Result<TrainOutcome> {
    train_observed(model, data, config, |_, _| {})
}

/// [`train`] with a callback after every iteration.
pub fn train_observed<F>(
    mut model: EnsembleModel,
    data: &Tensor,
    config: &TrainConfig,
    mut observe: F,
) -> Result<TrainOutcome>
where
    F: FnMut(usize, &EnsembleModel),
{
    config.validate()?;
    model.validate()?;
    check_training_data(data, &model)?;

    let mut optim = Optimizers::new(&model, config);
    let mut streams = Streams::new(config.seed);
    let mut outcome = TrainOutcome {
        history: Vec::with_capacity(config.max_iter),
        generator_updates: vec![0; model.n_generators()],
        discriminator_updates: vec![0; model.n_discriminators()],
        converged_phases: Vec::new(),
        model: model.clone(),
    };

    let mut t = 0;
    for (phase, budget) in phase_budgets(model.variant, config) {
        let mut monitor = ConvergenceMonitor::new(config.convergence_tol, config.convergence_window);
        for _ in 0..budget {
            let (i, j) = streams.sample_pair(model.n_generators(), model.n_discriminators());
            let (adversarial, objective) =
                pair_iteration(&mut model, &mut optim, &mut streams, data, config, phase, (i, j))
                    .map_err(diverged(t))?;
            outcome.generator_updates[i] += 1;
            if phase.trains_discriminator() {
                outcome.discriminator_updates[j] += 1;
            }
            outcome.history.push(HistoryRow {
                iteration: t,
                phase,
                generator: i,
                discriminator: j,
                adversarial,
                objective,
            });
            observe(t, &model);
            t += 1;
            if monitor.push(objective) {
                outcome.converged_phases.push(phase);
                break;
            }
        }
    }
    outcome.model = model;
    Ok(outcome)
}

/// The base-model loop: one generator, one discriminator, no pair sampling.
pub fn train_single_observed<F>(
    mut model: EnsembleModel,
    data: &Tensor,
    config: &TrainConfig,
    mut observe: F,
) -> Result<TrainOutcome>
where
    F: FnMut(usize, &EnsembleModel),
{
    config.validate()?;
    model.validate()?;
    if model.n_generators() != 1 || model.n_discriminators() != 1 {
        return Err(Error::Config("single-model training needs exactly one generator and one discriminator".into()));
    }
    check_training_data(data, &model)?;

    let variant = model.variant;
    let clip = (variant == Variant::FAnoGan).then_some(config.clip);
    let critic_steps = if variant == Variant::FAnoGan { config.n_critic } else { 1 };
    let mut gen_optim = GeneratorOptimizer::new(config.adam_generator(), &model.generators[0]);
    let mut disc_optim = AdamState::new(config.adam_discriminator(), &model.discriminators[0].net.params());
    let mut streams = Streams::new(config.seed);
    let mut history = Vec::with_capacity(config.max_iter);
    let mut converged_phases = Vec::new();
    let mut updates = 0;
    let mut disc_updates = 0;

    let mut t = 0;
    for (phase, budget) in phase_budgets(variant, config) {
        let mut monitor = ConvergenceMonitor::new(config.convergence_tol, config.convergence_window);
        for _ in 0..budget {
            let mut step = |model: &mut EnsembleModel, streams: &mut Streams| -> Result<(Option<f64>, f64)> {
                let mut adversarial = None;
                let mut last_batch = None;
                if phase.trains_discriminator() {
                    for _ in 0..critic_steps {
                        let b = streams.sample_batch(data, config.batch_size)?;
                        let p = streams.sample_prior(model, b.rows());
                        let (gens, discs) = (&model.generators, &mut model.discriminators);
                        adversarial = Some(discriminator_step(
                            variant,
                            &gens[0],
                            &mut discs[0],
                            &mut disc_optim,
                            &b,
                            p.as_ref(),
                            clip,
                        )?);
                        last_batch = Some(b);
                    }
                }
                let batch = match last_batch {
                    Some(b) => b,
                    None => streams.sample_batch(data, config.batch_size)?,
                };
                let prior = streams.sample_prior(model, batch.rows());
                let weights = model.weights;
                let (gens, discs) = (&mut model.generators, &model.discriminators);
                let g = generator_step(
                    variant,
                    &weights,
                    phase,
                    &mut gens[0],
                    &mut gen_optim,
                    &discs[0],
                    &batch,
                    prior.as_ref(),
                )?;
                Ok((adversarial, g.total))
            };
            let (adversarial, objective) = step(&mut model, &mut streams).map_err(diverged(t))?;
            updates += 1;
            if phase.trains_discriminator() {
                disc_updates += 1;
            }
            history.push(HistoryRow {
                iteration: t,
                phase,
                generator: 0,
                discriminator: 0,
                adversarial,
                objective,
            });
            observe(t, &model);
            t += 1;
            if monitor.push(objective) {
                converged_phases.push(phase);
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model,
        history,
        generator_updates: vec![updates],
        discriminator_updates: vec![disc_updates],
        converged_phases,
    })
}

pub fn train_single(model: EnsembleModel, data: &Tensor, config: &TrainConfig) -> Result<TrainOutcome> {
    train_single_observed(model, data, config, |_, _| {})
}

/// Writes `iteration,phase,generator,discriminator,adversarial,objective` rows.
pub fn write_history<W: Write>(rows: &[HistoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "phase", "generator", "discriminator", "adversarial", "objective"])
        .map_err(csv_io)?;
    for r in rows {
        let phase = match r.phase {
            Phase::Joint => "joint",
            Phase::Adversarial => "adversarial",
            Phase::Encoder => "encoder",
        };
        w.write_record([
            r.iteration.to_string(),
            phase.to_string(),
            r.generator.to_string(),
            r.discriminator.to_string(),
            r.adversarial.map(|v| v.to_string()).unwrap_or_default(),
            r.objective.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
