//! Random loss configurations whose tape gradients are compared with central
//! differences of the loop oracle.

use gan_ensemble::autodiff::{Norm, Tape, Tensor};
use gan_ensemble::losses;
use gan_ensemble::networks::{
    Activation, Architecture, DiscriminatorBundle, GeneratorBundle, GeneratorParts, Mlp, Variant,
};
use rand::Rng;

use super::{rng, Row};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    AdvGan,
    AdvWgan,
    AdvBigan,
    Recon,
    Disc,
    Enc,
}

pub const ALL_LOSSES: [LossKind; 6] = [
    LossKind::AdvGan,
    LossKind::AdvWgan,
    LossKind::AdvBigan,
    LossKind::Recon,
    LossKind::Disc,
    LossKind::Enc,
];

pub struct GradCase {
    pub kind: LossKind,
    pub variant: Variant,
    pub norm: Norm,
    pub gen: GeneratorBundle,
    pub disc: DiscriminatorBundle,
    pub x: Vec<Row>,
    pub prior: Vec<Row>,
}

fn widths<R: Rng>(rng: &mut R) -> Vec<usize> {
    (0..rng.random_range(1..=2)).map(|_| rng.random_range(2..=5)).collect()
}

fn jitter_biases<R: Rng>(mlp: &mut Mlp, rng: &mut R) {
    for layer in &mut mlp.layers {
        let b = (0..layer.bias.numel()).map(|_| rng.random_range(-0.5..0.5)).collect();
        layer.bias.set_data(b).unwrap();
    }
}

/// Case `k` of the sweep; the loss cycles through all six kinds.
pub fn case(seed: u64, k: usize) -> GradCase {
    let mut r = rng(seed.wrapping_mul(1_000_003).wrapping_add(k as u64));
    let kind = ALL_LOSSES[k % ALL_LOSSES.len()];
    let any = [Variant::FAnoGan, Variant::Egbad, Variant::Ganomaly];
    let variant = match kind {
        LossKind::AdvGan | LossKind::Enc => Variant::Ganomaly,
        LossKind::AdvWgan => Variant::FAnoGan,
        LossKind::AdvBigan => Variant::Egbad,
        LossKind::Recon | LossKind::Disc => any[r.random_range(0..3)],
    };
    let norm = if r.random_bool(0.5) { Norm::L1 } else { Norm::L2 };
    let outputs = [Activation::Identity, Activation::Sigmoid, Activation::Tanh];
    let arch = Architecture {
        data_dim: r.random_range(1..=4),
        latent_dim: r.random_range(1..=3),
        encoder_hidden: widths(&mut r),
        decoder_hidden: widths(&mut r),
        discriminator_hidden: widths(&mut r),
        hidden_activation: Activation::LeakyRelu,
        decoder_output: outputs[r.random_range(0..3)],
    };
    let mut gen = GeneratorBundle::new(&arch, variant, &mut r).unwrap();
    let mut disc = DiscriminatorBundle::new(&arch, variant, &mut r).unwrap();
    jitter_biases(&mut gen.encoder, &mut r);
    jitter_biases(&mut gen.decoder, &mut r);
    if let Some(e) = gen.second_encoder.as_mut() {
        jitter_biases(e, &mut r);
    }
    jitter_biases(&mut disc.net, &mut r);
    let batch = r.random_range(1..=4);
    let x = super::random_rows(&mut r, batch, arch.data_dim, 2.0);
    let prior = super::random_rows(&mut r, batch, arch.latent_dim, 2.0);
    GradCase {
        kind,
        variant,
        norm,
        gen,
        disc,
        x,
        prior,
    }
}

impl GradCase {
    pub fn oracle_loss(&self, gen: &GeneratorBundle, disc: &DiscriminatorBundle) -> f64 {
        match self.kind {
            LossKind::AdvGan => super::adv_gan(&self.x, gen, disc),
            LossKind::AdvWgan => super::adv_wgan(&self.x, &self.prior, gen, disc),
            LossKind::AdvBigan => super::adv_bigan(&self.x, &self.prior, gen, disc),
            LossKind::Recon => super::recon_loss(&self.x, gen, disc, self.norm),
            LossKind::Disc => super::disc_loss(&self.x, gen, disc, self.norm),
            LossKind::Enc => super::enc_loss(&self.x, gen, disc, self.norm),
        }
    }

    /// Loss value and gradients from the tape, in parameter order: encoder,
    /// decoder, second encoder, discriminator.
    pub fn tape_gradients(&self) -> (f64, Vec<Vec<f64>>) {
        let mut tape = Tape::new();
        let g = self.gen.bind(&mut tape, GeneratorParts::ALL);
        let d = self.disc.bind(&mut tape, true);
        let x = tape.constant(super::tensor_of(&self.x));
        let p = tape.constant(super::tensor_of(&self.prior));
        let loss = match self.kind {
            LossKind::AdvGan => losses::adv_gan(&mut tape, x, &g, &d),
            LossKind::AdvWgan => losses::adv_wgan(&mut tape, x, p, &g, &d),
            LossKind::AdvBigan => losses::adv_bigan(&mut tape, x, p, &g, &d),
            LossKind::Recon => losses::recon_loss(&mut tape, x, &g, self.norm),
            LossKind::Disc => losses::disc_loss(&mut tape, x, &g, &d, self.norm),
            LossKind::Enc => losses::enc_loss(&mut tape, x, &g, self.norm),
        }
        .unwrap();
        let grads = tape.backward(loss).unwrap();
        let mut vars = g.encoder.vars().to_vec();
        vars.extend_from_slice(g.decoder.vars());
        if let Some(e) = &g.second_encoder {
            vars.extend_from_slice(e.vars());
        }
        vars.extend_from_slice(d.net.vars());
        let out = vars.iter().map(|v| grads.wrt(*v).data().to_vec()).collect();
        (tape.value(loss).item(), out)
    }

    fn params_mut<'a>(gen: &'a mut GeneratorBundle, disc: &'a mut DiscriminatorBundle) -> Vec<&'a mut Tensor> {
        let mut out = gen.encoder.params_mut();
        out.extend(gen.decoder.params_mut());
        if let Some(e) = gen.second_encoder.as_mut() {
            out.extend(e.params_mut());
        }
        out.extend(disc.net.params_mut());
        out
    }

    /// Central differences of the oracle loss with step `h`.
    pub fn numeric_gradients(&self, h: f64) -> Vec<Vec<f64>> {
        let (mut gen, mut disc) = (self.gen.clone(), self.disc.clone());
        let shapes: Vec<usize> = Self::params_mut(&mut gen, &mut disc).iter().map(|t| t.numel()).collect();
        let mut out = Vec::with_capacity(shapes.len());
        for (p, &n) in shapes.iter().enumerate() {
            let mut g = Vec::with_capacity(n);
            for e in 0..n {
                let eval = |delta: f64| {
                    let (mut gp, mut dp) = (self.gen.clone(), self.disc.clone());
                    {
                        let mut params = Self::params_mut(&mut gp, &mut dp);
                        let t = &mut params[p];
                        let mut data = t.data().to_vec();
                        data[e] += delta;
                        t.set_data(data).unwrap();
                    }
                    self.oracle_loss(&gp, &dp)
                };
                g.push((eval(h) - eval(-h)) / (2.0 * h));
            }
            out.push(g);
        }
        out
    }
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub struct SweepResult {
    pub cases: usize,
    pub per_loss: Vec<(LossKind, usize)>,
    pub max_relative_error: f64,
    pub max_value_gap: f64,
}

pub const FD_STEP: f64 = 1e-6;
pub const REL_FLOOR: f64 = 1e-3;

pub fn run_sweep(seed: u64, cases: usize) -> SweepResult {
    let mut per_loss: Vec<(LossKind, usize)> = ALL_LOSSES.iter().map(|&k| (k, 0)).collect();
    let mut worst: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for k in 0..cases {
        let c = case(seed, k);
        let (value, analytic) = c.tape_gradients();
        gap = gap.max((value - c.oracle_loss(&c.gen, &c.disc)).abs());
        let numeric = c.numeric_gradients(FD_STEP);
        for (a, n) in analytic.iter().zip(&numeric) {
            assert_eq!(a.len(), n.len());
            for (&ai, &ni) in a.iter().zip(n) {
                worst = worst.max(relative_error(ai, ni, REL_FLOOR));
            }
        }
        per_loss.iter_mut().find(|(kind, _)| *kind == c.kind).unwrap().1 += 1;
    }
    SweepResult {
        cases,
        per_loss,
        max_relative_error: worst,
        max_value_gap: gap,
    }
}
