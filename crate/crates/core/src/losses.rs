//! Minibatch losses for one generator-discriminator pair.
//!
//! Every loss is a mean over the rows of the batch. Reconstruction,
//! discriminative and encoding losses use the ℓ-norm power `‖·‖_ℓ^ℓ`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Norm, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::networks::{BoundDiscriminator, BoundGenerator, DiscriminatorInput, Variant};

/// Loss weights α₁..α₄ in algorithm order (adversarial, reconstruction,
/// discriminative, encoding), the score weight β and the norm exponent ℓ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub adversarial: f64,
    pub reconstruction: f64,
    pub discriminative: f64,
    pub encoding: f64,
    pub beta: f64,
    pub norm: Norm,
}

impl LossWeights {
    pub fn for_variant(variant: Variant) -> Self {
        let (a, beta) = match variant {
            Variant::FAnoGan => ([1.0, 1.0, 1.0, 0.0], 39.0),
            Variant::Egbad => ([1.0, 0.0, 0.0, 0.0], 0.1),
            Variant::Ganomaly => ([1.0, 50.0, 1.0, 1.0], 9.0),
        };
        LossWeights {
            adversarial: a[0],
            reconstruction: a[1],
            discriminative: a[2],
            encoding: a[3],
            beta,
            norm: Norm::L2,
        }
    }

    pub fn alphas(&self) -> [f64; 4] {
        [self.adversarial, self.reconstruction, self.discriminative, self.encoding]
    }

    pub fn with_alphas(mut self, a: [f64; 4]) -> Self {
        self.adversarial = a[0];
        self.reconstruction = a[1];
        self.discriminative = a[2];
        self.encoding = a[3];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alphas();
        if a.iter().chain([&self.beta]).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(format!("loss weights must be finite and non-negative: {self:?}")));
        }
        if a.iter().all(|&v| v == 0.0) {
            return Err(Error::Config("at least one loss weight must be positive".into()));
        }
        Ok(())
    }
}

/// Standard Gaussian prior over encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub dim: usize,
}

impl PriorSpec {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Tensor {
        let data = (0..n * self.dim).map(|_| rng.sample(StandardNormal)).collect();
        Tensor::from_parts(vec![n, self.dim], data)
    }
}

fn batch_rows(tape: &Tape, x: Var) -> Result<usize> {
    match tape.shape(x) {
        [b, _] => Ok(*b),
        s => Err(Error::shape("loss", format!("batch must be a matrix, got {s:?}"))),
    }
}

fn expect_disc(disc: &BoundDiscriminator, critic: bool, input: DiscriminatorInput, loss: &str) -> Result<()> {
    if disc.critic != critic || disc.input != input {
        return Err(Error::Variant(format!(
            "{loss} needs a {} discriminator on {:?} inputs",
            if critic { "critic (identity-output)" } else { "sigmoid-output" },
            input
        )));
    }
    Ok(())
}

/// Mean over rows of `‖a − b‖_ℓ^ℓ`.
fn mean_row_norm_power(tape: &mut Tape, a: Var, b: Var, norm: Norm) -> Result<Var> {
    let rows = batch_rows(tape, a)?;
    let diff = tape.sub(a, b)?;
    let total = tape.lp_power_norm(diff, norm)?;
    tape.scale(total, 1.0 / rows as f64)
}

/// `mean log u₁ + mean log(1 − u₂)`, both logs clamped.
fn log_pair(tape: &mut Tape, real: Var, fake: Var) -> Result<Var> {
    let lr = tape.log(real)?;
    let lr = tape.mean(lr)?;
    let one_minus = tape.scale(fake, -1.0)?;
    let one_minus = tape.add_scalar(one_minus, 1.0)?;
    let lf = tape.log(one_minus)?;
    let lf = tape.mean(lf)?;
    tape.add(lr, lf)
}

fn gan_from_reconstruction(
    tape: &mut Tape,
    x: Var,
    xr: Var,
    disc: &BoundDiscriminator,
) -> Result<Var> {
    expect_disc(disc, false, DiscriminatorInput::Sample, "vanilla GAN loss")?;
    let (u_real, _) = disc.discriminate(tape, x)?;
    let (u_fake, _) = disc.discriminate(tape, xr)?;
    log_pair(tape, u_real, u_fake)
}

/// Vanilla GAN loss `log D(x) + log(1 − D(G_d(G_e(x))))`; the fake sample is
/// the reconstruction.
pub fn adv_gan(tape: &mut Tape, x: Var, gen: &BoundGenerator, disc: &BoundDiscriminator) -> Result<Var> {
    expect_disc(disc, false, DiscriminatorInput::Sample, "vanilla GAN loss")?;
    let xr = gen.reconstruct(tape, x)?;
    gan_from_reconstruction(tape, x, xr, disc)
}

/// WGAN loss `D(x) − D(G_d(z̃))` with `z̃` from the prior. The encoder does not
/// appear.
pub fn adv_wgan(
    tape: &mut Tape,
    x: Var,
    prior: Var,
    gen: &BoundGenerator,
    disc: &BoundDiscriminator,
) -> Result<Var> {
    expect_disc(disc, true, DiscriminatorInput::Sample, "WGAN loss")?;
    check_prior(tape, x, prior)?;
    let fake = gen.decode(tape, prior)?;
    let (u_real, _) = disc.discriminate(tape, x)?;
    let (u_fake, _) = disc.discriminate(tape, fake)?;
    let real = tape.mean(u_real)?;
    let fake = tape.mean(u_fake)?;
    tape.sub(real, fake)
}

/// BiGAN loss `log D(x, G_e(x)) + log(1 − D(G_d(z̃), z̃))`.
pub fn adv_bigan(
    tape: &mut Tape,
    x: Var,
    prior: Var,
    gen: &BoundGenerator,
    disc: &BoundDiscriminator,
) -> Result<Var> {
    expect_disc(disc, false, DiscriminatorInput::Joint, "BiGAN loss")?;
    check_prior(tape, x, prior)?;
    let z = gen.encode(tape, x)?;
    let real_pair = tape.concat_cols(x, z)?;
    let fake = gen.decode(tape, prior)?;
    let fake_pair = tape.concat_cols(fake, prior)?;
    let (u_real, _) = disc.discriminate(tape, real_pair)?;
    let (u_fake, _) = disc.discriminate(tape, fake_pair)?;
    log_pair(tape, u_real, u_fake)
}

fn check_prior(tape: &Tape, x: Var, prior: Var) -> Result<()> {
    let (b, bp) = (batch_rows(tape, x)?, batch_rows(tape, prior)?);
    if b != bp {
        return Err(Error::shape("prior", format!("{bp} prior rows for a batch of {b}")));
    }
    Ok(())
}

/// The adversarial loss matching `variant`. `prior` is required for the
/// WGAN and BiGAN forms.
pub fn adversarial(
    tape: &mut Tape,
    variant: Variant,
    x: Var,
    prior: Option<Var>,
    gen: &BoundGenerator,
    disc: &BoundDiscriminator,
) -> Result<Var> {
    let need_prior = || Error::Variant(format!("{variant} adversarial loss needs prior samples"));
    match variant {
        Variant::Ganomaly => adv_gan(tape, x, gen, disc),
        Variant::FAnoGan => adv_wgan(tape, x, prior.ok_or_else(need_prior)?, gen, disc),
        Variant::Egbad => adv_bigan(tape, x, prior.ok_or_else(need_prior)?, gen, disc),
    }
}

/// `mean ‖x − G_d(G_e(x))‖_ℓ^ℓ`
pub fn recon_loss(tape: &mut Tape, x: Var, gen: &BoundGenerator, norm: Norm) -> Result<Var> {
    let xr = gen.reconstruct(tape, x)?;
    mean_row_norm_power(tape, x, xr, norm)
}

fn hidden_of(
    tape: &mut Tape,
    sample: Var,
    encoding: Option<Var>,
    gen: &BoundGenerator,
    disc: &BoundDiscriminator,
) -> Result<Var> {
    let input = match disc.input {
        DiscriminatorInput::Sample => sample,
        DiscriminatorInput::Joint => {
            let z = match encoding {
                Some(z) => z,
                None => gen.encode(tape, sample)?,
            };
            tape.concat_cols(sample, z)?
        }
    };
    Ok(disc.discriminate(tape, input)?.1)
}

fn disc_term(
    tape: &mut Tape,
    x: Var,
    z: Var,
    xr: Var,
    gen: &BoundGenerator,
    disc: &BoundDiscriminator,
    norm: Norm,
) -> Result<Var> {
    let h_real = hidden_of(tape, x, Some(z), gen, disc)?;
    let h_recon = hidden_of(tape, xr, None, gen, disc)?;
    mean_row_norm_power(tape, h_real, h_recon, norm)
}

/// `mean ‖f_D(x) − f_D(x̃)‖_ℓ^ℓ` on the last hidden layer. For a joint
/// discriminator the inputs are `(x, G_e(x))` and `(x̃, G_e(x̃))`.
pub fn disc_loss(
    tape: &mut Tape,
    x: Var,
    gen: &BoundGenerator,
    disc: &BoundDiscriminator,
    norm: Norm,
) -> Result<Var> {
    let z = gen.encode(tape, x)?;
    let xr = gen.decode(tape, z)?;
    disc_term(tape, x, z, xr, gen, disc, norm)
}

fn enc_term(tape: &mut Tape, z: Var, xr: Var, gen: &BoundGenerator, norm: Norm) -> Result<Var> {
    let z2 = gen.encode_second(tape, xr)?;
    mean_row_norm_power(tape, z, z2, norm)
}

/// `mean ‖G_e(x; φ) − G_e(x̃; φ̃)‖_ℓ^ℓ`; needs the second encoder.
pub fn enc_loss(tape: &mut Tape, x: Var, gen: &BoundGenerator, norm: Norm) -> Result<Var> {
    if gen.second_encoder.is_none() {
        return Err(Error::Variant("encoding loss needs a second encoder".into()));
    }
    let z = gen.encode(tape, x)?;
    let xr = gen.decode(tape, z)?;
    enc_term(tape, z, xr, gen, norm)
}

/// The weighted generator objective and its parts. Terms whose weight is
/// zero are never built.
#[derive(Clone, Copy, Debug)]
pub struct CompositeLoss {
    pub total: Var,
    pub adversarial: Option<Var>,
    pub reconstruction: Option<Var>,
    pub discriminative: Option<Var>,
    pub encoding: Option<Var>,
}

/// `α₁ L_a + α₂ L_r + α₃ L_d + α₄ L_e` for one pair.
pub fn composite_generator_loss(
    tape: &mut Tape,
    x: Var,
    prior: Option<Var>,
    gen: &BoundGenerator,
    disc: &BoundDiscriminator,
    weights: &LossWeights,
    variant: Variant,
) -> Result<CompositeLoss> {
    let [a1, a2, a3, a4] = weights.alphas();
    if [a1, a2, a3, a4].iter().all(|&a| a == 0.0) {
        return Err(Error::Config("all loss weights are zero".into()));
    }
    if a4 != 0.0 && gen.second_encoder.is_none() {
        return Err(Error::Variant("encoding loss weight set but generator has no second encoder".into()));
    }

    let needs_recon = a2 != 0.0 || a3 != 0.0 || a4 != 0.0 || (a1 != 0.0 && variant == Variant::Ganomaly);
    let (z, xr) = if needs_recon {
        let z = gen.encode(tape, x)?;
        (Some(z), Some(gen.decode(tape, z)?))
    } else {
        (None, None)
    };

    let adversarial = if a1 != 0.0 {
        Some(match (variant, xr) {
            (Variant::Ganomaly, Some(xr)) => gan_from_reconstruction(tape, x, xr, disc)?,
            _ => self::adversarial(tape, variant, x, prior, gen, disc)?,
        })
    } else {
        None
    };
    let reconstruction = match (a2 != 0.0, xr) {
        (true, Some(xr)) => Some(mean_row_norm_power(tape, x, xr, weights.norm)?),
        _ => None,
    };
    let discriminative = match (a3 != 0.0, z, xr) {
        (true, Some(z), Some(xr)) => Some(disc_term(tape, x, z, xr, gen, disc, weights.norm)?),
        _ => None,
    };
    let encoding = match (a4 != 0.0, z, xr) {
        (true, Some(z), Some(xr)) => Some(enc_term(tape, z, xr, gen, weights.norm)?),
        _ => None,
    };

    let mut total: Option<Var> = None;
    for (w, term) in [(a1, adversarial), (a2, reconstruction), (a3, discriminative), (a4, encoding)] {
        if let Some(t) = term {
            let scaled = tape.scale(t, w)?;
            total = Some(match total {
                Some(acc) => tape.add(acc, scaled)?,
                None => scaled,
            });
        }
    }
    Ok(CompositeLoss {
        total: total.expect("at least one weight is positive"),
        adversarial,
        reconstruction,
        discriminative,
        encoding,
    })
}
