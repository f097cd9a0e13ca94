//! Plain-loop reference implementations used as oracles by the integration
//! tests. Nothing here touches the tape.

#![allow(dead_code)]

pub mod gradsweep;

use gan_ensemble::autodiff::{Norm, Tensor, LOG_EPS};
use gan_ensemble::losses::LossWeights;
use gan_ensemble::model::EnsembleModel;
use gan_ensemble::networks::{
    Activation, Architecture, DiscriminatorBundle, DiscriminatorInput, GeneratorBundle, Mlp, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Row = Vec<f64>;

pub fn activate(act: Activation, v: f64) -> f64 {
    match act {
        Activation::Identity => v,
        Activation::Relu => v.max(0.0),
        Activation::LeakyRelu => {
            if v > 0.0 {
                v
            } else {
                0.2 * v
            }
        }
        Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
        Activation::Tanh => v.tanh(),
    }
}

/// Forward pass of one row; returns `(output, input of the last layer)`.
pub fn mlp_row(mlp: &Mlp, x: &[f64]) -> (Row, Row) {
    let n = mlp.layers.len();
    let mut h = x.to_vec();
    let mut hidden = h.clone();
    for (l, layer) in mlp.layers.iter().enumerate() {
        let (fan_in, fan_out) = (layer.weight.shape()[0], layer.weight.shape()[1]);
        assert_eq!(fan_in, h.len());
        let w = layer.weight.data();
        let b = layer.bias.data();
        let act = if l + 1 == n { mlp.spec.output } else { mlp.spec.hidden };
        let next: Row = (0..fan_out)
            .map(|j| {
                let mut s = 0.0;
                for (k, hk) in h.iter().enumerate() {
                    s += hk * w[k * fan_out + j];
                }
                activate(act, s + b[j])
            })
            .collect();
        if l + 1 == n {
            hidden = h;
        }
        h = next;
    }
    (h, hidden)
}

pub fn norm_power(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match norm {
            Norm::L1 => (x - y).abs(),
            Norm::L2 => (x - y) * (x - y),
        })
        .sum()
}

pub fn rows_of(t: &Tensor) -> Vec<Row> {
    (0..t.rows()).map(|r| t.row(r).to_vec()).collect()
}

pub fn tensor_of(rows: &[Row]) -> Tensor {
    Tensor::from_rows(rows).unwrap()
}

fn clamped_log(v: f64) -> f64 {
    v.max(LOG_EPS).ln()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let all: Vec<f64> = v.collect();
    all.iter().sum::<f64>() / all.len() as f64
}

pub fn encode(gen: &GeneratorBundle, x: &[f64]) -> Row {
    mlp_row(&gen.encoder, x).0
}

pub fn decode(gen: &GeneratorBundle, z: &[f64]) -> Row {
    mlp_row(&gen.decoder, z).0
}

pub fn joined(a: &[f64], b: &[f64]) -> Row {
    a.iter().chain(b).copied().collect()
}

/// Discriminator output and hidden activation for sample `x` paired with
/// encoding `z` when the discriminator is joint.
pub fn discriminate(disc: &DiscriminatorBundle, x: &[f64], z: &[f64]) -> (f64, Row) {
    let input = match disc.input {
        DiscriminatorInput::Sample => x.to_vec(),
        DiscriminatorInput::Joint => joined(x, z),
    };
    let (u, h) = mlp_row(&disc.net, &input);
    (u[0], h)
}

pub fn adv_gan(x: &[Row], gen: &GeneratorBundle, disc: &DiscriminatorBundle) -> f64 {
    let real = mean(x.iter().map(|r| clamped_log(discriminate(disc, r, &[]).0)));
    let fake = mean(x.iter().map(|r| {
        let xr = decode(gen, &encode(gen, r));
        clamped_log(1.0 - discriminate(disc, &xr, &[]).0)
    }));
    real + fake
}

pub fn adv_wgan(x: &[Row], prior: &[Row], gen: &GeneratorBundle, disc: &DiscriminatorBundle) -> f64 {
    let real = mean(x.iter().map(|r| discriminate(disc, r, &[]).0));
    let fake = mean(prior.iter().map(|z| discriminate(disc, &decode(gen, z), &[]).0));
    real - fake
}

pub fn adv_bigan(x: &[Row], prior: &[Row], gen: &GeneratorBundle, disc: &DiscriminatorBundle) -> f64 {
    let real = mean(x.iter().map(|r| clamped_log(discriminate(disc, r, &encode(gen, r)).0)));
    let fake = mean(prior.iter().map(|z| clamped_log(1.0 - discriminate(disc, &decode(gen, z), z).0)));
    real + fake
}

pub fn adversarial(
    variant: Variant,
    x: &[Row],
    prior: &[Row],
    gen: &GeneratorBundle,
    disc: &DiscriminatorBundle,
) -> f64 {
    match variant {
        Variant::FAnoGan => adv_wgan(x, prior, gen, disc),
        Variant::Egbad => adv_bigan(x, prior, gen, disc),
        Variant::Ganomaly => adv_gan(x, gen, disc),
    }
}

/// Per-sample `(L_r, L_d, L_e)`; `L_e` only with a second encoder.
pub fn terms(x: &[f64], gen: &GeneratorBundle, disc: &DiscriminatorBundle, norm: Norm) -> (f64, f64, Option<f64>) {
    let z = encode(gen, x);
    let xr = decode(gen, &z);
    let zr = encode(gen, &xr);
    let (_, h_real) = discriminate(disc, x, &z);
    let (_, h_recon) = discriminate(disc, &xr, &zr);
    let enc = gen
        .second_encoder
        .as_ref()
        .map(|e| norm_power(&z, &mlp_row(e, &xr).0, norm));
    (norm_power(x, &xr, norm), norm_power(&h_real, &h_recon, norm), enc)
}

pub fn recon_loss(x: &[Row], gen: &GeneratorBundle, disc: &DiscriminatorBundle, norm: Norm) -> f64 {
    mean(x.iter().map(|r| terms(r, gen, disc, norm).0))
}

pub fn disc_loss(x: &[Row], gen: &GeneratorBundle, disc: &DiscriminatorBundle, norm: Norm) -> f64 {
    mean(x.iter().map(|r| terms(r, gen, disc, norm).1))
}

pub fn enc_loss(x: &[Row], gen: &GeneratorBundle, disc: &DiscriminatorBundle, norm: Norm) -> f64 {
    mean(x.iter().map(|r| terms(r, gen, disc, norm).2.unwrap()))
}

pub fn composite(
    variant: Variant,
    weights: &LossWeights,
    x: &[Row],
    prior: &[Row],
    gen: &GeneratorBundle,
    disc: &DiscriminatorBundle,
) -> f64 {
    let [a1, a2, a3, a4] = weights.alphas();
    let mut total = 0.0;
    if a1 != 0.0 {
        total += a1 * adversarial(variant, x, prior, gen, disc);
    }
    if a2 != 0.0 {
        total += a2 * recon_loss(x, gen, disc, weights.norm);
    }
    if a3 != 0.0 {
        total += a3 * disc_loss(x, gen, disc, weights.norm);
    }
    if a4 != 0.0 {
        total += a4 * enc_loss(x, gen, disc, weights.norm);
    }
    total
}

pub fn pair_score(x: &[f64], gen: &GeneratorBundle, disc: &DiscriminatorBundle, variant: Variant, weights: &LossWeights) -> f64 {
    let (r, d, e) = terms(x, gen, disc, weights.norm);
    match variant {
        Variant::Ganomaly => e.unwrap(),
        _ => r + weights.beta * d,
    }
}

/// Small architecture for fast tests.
pub fn small_arch(data_dim: usize, latent_dim: usize) -> Architecture {
    Architecture {
        data_dim,
        latent_dim,
        encoder_hidden: vec![5],
        decoder_hidden: vec![4],
        discriminator_hidden: vec![6, 3],
        hidden_activation: Activation::LeakyRelu,
        decoder_output: Activation::Identity,
    }
}

pub fn small_model(variant: Variant, n_gen: usize, n_disc: usize, data_dim: usize, seed: u64) -> EnsembleModel {
    EnsembleModel::new(
        variant,
        small_arch(data_dim, 2),
        LossWeights::for_variant(variant),
        n_gen,
        n_disc,
        seed,
    )
    .unwrap()
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, range: f64) -> Vec<Row> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-range..range)).collect())
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Mann-Whitney AUROC by exhaustive pair counting, ties worth one half.
pub fn auroc_by_pairs(scores: &[f64], labels: &[u8]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0usize;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1;
            if si > sj {
                credit += 1.0;
            } else if si == sj {
                credit += 0.5;
            }
        }
    }
    credit / pairs as f64
}
