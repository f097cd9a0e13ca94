//! MLP encoders, decoders and discriminators.
//!
//! A discriminator exposes the activation of its last hidden layer next to
//! its scalar output; the discriminative loss and the anomaly score are
//! computed on that vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Gradients, Tape, Tensor, Unary, Var};
use crate::error::{Error, Result};

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    /// Leaky ReLU with slope [`LEAKY_SLOPE`].
    LeakyRelu,
    Sigmoid,
    Tanh,
}

impl Activation {
    fn apply(self, tape: &mut Tape, x: Var) -> Result<Var> {
        match self {
            Activation::Identity => Ok(x),
            Activation::Relu => tape.unary(Unary::Relu, x),
            Activation::LeakyRelu => tape.unary(Unary::LeakyRelu(LEAKY_SLOPE), x),
            Activation::Sigmoid => tape.unary(Unary::Sigmoid, x),
            Activation::Tanh => tape.unary(Unary::Tanh, x),
        }
    }
}

/// Which GAN family a model belongs to. Fixes the adversarial loss, the
/// discriminator's input and output, and whether a second encoder exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// WGAN critic, two-phase training, score `L_r + β L_d`.
    #[serde(rename = "f-anogan")]
    FAnoGan,
    /// BiGAN discriminator on (sample, encoding) pairs, score `L_r + β L_d`.
    #[serde(rename = "egbad")]
    Egbad,
    /// Vanilla GAN on reconstructions plus a second encoder, score `L_e`.
    #[serde(rename = "ganomaly")]
    Ganomaly,
}

impl Variant {
    pub fn discriminator_input(self) -> DiscriminatorInput {
        match self {
            Variant::Egbad => DiscriminatorInput::Joint,
            _ => DiscriminatorInput::Sample,
        }
    }

    pub fn discriminator_output(self) -> Activation {
        match self {
            Variant::FAnoGan => Activation::Identity,
            _ => Activation::Sigmoid,
        }
    }

    pub fn has_second_encoder(self) -> bool {
        self == Variant::Ganomaly
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::FAnoGan => "f-anogan",
            Variant::Egbad => "egbad",
            Variant::Ganomaly => "ganomaly",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f-anogan" => Ok(Variant::FAnoGan),
            "egbad" => Ok(Variant::Egbad),
            "ganomaly" => Ok(Variant::Ganomaly),
            other => Err(Error::Config(format!(
                "unknown variant {other:?} (expected f-anogan, egbad or ganomaly)"
            ))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminatorInput {
    /// A sample `x` of width d.
    Sample,
    /// A sample and its encoding `[x; z]` of width d + d′.
    Joint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    /// Input width, hidden widths, output width.
    pub widths: Vec<usize>,
    pub hidden: Activation,
    pub output: Activation,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, hidden: Activation, output: Activation) -> Result<Self> {
        let spec = MlpSpec { widths, hidden, output };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 3 {
            return Err(Error::Config(format!(
                "an MLP needs at least one hidden layer, got widths {:?}",
                self.widths
            )));
        }
        if self.widths.contains(&0) {
            return Err(Error::Config(format!("zero layer width in {:?}", self.widths)));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `[in × out]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub layers: Vec<Dense>,
}

/// Outputs of a forward pass: the post-activation output and the last
/// hidden layer's activation.
#[derive(Clone, Copy, Debug)]
pub struct MlpOutput {
    pub output: Var,
    pub hidden: Var,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-limit..=limit))
                    .collect();
                Dense {
                    weight: Tensor::from_parts(vec![fan_in, fan_out], weights),
                    bias: Tensor::zeros(&[fan_out]),
                }
            })
            .collect();
        Ok(Mlp { spec, layers })
    }

    pub fn input_width(&self) -> usize {
        self.spec.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.spec.widths.last().unwrap()
    }

    /// Width of the last hidden layer.
    pub fn hidden_width(&self) -> usize {
        self.spec.widths[self.spec.widths.len() - 2]
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.numel() + l.bias.numel()).sum()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias]).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }

    /// Puts the parameters on `tape`, as trainable leaves or as constants.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> BoundMlp {
        let params = self
            .params()
            .into_iter()
            .map(|p| {
                if trainable {
                    tape.leaf(p.clone())
                } else {
                    tape.constant(p.clone())
                }
            })
            .collect();
        BoundMlp {
            params,
            trainable,
            hidden: self.spec.hidden,
            output: self.spec.output,
            input_width: self.input_width(),
        }
    }

    /// Forward pass on a `[batch × in]` matrix (or a single `[in]` row),
    /// returning `(output, last hidden)` as matrices.
    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, Tensor)> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, false);
        let xv = tape.constant(x.as_matrix()?);
        let out = bound.forward(&mut tape, xv)?;
        Ok((tape.value(out.output).clone(), tape.value(out.hidden).clone()))
    }
}

/// An [`Mlp`] whose parameters live on a tape.
#[derive(Clone, Debug)]
pub struct BoundMlp {
    params: Vec<Var>,
    trainable: bool,
    hidden: Activation,
    output: Activation,
    input_width: usize,
}

impl BoundMlp {
    pub fn vars(&self) -> &[Var] {
        &self.params
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<MlpOutput> {
        match tape.shape(x) {
            [_, w] if *w == self.input_width => {}
            s => {
                return Err(Error::shape(
                    "mlp forward",
                    format!("input shape {s:?}, expected [batch, {}]", self.input_width),
                ))
            }
        }
        let n_layers = self.params.len() / 2;
        let mut h = x;
        let mut hidden = x;
        for l in 0..n_layers {
            let pre = tape.matmul(h, self.params[2 * l])?;
            let pre = tape.add_bias(pre, self.params[2 * l + 1])?;
            if l + 1 == n_layers {
                hidden = h;
                h = self.output.apply(tape, pre)?;
            } else {
                h = self.hidden.apply(tape, pre)?;
            }
        }
        Ok(MlpOutput { output: h, hidden })
    }

    /// Copies this binding's gradients into the `grad` slots of `mlp`.
    /// Constant bindings write nothing.
    pub fn write_grads(&self, grads: &Gradients, mlp: &mut Mlp) {
        if !self.trainable {
            return;
        }
        for (var, p) in self.params.iter().zip(mlp.params_mut()) {
            p.grad = Some(grads.wrt(*var).data().to_vec());
        }
    }
}

/// Encoder and decoder widths and activations shared by every bundle of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub data_dim: usize,
    pub latent_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub decoder_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub decoder_output: Activation,
}

impl Architecture {
    /// d→64→d′ encoder, d′→64→d decoder, (input)→64→32→1 discriminator.
    pub fn tabular(data_dim: usize, latent_dim: usize) -> Self {
        Architecture {
            data_dim,
            latent_dim,
            encoder_hidden: vec![64],
            decoder_hidden: vec![64],
            discriminator_hidden: vec![64, 32],
            hidden_activation: Activation::LeakyRelu,
            decoder_output: Activation::Identity,
        }
    }

    fn widths(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend_from_slice(hidden);
        w.push(output);
        w
    }

    pub fn encoder_spec(&self) -> Result<MlpSpec> {
        MlpSpec::new(
            Self::widths(self.data_dim, &self.encoder_hidden, self.latent_dim),
            self.hidden_activation,
            Activation::Identity,
        )
    }

    pub fn decoder_spec(&self) -> Result<MlpSpec> {
        MlpSpec::new(
            Self::widths(self.latent_dim, &self.decoder_hidden, self.data_dim),
            self.hidden_activation,
            self.decoder_output,
        )
    }

    pub fn discriminator_spec(&self, variant: Variant) -> Result<MlpSpec> {
        let input = match variant.discriminator_input() {
            DiscriminatorInput::Sample => self.data_dim,
            DiscriminatorInput::Joint => self.data_dim + self.latent_dim,
        };
        MlpSpec::new(
            Self::widths(input, &self.discriminator_hidden, 1),
            self.hidden_activation,
            variant.discriminator_output(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.data_dim == 0 || self.latent_dim == 0 {
            return Err(Error::Config("data and latent widths must be positive".into()));
        }
        for (name, h) in [
            ("encoder", &self.encoder_hidden),
            ("decoder", &self.decoder_hidden),
            ("discriminator", &self.discriminator_hidden),
        ] {
            if h.is_empty() || h.contains(&0) {
                return Err(Error::Config(format!("{name} needs positive hidden widths, got {h:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorParts {
    pub encoder: bool,
    pub decoder: bool,
    pub second_encoder: bool,
}

impl GeneratorParts {
    pub const ALL: Self = GeneratorParts {
        encoder: true,
        decoder: true,
        second_encoder: true,
    };
    pub const NONE: Self = GeneratorParts {
        encoder: false,
        decoder: false,
        second_encoder: false,
    };
}

/// Encoder φ, decoder ψ and, for GANomaly, a second encoder φ̃.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBundle {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub second_encoder: Option<Mlp>,
}

impl GeneratorBundle {
    pub fn new<R: Rng + ?Sized>(arch: &Architecture, variant: Variant, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let encoder = Mlp::new(arch.encoder_spec()?, rng)?;
        let decoder = Mlp::new(arch.decoder_spec()?, rng)?;
        let second_encoder = if variant.has_second_encoder() {
            Some(Mlp::new(arch.encoder_spec()?, rng)?)
        } else {
            None
        };
        Ok(GeneratorBundle {
            encoder,
            decoder,
            second_encoder,
        })
    }

    pub fn data_dim(&self) -> usize {
        self.encoder.input_width()
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.output_width()
    }

    pub fn bind(&self, tape: &mut Tape, trainable: GeneratorParts) -> BoundGenerator {
        BoundGenerator {
            encoder: self.encoder.bind(tape, trainable.encoder),
            decoder: self.decoder.bind(tape, trainable.decoder),
            second_encoder: self
                .second_encoder
                .as_ref()
                .map(|e| e.bind(tape, trainable.second_encoder)),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.encoder.parameter_count()
            + self.decoder.parameter_count()
            + self.second_encoder.as_ref().map_or(0, Mlp::parameter_count)
    }

    pub fn encode(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.encoder.forward(x)?.0)
    }

    pub fn decode(&self, z: &Tensor) -> Result<Tensor> {
        Ok(self.decoder.forward(z)?.0)
    }

    pub fn reconstruct(&self, x: &Tensor) -> Result<Tensor> {
        self.decode(&self.encode(x)?)
    }
}

#[derive(Clone, Debug)]
pub struct BoundGenerator {
    pub encoder: BoundMlp,
    pub decoder: BoundMlp,
    pub second_encoder: Option<BoundMlp>,
}

impl BoundGenerator {
    pub fn encode(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        Ok(self.encoder.forward(tape, x)?.output)
    }

    pub fn decode(&self, tape: &mut Tape, z: Var) -> Result<Var> {
        Ok(self.decoder.forward(tape, z)?.output)
    }

    pub fn reconstruct(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let z = self.encode(tape, x)?;
        self.decode(tape, z)
    }

    pub fn encode_second(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let enc = self
            .second_encoder
            .as_ref()
            .ok_or_else(|| Error::Variant("generator has no second encoder".into()))?;
        Ok(enc.forward(tape, x)?.output)
    }

    pub fn write_grads(&self, grads: &Gradients, gen: &mut GeneratorBundle) {
        self.encoder.write_grads(grads, &mut gen.encoder);
        self.decoder.write_grads(grads, &mut gen.decoder);
        if let (Some(b), Some(m)) = (&self.second_encoder, gen.second_encoder.as_mut()) {
            b.write_grads(grads, m);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorBundle {
    pub net: Mlp,
    pub input: DiscriminatorInput,
}

impl DiscriminatorBundle {
    pub fn new<R: Rng + ?Sized>(arch: &Architecture, variant: Variant, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        Ok(DiscriminatorBundle {
            net: Mlp::new(arch.discriminator_spec(variant)?, rng)?,
            input: variant.discriminator_input(),
        })
    }

    /// True for the identity-output WGAN critic.
    pub fn is_critic(&self) -> bool {
        self.net.spec.output == Activation::Identity
    }

    pub fn input_width(&self) -> usize {
        self.net.input_width()
    }

    pub fn hidden_width(&self) -> usize {
        self.net.hidden_width()
    }

    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> BoundDiscriminator {
        BoundDiscriminator {
            net: self.net.bind(tape, trainable),
            input: self.input,
            critic: self.is_critic(),
        }
    }

    /// `(u, h)` for a batch of inputs of the variant's input width.
    pub fn discriminate(&self, input: &Tensor) -> Result<(Tensor, Tensor)> {
        self.net.forward(input)
    }

    pub fn clip(&mut self, c: f64) {
        for p in self.net.params_mut() {
            p.clamp_abs(c);
        }
    }

    pub fn max_abs_param(&self) -> f64 {
        self.net.params().iter().map(|p| p.max_abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct BoundDiscriminator {
    pub net: BoundMlp,
    pub input: DiscriminatorInput,
    pub critic: bool,
}

impl BoundDiscriminator {
    /// Scalar output `u` (`[batch × 1]`) and last hidden vector `h` (`[batch × m]`).
    pub fn discriminate(&self, tape: &mut Tape, input: Var) -> Result<(Var, Var)> {
        let out = self.net.forward(tape, input)?;
        Ok((out.output, out.hidden))
    }
}

/// `[x; z]` with `x` first, row by row.
pub fn concat_sample_encoding(x: &Tensor, z: &Tensor) -> Result<Tensor> {
    let (x, z) = (x.as_matrix()?, z.as_matrix()?);
    if x.rows() != z.rows() {
        return Err(Error::shape(
            "concat_sample_encoding",
            format!("{} samples vs {} encodings", x.rows(), z.rows()),
        ));
    }
    let mut tape = Tape::new();
    let (a, b) = (tape.constant(x), tape.constant(z));
    let c = tape.concat_cols(a, b)?;
    Ok(tape.value(c).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn spec_requires_hidden_layer() {
        assert!(MlpSpec::new(vec![2, 1], Activation::Relu, Activation::Identity).is_err());
        assert!(MlpSpec::new(vec![2, 0, 1], Activation::Relu, Activation::Identity).is_err());
        let s = MlpSpec::new(vec![3, 5, 2], Activation::Relu, Activation::Identity).unwrap();
        assert_eq!(s.parameter_count(), 3 * 5 + 5 + 5 * 2 + 2);
    }

    #[test]
    fn zero_final_layer_gives_bias() {
        let spec = MlpSpec::new(vec![3, 4, 2], Activation::Tanh, Activation::Identity).unwrap();
        let mut mlp = Mlp::new(spec, &mut rng()).unwrap();
        let last = mlp.layers.last_mut().unwrap();
        last.weight.set_data(vec![0.0; 8]).unwrap();
        last.bias.set_data(vec![0.25, -1.5]).unwrap();
        let x = Tensor::matrix(2, 3, vec![1., 2., 3., -4., 5., 0.5]).unwrap();
        let (out, _) = mlp.forward(&x).unwrap();
        assert_eq!(out.data(), &[0.25, -1.5, 0.25, -1.5]);
    }

    #[test]
    fn hand_set_encoder_sums_inputs() {
        // 2 → 1 → 1 with identity-like weights on non-negative inputs.
        let spec = MlpSpec::new(vec![2, 1, 1], Activation::Relu, Activation::Identity).unwrap();
        let mut mlp = Mlp::new(spec, &mut rng()).unwrap();
        mlp.layers[0].weight.set_data(vec![1.0, 1.0]).unwrap();
        mlp.layers[1].weight.set_data(vec![1.0]).unwrap();
        let x = Tensor::vector(vec![0.5, 2.0]).unwrap();
        let (z, h) = mlp.forward(&x).unwrap();
        assert_eq!(z.data(), &[2.5]);
        assert_eq!(h.data(), &[2.5]);
    }

    #[test]
    fn bundle_widths_follow_variant() {
        let arch = Architecture::tabular(5, 3);
        for variant in [Variant::FAnoGan, Variant::Egbad, Variant::Ganomaly] {
            let g = GeneratorBundle::new(&arch, variant, &mut rng()).unwrap();
            let d = DiscriminatorBundle::new(&arch, variant, &mut rng()).unwrap();
            assert_eq!(g.encoder.output_width(), g.decoder.input_width());
            assert_eq!(g.second_encoder.is_some(), variant == Variant::Ganomaly);
            let expected_in = if variant == Variant::Egbad { 8 } else { 5 };
            assert_eq!(d.input_width(), expected_in);
            assert_eq!(d.net.output_width(), 1);
            assert_eq!(d.hidden_width(), 32);
            assert_eq!(d.is_critic(), variant == Variant::FAnoGan);
        }
    }

    #[test]
    fn second_encoder_is_independent() {
        let arch = Architecture::tabular(4, 2);
        let g = GeneratorBundle::new(&arch, Variant::Ganomaly, &mut rng()).unwrap();
        let second = g.second_encoder.as_ref().unwrap();
        assert_eq!(second.spec, g.encoder.spec);
        assert_ne!(second.layers[0].weight, g.encoder.layers[0].weight);
    }

    #[test]
    fn parameter_count_matches_arithmetic() {
        let arch = Architecture::tabular(6, 4);
        let g = GeneratorBundle::new(&arch, Variant::Ganomaly, &mut rng()).unwrap();
        let enc = 6 * 64 + 64 + 64 * 4 + 4;
        let dec = 4 * 64 + 64 + 64 * 6 + 6;
        assert_eq!(g.parameter_count(), 2 * enc + dec);
        let d = DiscriminatorBundle::new(&arch, Variant::Egbad, &mut rng()).unwrap();
        assert_eq!(d.net.parameter_count(), 10 * 64 + 64 + 64 * 32 + 32 + 32 + 1);
    }

    #[test]
    fn sigmoid_output_in_unit_interval_and_deterministic() {
        let arch = Architecture::tabular(3, 2);
        let d = DiscriminatorBundle::new(&arch, Variant::Ganomaly, &mut rng()).unwrap();
        let x = Tensor::matrix(2, 3, vec![100., -50., 3., 0., 0., 0.]).unwrap();
        let (u, h) = d.discriminate(&x).unwrap();
        assert!(u.data().iter().all(|&v| v > 0.0 && v < 1.0 || v == 1.0 || v == 0.0));
        let (u2, h2) = d.discriminate(&x).unwrap();
        assert!(u.bitwise_eq(&u2) && h.bitwise_eq(&h2));
        assert_eq!(h.shape(), &[2, 32]);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let arch = Architecture::tabular(3, 2);
        let g = GeneratorBundle::new(&arch, Variant::Egbad, &mut rng()).unwrap();
        assert!(g.encode(&Tensor::vector(vec![1.0, 2.0]).unwrap()).is_err());
        let d = DiscriminatorBundle::new(&arch, Variant::Egbad, &mut rng()).unwrap();
        assert!(d.discriminate(&Tensor::vector(vec![1.0, 2.0, 3.0]).unwrap()).is_err());
    }

    #[test]
    fn concat_examples() {
        let x = Tensor::vector(vec![1., 2.]).unwrap();
        let z = Tensor::vector(vec![3.]).unwrap();
        let c = concat_sample_encoding(&x, &z).unwrap();
        assert_eq!(c.data(), &[1., 2., 3.]);
        let swapped = concat_sample_encoding(&z, &x).unwrap();
        assert_ne!(c.data(), swapped.data());
        assert_eq!(c.cols(), 3);
    }

    #[test]
    fn reconstruct_preserves_width() {
        let arch = Architecture::tabular(7, 3);
        let g = GeneratorBundle::new(&arch, Variant::FAnoGan, &mut rng()).unwrap();
        let x = Tensor::matrix(2, 7, (0..14).map(|v| v as f64 / 7.0).collect()).unwrap();
        let r = g.reconstruct(&x).unwrap();
        assert_eq!(r.shape(), &[2, 7]);
        assert!(r.bitwise_eq(&g.decode(&g.encode(&x).unwrap()).unwrap()));
    }
}
