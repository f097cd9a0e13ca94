use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{LossWeights, PriorSpec};
use crate::networks::{Architecture, DiscriminatorBundle, GeneratorBundle, Variant};

/// I generators and J discriminators of one GAN variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub variant: Variant,
    pub architecture: Architecture,
    pub weights: LossWeights,
    pub prior: PriorSpec,
    pub generators: Vec<GeneratorBundle>,
    pub discriminators: Vec<DiscriminatorBundle>,
}

impl EnsembleModel {
    /// Fresh model; all bundles are initialized from one stream seeded by `seed`,
    /// generators first.
    pub fn new(
        variant: Variant,
        architecture: Architecture,
        weights: LossWeights,
        n_generators: usize,
        n_discriminators: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_generators == 0 || n_discriminators == 0 {
            return Err(Error::Config("an ensemble needs at least one generator and one discriminator".into()));
        }
        weights.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let generators = (0..n_generators)
            .map(|_| GeneratorBundle::new(&architecture, variant, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let discriminators = (0..n_discriminators)
            .map(|_| DiscriminatorBundle::new(&architecture, variant, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let model = EnsembleModel {
            variant,
            prior: PriorSpec {
                dim: architecture.latent_dim,
            },
            architecture,
            weights,
            generators,
            discriminators,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_discriminators(&self) -> usize {
        self.discriminators.len()
    }

    pub fn data_dim(&self) -> usize {
        self.architecture.data_dim
    }

    /// Checks that every bundle agrees with the architecture and variant.
    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() || self.discriminators.is_empty() {
            return Err(Error::Format("model has no generators or no discriminators".into()));
        }
        self.architecture.validate()?;
        self.weights.validate()?;
        if self.prior.dim != self.architecture.latent_dim {
            return Err(Error::Format("prior width differs from the latent width".into()));
        }
        let enc = self.architecture.encoder_spec()?;
        let dec = self.architecture.decoder_spec()?;
        let dis = self.architecture.discriminator_spec(self.variant)?;
        for (k, g) in self.generators.iter().enumerate() {
            let second_ok = match &g.second_encoder {
                Some(e) => self.variant.has_second_encoder() && e.spec == enc,
                None => !self.variant.has_second_encoder(),
            };
            if g.encoder.spec != enc || g.decoder.spec != dec || !second_ok {
                return Err(Error::Format(format!("generator {k} does not match the architecture")));
            }
        }
        for (k, d) in self.discriminators.iter().enumerate() {
            if d.net.spec != dis || d.input != self.variant.discriminator_input() {
                return Err(Error::Format(format!("discriminator {k} does not match the architecture")));
            }
        }
        Ok(())
    }
}
