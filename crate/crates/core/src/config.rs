//! Run configuration: variant defaults, a TOML file and command-line
//! overrides merged in that order of increasing precedence.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::data::{LabelColumn, Normalization, SyntheticKind};
use crate::error::{Error, Result};
use crate::losses::LossWeights;
use crate::networks::{Activation, Architecture, Variant};
use crate::trainer::TrainConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub latent_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub decoder_hidden: Vec<usize>,
    /// The last entry is the width of the hidden vector used by `L_d`.
    pub discriminator_hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub decoder_output: Activation,
}

impl NetworkConfig {
    pub fn for_variant(variant: Variant) -> Self {
        let latent_dim = match variant {
            Variant::FAnoGan | Variant::Ganomaly => 16,
            Variant::Egbad => 32,
        };
        NetworkConfig {
            latent_dim,
            encoder_hidden: vec![64],
            decoder_hidden: vec![64],
            discriminator_hidden: vec![64, 32],
            hidden_activation: Activation::LeakyRelu,
            decoder_output: Activation::Identity,
        }
    }

    pub fn architecture(&self, data_dim: usize) -> Architecture {
        Architecture {
            data_dim,
            latent_dim: self.latent_dim,
            encoder_hidden: self.encoder_hidden.clone(),
            decoder_hidden: self.decoder_hidden.clone(),
            discriminator_hidden: self.discriminator_hidden.clone(),
            hidden_activation: self.hidden_activation,
            decoder_output: self.decoder_output,
        }
    }
}

/// Trainer fields of a run; the seed lives at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerSettings {
    pub max_iter: usize,
    pub batch_size: usize,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub clip: f64,
    pub n_critic: usize,
    pub convergence_tol: f64,
    pub convergence_window: usize,
    pub phase_split: f64,
}

impl TrainerSettings {
    pub fn for_variant(variant: Variant) -> Self {
        let t = TrainConfig::for_variant(variant);
        TrainerSettings {
            max_iter: t.max_iter,
            batch_size: t.batch_size,
            lr_generator: t.lr_generator,
            lr_discriminator: t.lr_discriminator,
            clip: t.clip,
            n_critic: t.n_critic,
            convergence_tol: t.convergence_tol,
            convergence_window: t.convergence_window,
            phase_split: t.phase_split,
        }
    }

    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            max_iter: self.max_iter,
            batch_size: self.batch_size,
            lr_generator: self.lr_generator,
            lr_discriminator: self.lr_discriminator,
            clip: self.clip,
            n_critic: self.n_critic,
            seed,
            convergence_tol: self.convergence_tol,
            convergence_window: self.convergence_window,
            phase_split: self.phase_split,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n_normal: usize,
    pub n_anomaly: usize,
    pub dim: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub label_column: LabelColumn,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
}

fn default_delimiter() -> String {
    ",".into()
}

/// Parses a one-byte delimiter; `\t` and `tab` name the tab character.
pub fn delimiter_byte(s: &str) -> Result<u8> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(Error::Config(format!("delimiter must be a single ASCII character, got {s:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<FileSpec>,
    pub normalization: Normalization,
    pub train_fraction: f64,
    pub split_seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            synthetic: Some(SyntheticSpec {
                kind: SyntheticKind::Ring,
                n_normal: 1000,
                n_anomaly: 100,
                dim: 2,
                seed: 7,
            }),
            file: None,
            normalization: Normalization::Minmax01,
            train_fraction: 0.75,
            split_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub variant: Variant,
    pub generators: usize,
    pub discriminators: usize,
    /// Seeds model initialization and the training streams.
    pub seed: u64,
    /// Factor on `trainer.max_iter` when the ensemble has more than one pair.
    pub ensemble_iter_multiplier: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub weights: LossWeights,
    pub network: NetworkConfig,
    pub trainer: TrainerSettings,
    pub data: DataConfig,
}

impl RunConfig {
    pub fn for_variant(variant: Variant) -> Self {
        RunConfig {
            variant,
            generators: 3,
            discriminators: 3,
            seed: 0,
            ensemble_iter_multiplier: 3,
            output_dir: None,
            weights: LossWeights::for_variant(variant),
            network: NetworkConfig::for_variant(variant),
            trainer: TrainerSettings::for_variant(variant),
            data: DataConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.generators == 0 || self.discriminators == 0 {
            return bad("generators and discriminators must be at least 1");
        }
        if self.ensemble_iter_multiplier == 0 {
            return bad("ensemble_iter_multiplier must be at least 1");
        }
        self.weights.validate()?;
        if self.weights.encoding > 0.0 && !self.variant.has_second_encoder() {
            return bad("weights.encoding needs the ganomaly variant");
        }
        self.network.architecture(1).validate()?;
        self.train_config().validate()?;
        let d = &self.data;
        match (&d.synthetic, &d.file) {
            (Some(s), None) => {
                if s.dim < 2 {
                    return bad("data.synthetic.dim must be at least 2");
                }
                if s.n_normal == 0 {
                    return bad("data.synthetic.n_normal must be positive");
                }
            }
            (None, Some(f)) => {
                delimiter_byte(&f.delimiter)?;
            }
            _ => return bad("exactly one of [data.synthetic] and [data.file] must be given"),
        }
        if !(d.train_fraction > 0.0 && d.train_fraction < 1.0) {
            return bad("data.train_fraction must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn n_pairs(&self) -> usize {
        self.generators * self.discriminators
    }

    /// Trainer settings with the ensemble iteration multiplier applied.
    pub fn train_config(&self) -> TrainConfig {
        let mut t = self.trainer.with_seed(self.seed);
        if self.n_pairs() > 1 {
            t.max_iter *= self.ensemble_iter_multiplier;
        }
        t
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses a `key.path=value` override. Values that are not valid TOML are
/// taken as strings.
pub fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {s:?} is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Override whose value is always a string.
pub fn string_override(key: &str, value: &str) -> (String, toml::Value) {
    (key.to_string(), toml::Value::String(value.to_string()))
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// A file naming `[data.file]` replaces the default synthetic source and vice versa.
fn drop_replaced_source(base: &mut toml::Table, top: &toml::Table) {
    let Some(toml::Value::Table(top_data)) = top.get("data") else {
        return;
    };
    let Some(toml::Value::Table(base_data)) = base.get_mut("data") else {
        return;
    };
    for (given, other) in [("file", "synthetic"), ("synthetic", "file")] {
        if top_data.contains_key(given) && !top_data.contains_key(other) {
            base_data.remove(other);
        }
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?}: {p:?} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Resolves defaults ← `file_text` ← `overrides` into a validated config.
pub fn resolve(file_text: Option<&str>, overrides: &[(String, toml::Value)]) -> Result<RunConfig> {
    let file: toml::Table = match file_text {
        Some(t) => toml::from_str(t).map_err(|e| Error::Config(format!("config file: {e}")))?,
        None => toml::Table::new(),
    };
    let mut top = file;
    let mut over = toml::Table::new();
    for (k, v) in overrides {
        set_path(&mut over, k, v.clone())?;
    }
    let variant_of = |t: &toml::Table| -> Result<Option<Variant>> {
        match t.get("variant") {
            None => Ok(None),
            Some(toml::Value::String(s)) => s.parse().map(Some),
            Some(other) => Err(Error::Config(format!("variant must be a string, got {other}"))),
        }
    };
    let variant = match variant_of(&over)? {
        Some(v) => v,
        None => variant_of(&top)?.unwrap_or(Variant::FAnoGan),
    };
    let mut base = toml::Table::try_from(RunConfig::for_variant(variant))
        .map_err(|e| Error::Config(e.to_string()))?;
    drop_replaced_source(&mut base, &top);
    merge(&mut base, std::mem::take(&mut top));
    drop_replaced_source(&mut base, &over);
    merge(&mut base, over);
    let cfg: RunConfig = base.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
