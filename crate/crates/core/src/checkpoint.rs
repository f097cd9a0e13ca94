//! JSON checkpoints of a trained ensemble and the scaler fitted with it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::model::EnsembleModel;

pub const FORMAT_TAG: &str = "gan-ensemble-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub model: EnsembleModel,
    pub scaler: Option<Scaler>,
    /// Training seed, when known.
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    format: &'a str,
    version: u32,
    #[serde(flatten)]
    body: &'a Checkpoint,
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
    version: Option<u32>,
}

impl Checkpoint {
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        serde_json::to_writer(
            &mut out,
            &Envelope {
                format: FORMAT_TAG,
                version: FORMAT_VERSION,
                body: self,
            },
        )
        .map_err(|e| Error::Format(e.to_string()))?;
        out.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut text = String::new();
        BufReader::new(input).read_to_string(&mut text)?;
        let header: Header =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("not a checkpoint: {e}")))?;
        match (header.format.as_deref(), header.version) {
            (Some(FORMAT_TAG), Some(FORMAT_VERSION)) => {}
            (Some(FORMAT_TAG), v) => {
                return Err(Error::Format(format!(
                    "unsupported checkpoint version {v:?} (expected {FORMAT_VERSION})"
                )))
            }
            (f, _) => return Err(Error::Format(format!("unrecognized checkpoint header {f:?}"))),
        }
        let ck: Checkpoint =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("corrupt checkpoint: {e}")))?;
        ck.model.validate()?;
        if let Some(s) = &ck.scaler {
            if s.dim() != ck.model.data_dim() || s.scale.len() != s.offset.len() {
                return Err(Error::Format("scaler width does not match the model".into()));
            }
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write(File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(File::open(path)?)
    }
}
