//! Per-pair and ensemble anomaly scores.
//!
//! For f-AnoGAN and EGBAD a pair scores a sample as `L_r + β L_d`; GANomaly
//! uses `L_e`. The ensemble score is the plain mean over all I·J pairs.
//! Higher means more anomalous.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::autodiff::{Norm, Tape, Tensor};
use crate::error::{Error, Result};
use crate::losses::LossWeights;
use crate::model::EnsembleModel;
use crate::networks::{DiscriminatorBundle, DiscriminatorInput, GeneratorBundle, GeneratorParts, Variant};
use crate::trainer::csv_io;

const CHUNK_ROWS: usize = 2048;

/// Per-sample loss terms of one pair, before weighting.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTerms {
    pub reconstruction: Vec<f64>,
    pub discriminative: Vec<f64>,
    /// Present for GANomaly only.
    pub encoding: Option<Vec<f64>>,
}

impl ScoreTerms {
    /// Anomaly scores for this pair under `variant` and `beta`.
    pub fn combine(&self, variant: Variant, beta: f64) -> Vec<f64> {
        match (variant, &self.encoding) {
            (Variant::Ganomaly, Some(e)) => e.clone(),
            _ => self
                .reconstruction
                .iter()
                .zip(&self.discriminative)
                .map(|(r, d)| r + beta * d)
                .collect(),
        }
    }
}

fn row_norm_powers(a: &Tensor, b: &Tensor, norm: Norm) -> Vec<f64> {
    (0..a.rows())
        .map(|r| {
            let it = a.row(r).iter().zip(b.row(r)).map(|(x, y)| x - y);
            match norm {
                Norm::L1 => it.map(f64::abs).sum(),
                Norm::L2 => it.map(|d| d * d).sum(),
            }
        })
        .collect()
}

fn check_samples(samples: &Tensor, gen: &GeneratorBundle) -> Result<Tensor> {
    let m = samples.as_matrix()?;
    if m.cols() != gen.data_dim() {
        return Err(Error::Data(format!(
            "samples have {} features, model expects {}",
            m.cols(),
            gen.data_dim()
        )));
    }
    Ok(m)
}

/// Loss terms of pair `(gen, disc)` for every row of `samples`.
pub fn pair_terms(
    samples: &Tensor,
    gen: &GeneratorBundle,
    disc: &DiscriminatorBundle,
    variant: Variant,
    norm: Norm,
) -> Result<ScoreTerms> {
    let samples = check_samples(samples, gen)?;
    if variant.has_second_encoder() != gen.second_encoder.is_some()
        || variant.discriminator_input() != disc.input
    {
        return Err(Error::Variant(format!("bundles do not belong to a {variant} model")));
    }
    let n = samples.rows();
    let mut out = ScoreTerms {
        reconstruction: Vec::with_capacity(n),
        discriminative: Vec::with_capacity(n),
        encoding: variant.has_second_encoder().then(|| Vec::with_capacity(n)),
    };
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK_ROWS).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let chunk = samples.select_rows(&idx)?;

        let mut tape = Tape::new();
        let g = gen.bind(&mut tape, GeneratorParts::NONE);
        let d = disc.bind(&mut tape, false);
        let x = tape.constant(chunk);
        let z = g.encode(&mut tape, x)?;
        let xr = g.decode(&mut tape, z)?;
        let (real_in, recon_in) = match disc.input {
            DiscriminatorInput::Sample => (x, xr),
            DiscriminatorInput::Joint => {
                let zr = g.encode(&mut tape, xr)?;
                (tape.concat_cols(x, z)?, tape.concat_cols(xr, zr)?)
            }
        };
        let (_, h_real) = d.discriminate(&mut tape, real_in)?;
        let (_, h_recon) = d.discriminate(&mut tape, recon_in)?;

        out.reconstruction
            .extend(row_norm_powers(tape.value(x), tape.value(xr), norm));
        out.discriminative
            .extend(row_norm_powers(tape.value(h_real), tape.value(h_recon), norm));
        if let Some(enc) = out.encoding.as_mut() {
            let z2 = g.encode_second(&mut tape, xr)?;
            enc.extend(row_norm_powers(tape.value(z), tape.value(z2), norm));
        }
        start = end;
    }
    Ok(out)
}

/// Scores of one pair for every row of `samples`.
pub fn pair_scores(
    samples: &Tensor,
    gen: &GeneratorBundle,
    disc: &DiscriminatorBundle,
    weights: &LossWeights,
    variant: Variant,
) -> Result<Vec<f64>> {
    Ok(pair_terms(samples, gen, disc, variant, weights.norm)?.combine(variant, weights.beta))
}

/// Score of one pair for a single sample.
pub fn pair_score(
    sample: &Tensor,
    gen: &GeneratorBundle,
    disc: &DiscriminatorBundle,
    weights: &LossWeights,
    variant: Variant,
) -> Result<f64> {
    let scores = pair_scores(sample, gen, disc, weights, variant)?;
    match scores.as_slice() {
        [s] => Ok(*s),
        _ => Err(Error::shape("pair_score", format!("expected one sample, got {}", scores.len()))),
    }
}

/// Terms for every pair, in generator-major order `(0,0), (0,1), …`.
pub fn all_pair_terms(samples: &Tensor, model: &EnsembleModel) -> Result<Vec<((usize, usize), ScoreTerms)>> {
    let mut out = Vec::with_capacity(model.n_generators() * model.n_discriminators());
    for (i, g) in model.generators.iter().enumerate() {
        for (j, d) in model.discriminators.iter().enumerate() {
            out.push(((i, j), pair_terms(samples, g, d, model.variant, model.weights.norm)?));
        }
    }
    Ok(out)
}

/// Mean over pairs of per-pair score rows.
pub fn average_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.first().map_or(0, Vec::len);
    let k = rows.len() as f64;
    (0..n)
        .map(|s| rows.iter().map(|r| r[s]).sum::<f64>() / k)
        .collect()
}

/// Ensemble score `(1/IJ) Σᵢ Σⱼ A(x; i, j)` of a single sample.
pub fn ensemble_score(sample: &Tensor, model: &EnsembleModel) -> Result<f64> {
    let report = score_dataset(sample, model, None)?;
    match report.scores.as_slice() {
        [s] => Ok(*s),
        _ => Err(Error::shape("ensemble_score", "expected one sample")),
    }
}

/// Scores for a batch of samples with the per-pair breakdown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub variant: Variant,
    pub generators: usize,
    pub discriminators: usize,
    pub beta: f64,
    pub norm: Norm,
    pub seed: Option<u64>,
    /// Ensemble score per sample.
    pub scores: Vec<f64>,
    /// Pair order used by `pair_scores`.
    pub pairs: Vec<(usize, usize)>,
    /// One row of per-sample scores per pair.
    pub pair_scores: Vec<Vec<f64>>,
    pub labels: Option<Vec<u8>>,
}

impl AnomalyReport {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Writes `sample_index,label,score,pair_i_j…` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["sample_index".to_string(), "label".into(), "score".into()];
        header.extend(self.pairs.iter().map(|(i, j)| format!("pair_{i}_{j}")));
        w.write_record(&header).map_err(csv_io)?;
        for s in 0..self.scores.len() {
            let mut rec = vec![
                s.to_string(),
                self.labels.as_ref().map(|l| l[s].to_string()).unwrap_or_default(),
                self.scores[s].to_string(),
            ];
            rec.extend(self.pair_scores.iter().map(|row| row[s].to_string()));
            w.write_record(&rec).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Structured summary of how the scores were produced.
    pub fn summary_toml(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary {
            variant: Variant,
            generators: usize,
            discriminators: usize,
            beta: f64,
            norm: Norm,
            #[serde(skip_serializing_if = "Option::is_none")]
            seed: Option<u64>,
            samples: usize,
        }
        toml::to_string(&Summary {
            variant: self.variant,
            generators: self.generators,
            discriminators: self.discriminators,
            beta: self.beta,
            norm: self.norm,
            seed: self.seed,
            samples: self.scores.len(),
        })
        .map_err(|e| Error::Format(e.to_string()))
    }
}

/// Scores and labels read back from a report CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    pub scores: Vec<f64>,
    pub labels: Option<Vec<u8>>,
}

/// Reads the `score` and `label` columns of a report CSV.
pub fn read_score_table<R: Read>(input: R) -> Result<ScoreTable> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(csv_io)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("score file has no {name:?} column")))
    };
    let (score_col, label_col) = (col("score")?, col("label")?);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut all_labeled = true;
    for (k, rec) in rdr.records().enumerate() {
        let line = k as u64 + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let s: f64 = rec[score_col].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad score {:?}", &rec[score_col]),
        })?;
        scores.push(s);
        match rec[label_col].trim() {
            "" => all_labeled = false,
            "0" => labels.push(0),
            "1" => labels.push(1),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("label must be 0 or 1, got {other:?}"),
                })
            }
        }
    }
    Ok(ScoreTable {
        scores,
        labels: all_labeled.then_some(labels),
    })
}

/// Scores every row of `samples`. `beta` overrides the model's score weight.
pub fn score_dataset(samples: &Tensor, model: &EnsembleModel, beta: Option<f64>) -> Result<AnomalyReport> {
    let beta = beta.unwrap_or(model.weights.beta);
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Config(format!("beta must be finite and non-negative, got {beta}")));
    }
    let terms = all_pair_terms(samples, model)?;
    let pairs = terms.iter().map(|(p, _)| *p).collect();
    let pair_scores: Vec<Vec<f64>> = terms
        .iter()
        .map(|(_, t)| t.combine(model.variant, beta))
        .collect();
    Ok(AnomalyReport {
        variant: model.variant,
        generators: model.n_generators(),
        discriminators: model.n_discriminators(),
        beta,
        norm: model.weights.norm,
        seed: None,
        scores: average_rows(&pair_scores),
        pairs,
        pair_scores,
        labels: None,
    })
}
