//! Labeled tabular datasets: synthetic generators, delimited-text I/O,
//! normalization and the normal-only training split.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Rows with binary labels; label 1 marks an anomaly.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    rows: Tensor,
    labels: Vec<u8>,
    feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(rows: Tensor, labels: Vec<u8>, feature_names: Option<Vec<String>>) -> Result<Self> {
        let rows = rows.as_matrix()?;
        if labels.len() != rows.rows() {
            return Err(Error::Data(format!(
                "{} labels for {} rows",
                labels.len(),
                rows.rows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Data(format!("labels must be 0 or 1, got {bad}")));
        }
        if let Some(names) = &feature_names {
            if names.len() != rows.cols() {
                return Err(Error::Data(format!(
                    "{} feature names for {} columns",
                    names.len(),
                    rows.cols()
                )));
            }
        }
        Ok(LabeledDataset {
            rows,
            labels,
            feature_names,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("dataset has no rows".into()));
        }
        Self::new(Tensor::from_rows(rows)?, labels, None)
    }

    pub fn rows(&self) -> &Tensor {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }

    pub fn n_anomalies(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        self.rows.row(r)
    }

    /// Copy of the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Data("subset would be empty".into()));
        }
        Ok(LabeledDataset {
            rows: self.rows.select_rows(indices)?,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        })
    }

    fn with_rows(&self, rows: Tensor) -> Self {
        LabeledDataset {
            rows,
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    GaussianMixture,
    Ring,
    TwoMoons,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::GaussianMixture => "gaussian-mixture",
            SyntheticKind::Ring => "ring",
            SyntheticKind::TwoMoons => "two-moons",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-mixture" => Ok(SyntheticKind::GaussianMixture),
            "ring" => Ok(SyntheticKind::Ring),
            "two-moons" => Ok(SyntheticKind::TwoMoons),
            other => Err(Error::Config(format!(
                "unknown synthetic kind {other:?} (expected gaussian-mixture, ring or two-moons)"
            ))),
        }
    }
}

pub const RING_RADIUS: f64 = 2.0;
pub const RING_NOISE: f64 = 0.1;
pub const MIXTURE_RADIUS: f64 = 3.0;
pub const MIXTURE_NOISE: f64 = 0.5;
pub const MOONS_NOISE: f64 = 0.1;
/// Standard deviation of the dimensions beyond the first two.
pub const EXTRA_DIM_NOISE: f64 = 0.05;

fn mixture_centers() -> [[f64; 2]; 3] {
    let mut c = [[0.0; 2]; 3];
    for (k, p) in c.iter_mut().enumerate() {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
        *p = [MIXTURE_RADIUS * t.cos(), MIXTURE_RADIUS * t.sin()];
    }
    c
}

fn moon_point(upper: bool, t: f64) -> [f64; 2] {
    if upper {
        [t.cos(), t.sin()]
    } else {
        [1.0 - t.cos(), 0.5 - t.sin()]
    }
}

fn distance_to_moons(p: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..=200 {
        let t = std::f64::consts::PI * k as f64 / 200.0;
        for upper in [true, false] {
            let q = moon_point(upper, t);
            best = best.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
        }
    }
    best
}

fn normal_point<R: Rng>(kind: SyntheticKind, rng: &mut R) -> [f64; 2] {
    let g = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
    match kind {
        SyntheticKind::GaussianMixture => {
            let c = mixture_centers()[rng.random_range(0..3)];
            [c[0] + MIXTURE_NOISE * g(rng), c[1] + MIXTURE_NOISE * g(rng)]
        }
        SyntheticKind::Ring => {
            let t = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            let r = RING_RADIUS + RING_NOISE * g(rng);
            [r * t.cos(), r * t.sin()]
        }
        SyntheticKind::TwoMoons => {
            let t = rng.random_range(0.0..std::f64::consts::PI);
            let p = moon_point(rng.random_bool(0.5), t);
            [p[0] + MOONS_NOISE * g(rng), p[1] + MOONS_NOISE * g(rng)]
        }
    }
}

/// Uniform background point, rejected while it lies too close to the normal structure.
fn anomaly_point<R: Rng>(kind: SyntheticKind, rng: &mut R) -> [f64; 2] {
    loop {
        let p = match kind {
            SyntheticKind::GaussianMixture => [rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)],
            SyntheticKind::Ring => [rng.random_range(-3.5..3.5), rng.random_range(-3.5..3.5)],
            SyntheticKind::TwoMoons => [rng.random_range(-2.0..3.0), rng.random_range(-1.5..2.0)],
        };
        let far = match kind {
            SyntheticKind::GaussianMixture => mixture_centers()
                .iter()
                .all(|c| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() > 3.0 * MIXTURE_NOISE),
            SyntheticKind::Ring => ((p[0] * p[0] + p[1] * p[1]).sqrt() - RING_RADIUS).abs() > 5.0 * RING_NOISE,
            SyntheticKind::TwoMoons => distance_to_moons(p) > 3.0 * MOONS_NOISE,
        };
        if far {
            return p;
        }
    }
}

/// Normals first, then anomalies. Deterministic per seed.
pub fn make_synthetic(
    kind: SyntheticKind,
    n_normal: usize,
    n_anomaly: usize,
    d: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if d < 2 {
        return Err(Error::Config(format!("synthetic data needs d >= 2, got {d}")));
    }
    let n = n_normal + n_anomaly;
    if n == 0 {
        return Err(Error::Config("synthetic dataset would be empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra = Normal::new(0.0, EXTRA_DIM_NOISE).expect("valid normal");
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for k in 0..n {
        let anomalous = k >= n_normal;
        let p = if anomalous {
            anomaly_point(kind, &mut rng)
        } else {
            normal_point(kind, &mut rng)
        };
        data.extend_from_slice(&p);
        data.extend((2..d).map(|_| extra.sample(&mut rng)));
        labels.push(anomalous as u8);
    }
    LabeledDataset::new(Tensor::matrix(n, d, data)?, labels, None)
}

/// Which column holds the labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "#{i}"),
            LabelColumn::Name(n) => write!(f, "{n:?}"),
        }
    }
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

fn parse_number(field: &str, line: u64, column: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("column {column}: {field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("column {column}: non-finite value {field:?}"),
        });
    }
    Ok(v)
}

fn parse_label(field: &str, line: u64) -> Result<u8> {
    match field.trim().parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(Error::Parse {
            line,
            message: format!("label must be 0 or 1, got {field:?}"),
        }),
    }
}

struct Table {
    rows: Tensor,
    labels: Option<Vec<u8>>,
    names: Option<Vec<String>>,
}

fn read_table<R: Read>(input: R, label: Option<&LabelColumn>, delimiter: u8) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .from_reader(input);
    let mut records = rdr.records();
    let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line());
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        Error::Parse {
            line,
            message: e.to_string(),
        }
    };
    let first = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(Error::Data("input has no rows".into())),
    };
    let is_header = first.iter().any(|f| f.trim().parse::<f64>().is_err());
    let header: Option<Vec<String>> = is_header.then(|| first.iter().map(|f| f.trim().to_string()).collect());
    let width = first.len();
    let label_idx = match label {
        None => None,
        Some(LabelColumn::Index(i)) if *i < width => Some(*i),
        Some(l @ LabelColumn::Name(name)) => Some(
            header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::Data(format!("missing label column {l}")))?,
        ),
        Some(l @ LabelColumn::Index(_)) => return Err(Error::Data(format!("missing label column {l}"))),
    };
    let n_features = width - label_idx.is_some() as usize;
    if n_features == 0 {
        return Err(Error::Data("no feature columns".into()));
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut n_rows = 0;
    let mut push = |rec: &csv::StringRecord| -> Result<()> {
        let line = line_of(rec);
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                labels.push(parse_label(field, line)?);
            } else {
                data.push(parse_number(field, line, c)?);
            }
        }
        n_rows += 1;
        Ok(())
    };
    if !is_header {
        push(&first)?;
    }
    for rec in records {
        push(&rec.map_err(csv_err)?)?;
    }
    if n_rows == 0 {
        return Err(Error::Data("input has a header but no data rows".into()));
    }
    let names = header.map(|mut h| {
        if let Some(i) = label_idx {
            h.remove(i);
        }
        h
    });
    Ok(Table {
        rows: Tensor::matrix(n_rows, n_features, data)?,
        labels: label_idx.map(|_| labels),
        names,
    })
}

/// Parses delimited text. A first row that is not entirely numeric is a header;
/// a named label column requires one.
pub fn read_delimited<R: Read>(input: R, label: &LabelColumn, delimiter: u8) -> Result<LabeledDataset> {
    let t = read_table(input, Some(label), delimiter)?;
    LabeledDataset::new(t.rows, t.labels.unwrap_or_default(), t.names)
}

/// Parses delimited text in which every column is a feature.
pub fn read_unlabeled<R: Read>(input: R, delimiter: u8) -> Result<Tensor> {
    Ok(read_table(input, None, delimiter)?.rows)
}

pub fn load_delimited(path: &Path, label: &LabelColumn, delimiter: u8) -> Result<LabeledDataset> {
    read_delimited(File::open(path)?, label, delimiter)
}

/// Writes a header row (feature names, then `label`) and one row per sample.
pub fn write_delimited<W: Write>(dataset: &LabeledDataset, out: W, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    let mut header: Vec<String> = match dataset.feature_names() {
        Some(n) => n.to_vec(),
        None => (0..dataset.dim()).map(|k| format!("f{k}")).collect(),
    };
    header.push("label".into());
    w.write_record(&header).map_err(crate::trainer::csv_io)?;
    for r in 0..dataset.len() {
        let mut rec: Vec<String> = dataset.row(r).iter().map(f64::to_string).collect();
        rec.push(dataset.labels[r].to_string());
        w.write_record(&rec).map_err(crate::trainer::csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_delimited(dataset: &LabeledDataset, path: &Path, delimiter: u8) -> Result<()> {
    write_delimited(dataset, File::create(path)?, delimiter)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    Minmax01,
    Zscore,
    None,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minmax01" => Ok(Normalization::Minmax01),
            "zscore" => Ok(Normalization::Zscore),
            "none" => Ok(Normalization::None),
            other => Err(Error::Config(format!("unknown normalization {other:?}"))),
        }
    }
}

/// Per-feature affine map `x ↦ (x − offset) / scale`.
///
/// `offset`/`scale` hold min and range for `minmax01`, mean and population
/// std for `zscore`. A zero scale marks a constant feature, which maps to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub method: Normalization,
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn identity(dim: usize) -> Self {
        Scaler {
            method: Normalization::None,
            offset: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn fit(rows: &Tensor, method: Normalization) -> Result<Self> {
        let m = rows.as_matrix()?;
        let (n, d) = (m.rows(), m.cols());
        let values = m.data();
        let column = |c: usize| (0..n).map(move |r| values[r * d + c]);
        let (offset, scale) = match method {
            Normalization::None => return Ok(Scaler::identity(d)),
            Normalization::Minmax01 => (0..d)
                .map(|c| {
                    let lo = column(c).fold(f64::INFINITY, f64::min);
                    let hi = column(c).fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi - lo)
                })
                .unzip(),
            Normalization::Zscore => (0..d)
                .map(|c| {
                    let mean = column(c).sum::<f64>() / n as f64;
                    let var = column(c).map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                    (mean, var.sqrt())
                })
                .unzip(),
        };
        Ok(Scaler { method, offset, scale })
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    fn check_width(&self, rows: &Tensor) -> Result<Tensor> {
        let m = rows.as_matrix()?;
        if m.cols() != self.dim() {
            return Err(Error::Data(format!(
                "scaler fitted on {} features, data has {}",
                self.dim(),
                m.cols()
            )));
        }
        Ok(m)
    }

    pub fn apply(&self, rows: &Tensor) -> Result<Tensor> {
        let mut m = self.check_width(rows)?;
        let d = self.dim();
        for (k, v) in m.data_mut().iter_mut().enumerate() {
            let c = k % d;
            *v = if self.scale[c] > 0.0 {
                (*v - self.offset[c]) / self.scale[c]
            } else {
                0.0
            };
        }
        Ok(m)
    }

    pub fn invert(&self, rows: &Tensor) -> Result<Tensor> {
        let mut m = self.check_width(rows)?;
        let d = self.dim();
        for (k, v) in m.data_mut().iter_mut().enumerate() {
            let c = k % d;
            *v = *v * self.scale[c] + self.offset[c];
        }
        Ok(m)
    }

    pub fn apply_dataset(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        Ok(data.with_rows(self.apply(data.rows())?))
    }
}

/// Fits a scaler on `train` and returns the transformed rows with it.
pub fn normalize(train: &LabeledDataset, method: Normalization) -> Result<(LabeledDataset, Scaler)> {
    let scaler = Scaler::fit(train.rows(), method)?;
    Ok((scaler.apply_dataset(train)?, scaler))
}

pub fn apply_scaler(data: &LabeledDataset, scaler: &Scaler) -> Result<LabeledDataset> {
    scaler.apply_dataset(data)
}

/// Row indices of a split; both lists are ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `round(train_frac · n_normal)` normals (at least one) go to train; the
/// remaining normals and every anomaly go to test.
pub fn anomaly_split_indices(labels: &[u8], train_frac: f64, seed: u64) -> Result<SplitIndices> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::Config(format!("train fraction must lie in (0, 1), got {train_frac}")));
    }
    let mut normals: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    if normals.is_empty() {
        return Err(Error::Data("dataset has no normal rows to train on".into()));
    }
    let k = ((train_frac * normals.len() as f64).round() as usize).clamp(1, normals.len());
    normals.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = normals[..k].to_vec();
    train.sort_unstable();
    let mut in_train = vec![false; labels.len()];
    for &i in &train {
        in_train[i] = true;
    }
    let test = (0..labels.len()).filter(|&i| !in_train[i]).collect();
    Ok(SplitIndices { train, test })
}

pub fn anomaly_split(
    dataset: &LabeledDataset,
    train_frac: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let split = anomaly_split_indices(dataset.labels(), train_frac, seed)?;
    let train = dataset.subset(&split.train)?;
    assert!(train.labels().iter().all(|&l| l == 0), "training split holds an anomaly");
    Ok((train, dataset.subset(&split.test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_anomalies_means_all_zero_labels() {
        let ds = make_synthetic(SyntheticKind::TwoMoons, 20, 0, 3, 1).unwrap();
        assert!(ds.labels().iter().all(|&l| l == 0));
        assert_eq!(ds.dim(), 3);
    }

    #[test]
    fn synthetic_is_seeded() {
        for kind in [SyntheticKind::GaussianMixture, SyntheticKind::Ring, SyntheticKind::TwoMoons] {
            let a = make_synthetic(kind, 30, 5, 2, 4).unwrap();
            let b = make_synthetic(kind, 30, 5, 2, 4).unwrap();
            let c = make_synthetic(kind, 30, 5, 2, 5).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
            assert_eq!(a.n_anomalies(), 5);
        }
    }

    #[test]
    fn synthetic_rejects_low_dim_and_unknown_kind() {
        assert!(make_synthetic(SyntheticKind::Ring, 5, 0, 1, 0).is_err());
        assert!("spiral".parse::<SyntheticKind>().is_err());
    }

    #[test]
    fn three_row_file() {
        let text = "a,b,label\n1.5,2,0\n-3,4.25,1\n0,0,0\n";
        let ds = read_delimited(text.as_bytes(), &LabelColumn::default(), b',').unwrap();
        assert_eq!(ds.rows().data(), &[1.5, 2.0, -3.0, 4.25, 0.0, 0.0]);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn headerless_with_index_and_custom_delimiter() {
        let text = "1;0.5;7\n0;0.25;8\n";
        let ds = read_delimited(text.as_bytes(), &LabelColumn::Index(0), b';').unwrap();
        assert_eq!(ds.rows().data(), &[0.5, 7.0, 0.25, 8.0]);
        assert_eq!(ds.labels(), &[1, 0]);
        assert!(ds.feature_names().is_none());
    }

    #[test]
    fn missing_label_column_is_named() {
        let text = "a,b,target\n1,2,0\n";
        let err = read_delimited(text.as_bytes(), &LabelColumn::default(), b',').unwrap_err();
        assert!(err.to_string().contains("\"label\""), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "a,b,label\n1,2,0\n1,x,0\n";
        match read_delimited(text.as_bytes(), &LabelColumn::default(), b',') {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad_label = "a,label\n1,2\n";
        assert!(matches!(
            read_delimited(bad_label.as_bytes(), &LabelColumn::default(), b','),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn minmax_and_constant_features() {
        let ds = LabeledDataset::from_rows(&[vec![0.0, 4.0], vec![10.0, 4.0], vec![5.0, 4.0]], vec![0; 3]).unwrap();
        let (scaled, scaler) = normalize(&ds, Normalization::Minmax01).unwrap();
        assert_eq!(scaled.rows().data(), &[0.0, 0.0, 1.0, 0.0, 0.5, 0.0]);
        let back = scaler.invert(scaled.rows()).unwrap();
        assert_eq!(back.data(), ds.rows().data());
    }

    #[test]
    fn identity_scaler_and_width_check() {
        let ds = LabeledDataset::from_rows(&[vec![3.0, -1.0]], vec![0]).unwrap();
        let s = Scaler::identity(2);
        assert_eq!(apply_scaler(&ds, &s).unwrap(), ds);
        assert!(Scaler::identity(3).apply(ds.rows()).is_err());
    }

    #[test]
    fn split_counts_follow_fraction() {
        let mut labels = vec![0u8; 100];
        labels.extend([1u8; 20]);
        let s = anomaly_split_indices(&labels, 0.75, 3).unwrap();
        assert_eq!(s.train.len(), 75);
        assert_eq!(s.test.len(), 45);
        assert!(s.train.iter().all(|&i| labels[i] == 0));
        assert_eq!(s.test.iter().filter(|&&i| labels[i] == 1).count(), 20);
    }

    #[test]
    fn split_needs_normals_and_valid_fraction() {
        assert!(anomaly_split_indices(&[1, 1], 0.5, 0).is_err());
        assert!(anomaly_split_indices(&[0, 1], 1.0, 0).is_err());
        assert!(anomaly_split_indices(&[0, 1], 0.0, 0).is_err());
    }
}
