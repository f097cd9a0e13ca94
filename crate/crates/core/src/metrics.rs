//! Ranking and thresholded detection metrics. Label 1 is the positive
//! (anomalous) class; higher scores mean more anomalous.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Data("no scores".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Data("scores must be finite".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Data("labels must be 0 or 1".into()));
    }
    Ok(())
}

fn class_counts(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    check_inputs(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Data("both classes must be present".into()));
    }
    Ok((pos, neg))
}

/// Indices sorted by descending score.
fn descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Area under the ROC curve as `P(s⁺ > s⁻) + ½ P(s⁺ = s⁻)`, via mid-ranks.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their mean
        let mid = (start + 1 + end) as f64 / 2.0;
        let tied_pos = idx[start..end].iter().filter(|&&i| labels[i] == 1).count();
        rank_sum += mid * tied_pos as f64;
        start = end;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// `(fpr, tpr)` points from `(0, 0)` to `(1, 1)`, one per distinct score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fpr", "tpr"]).map_err(crate::trainer::csv_io)?;
        for (f, t) in &self.points {
            w.write_record([f.to_string(), t.to_string()])
                .map_err(crate::trainer::csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (pos, neg) = class_counts(scores, labels)?;
    let idx = descending(scores);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < idx.len() {
        let s = scores[idx[k]];
        while k < idx.len() && scores[idx[k]] == s {
            if labels[idx[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(RocCurve { points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub threshold: f64,
}

/// Flags a sample as anomalous when `score >= threshold`.
pub fn prf_at_threshold(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ClassificationSummary> {
    check_inputs(scores, labels)?;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationSummary {
        precision,
        recall,
        f1,
        threshold,
    })
}

/// Number of samples the contamination rule aims to flag.
pub fn contamination_count(n: usize, contamination: f64) -> usize {
    let raw = contamination * n as f64;
    // absorb representation error such as 0.07 * 100 = 7.000000000000001
    let k = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    };
    (k as usize).clamp(1, n)
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

/// Threshold flagging the top `⌈contamination · n⌉` scores. When ties make
/// that count unreachable, the threshold moves up to flag fewer.
pub fn threshold_by_contamination(scores: &[f64], contamination: f64) -> Result<f64> {
    if !(contamination > 0.0 && contamination < 1.0) {
        return Err(Error::Config(format!(
            "contamination must lie in (0, 1), got {contamination}"
        )));
    }
    if scores.is_empty() {
        return Err(Error::Data("no scores".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Data("scores must be finite".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = contamination_count(sorted.len(), contamination);
    let t = sorted[k - 1];
    if k == sorted.len() || sorted[k] < t {
        return Ok(t);
    }
    // sorted[k] == t: the tie group straddles the cut
    Ok(sorted[..k]
        .iter()
        .rev()
        .copied()
        .find(|&s| s > t)
        .unwrap_or_else(|| next_up(t)))
}
