//! Subject-level scoring: segment aggregation, fold ensembling, and the
//! challenge metrics (accuracy, macro-F1, UAR).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::{Segment, SegmentationParams};
use crate::data::{clean_features, subject_segments};
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::manifest::{label_index, SubjectRecord};
use crate::model::Model;
use crate::nn::softmax_probs;

/// Argmax with ties broken to the lowest class index.
pub fn argmax_lowest(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

fn mean_renormalized(vectors: &[Vec<f64>], what: &str) -> Result<Vec<f64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Evaluation(format!("{}: no probability vectors", what)))?;
    let c = first.len();
    let mut out = vec![0.0; c];
    for v in vectors {
        if v.len() != c {
            return Err(Error::Evaluation(format!(
                "{}: probability vectors of length {} and {}",
                what,
                c,
                v.len()
            )));
        }
        for (o, &p) in out.iter_mut().zip(v) {
            *o += p;
        }
    }
    let n = vectors.len() as f64;
    for o in out.iter_mut() {
        *o /= n;
    }
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(Error::Evaluation(format!("{}: degenerate probability mass", what)));
    }
    for o in out.iter_mut() {
        *o /= total;
    }
    Ok(out)
}

/// Mean of a subject's segment-level probability vectors, renormalized.
/// A subject with no usable segments is a hard error, never a silent skip.
pub fn aggregate_subject(segment_probs: &[Vec<f64>]) -> Result<Vec<f64>> {
    mean_renormalized(segment_probs, "subject aggregation")
}

/// Mean of one subject's probability vectors across fold models.
pub fn ensemble_folds(per_fold_probs: &[Vec<f64>]) -> Result<Vec<f64>> {
    mean_renormalized(per_fold_probs, "fold ensembling")
}

/// Counts with rows = true class, cols = predicted class.
pub fn confusion_matrix(preds: &[usize], labels: &[usize], c: usize) -> Result<Vec<Vec<u64>>> {
    if preds.len() != labels.len() {
        return Err(Error::Evaluation(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut cm = vec![vec![0u64; c]; c];
    for (&p, &l) in preds.iter().zip(labels) {
        if p >= c || l >= c {
            return Err(Error::Evaluation(format!(
                "class index out of range: pred {}, label {}, C = {}",
                p, l, c
            )));
        }
        cm[l][p] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// The scalar metrics derived from one confusion matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsSummary {
    pub n_subjects: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub uar: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Accuracy, per-class precision/recall/F1 (zero denominators contribute 0),
/// macro-F1, and UAR from a confusion matrix.
pub fn metrics(cm: &[Vec<u64>]) -> Result<MetricsSummary> {
    let c = cm.len();
    let total: u64 = cm.iter().flatten().sum();
    if c == 0 || total == 0 {
        return Err(Error::Evaluation("empty confusion matrix".into()));
    }
    let trace: u64 = (0..c).map(|i| cm[i][i]).sum();
    let mut per_class = Vec::with_capacity(c);
    for i in 0..c {
        let row: u64 = cm[i].iter().sum();
        let col: u64 = (0..c).map(|j| cm[j][i]).sum();
        let d = cm[i][i] as f64;
        let recall = if row > 0 { d / row as f64 } else { 0.0 };
        let precision = if col > 0 { d / col as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics { precision, recall, f1 });
    }
    let cf = c as f64;
    Ok(MetricsSummary {
        n_subjects: total,
        accuracy: trace as f64 / total as f64,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / cf,
        uar: per_class.iter().map(|m| m.recall).sum::<f64>() / cf,
        per_class,
    })
}

/// One subject's scored outcome.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PredictionRecord {
    pub subject_id: String,
    pub probs: Vec<f64>,
    pub predicted: usize,
    pub true_label: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    FoldAverage,
    FoldEnsemble,
}

impl std::str::FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fold_average" => Ok(EvalMode::FoldAverage),
            "fold_ensemble" => Ok(EvalMode::FoldEnsemble),
            other => Err(Error::InvalidParameter(format!(
                "unknown evaluation mode {} (expected fold_average or fold_ensemble)",
                other
            ))),
        }
    }
}

/// The full evaluation artifact: metrics, confusion matrix (real-valued so
/// that fold averaging stays exact), and run metadata.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsReport {
    pub n_subjects: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub uar: f64,
    pub per_class: Vec<ClassMetrics>,
    pub class_names: Vec<String>,
    pub confusion: Vec<Vec<f64>>,
    pub mode: EvalMode,
    pub seeds: Vec<u64>,
    pub config_digest: String,
}

/// Aggregated probabilities for one subject under one model.
pub fn subject_probs(
    model: &Model<f32>,
    segments: &[Segment],
    feat_cfg: &FeatureConfig,
) -> Result<Vec<f64>> {
    let mut per_segment = Vec::with_capacity(segments.len());
    for seg in segments {
        let feat = clean_features(seg, feat_cfg)?;
        let logits = model.forward(&feat)?;
        per_segment.push(softmax_probs(&logits));
    }
    aggregate_subject(&per_segment)
}

fn summary_from_preds(preds: &[PredictionRecord], c: usize) -> Result<MetricsSummary> {
    let p: Vec<usize> = preds.iter().map(|r| r.predicted).collect();
    let l: Vec<usize> = preds.iter().map(|r| r.true_label).collect();
    metrics(&confusion_matrix(&p, &l, c)?)
}

/// Score a manifest with one or more fold models.
///
/// `fold_average` scores each model separately and reports the arithmetic
/// mean of every metric (and the element-wise mean confusion matrix);
/// `fold_ensemble` averages per-subject probabilities across models first
/// and reports a single score.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    models: &[Model<f32>],
    records: &[SubjectRecord],
    base: &Path,
    class_names: &[String],
    feat_cfg: &FeatureConfig,
    seg_params: &SegmentationParams,
    mode: EvalMode,
    seeds: &[u64],
    config_digest: &str,
) -> Result<(MetricsReport, Vec<PredictionRecord>)> {
    let first = models
        .first()
        .ok_or_else(|| Error::Evaluation("no models to evaluate".into()))?;
    let c = class_names.len();
    if first.cfg.n_classes != c {
        return Err(Error::Evaluation(format!(
            "model predicts {} classes but {} class names given",
            first.cfg.n_classes, c
        )));
    }
    for m in models {
        if m.cfg != first.cfg {
            return Err(Error::Evaluation("fold models disagree on configuration".into()));
        }
    }

    // per subject: segments once, then probs under each model
    let mut labels = Vec::with_capacity(records.len());
    let mut per_model_probs: Vec<Vec<Vec<f64>>> = vec![Vec::new(); models.len()];
    for rec in records {
        let label = label_index(class_names, &rec.label)
            .map_err(|_| Error::Evaluation(format!("unknown label {}", rec.label)))?;
        let segs = subject_segments(rec, label, base, seg_params)?;
        if segs.is_empty() {
            return Err(Error::Evaluation(format!(
                "subject {} has no usable segments",
                rec.subject_id
            )));
        }
        labels.push(label);
        for (m, probs) in models.iter().zip(per_model_probs.iter_mut()) {
            probs.push(subject_probs(m, &segs, feat_cfg)?);
        }
    }

    let make_preds = |probs: &[Vec<f64>]| -> Vec<PredictionRecord> {
        records
            .iter()
            .zip(probs)
            .zip(&labels)
            .map(|((rec, p), &l)| PredictionRecord {
                subject_id: rec.subject_id.clone(),
                probs: p.clone(),
                predicted: argmax_lowest(p),
                true_label: l,
            })
            .collect()
    };

    match mode {
        EvalMode::FoldEnsemble => {
            let mut ensembled = Vec::with_capacity(records.len());
            for i in 0..records.len() {
                let per_fold: Vec<Vec<f64>> =
                    per_model_probs.iter().map(|m| m[i].clone()).collect();
                ensembled.push(ensemble_folds(&per_fold)?);
            }
            let preds = make_preds(&ensembled);
            let summary = summary_from_preds(&preds, c)?;
            let cm = confusion_matrix(
                &preds.iter().map(|r| r.predicted).collect::<Vec<_>>(),
                &labels,
                c,
            )?;
            Ok((
                MetricsReport {
                    n_subjects: summary.n_subjects,
                    accuracy: summary.accuracy,
                    macro_f1: summary.macro_f1,
                    uar: summary.uar,
                    per_class: summary.per_class,
                    class_names: class_names.to_vec(),
                    confusion: cm
                        .iter()
                        .map(|row| row.iter().map(|&v| v as f64).collect())
                        .collect(),
                    mode,
                    seeds: seeds.to_vec(),
                    config_digest: config_digest.to_string(),
                },
                preds,
            ))
        }
        EvalMode::FoldAverage => {
            let k = models.len() as f64;
            let mut acc = 0.0;
            let mut mf1 = 0.0;
            let mut uar = 0.0;
            let mut per_class = vec![ClassMetrics { precision: 0.0, recall: 0.0, f1: 0.0 }; c];
            let mut cm_mean = vec![vec![0.0f64; c]; c];
            let mut last_preds = Vec::new();
            for probs in &per_model_probs {
                let preds = make_preds(probs);
                let cm = confusion_matrix(
                    &preds.iter().map(|r| r.predicted).collect::<Vec<_>>(),
                    &labels,
                    c,
                )?;
                let s = metrics(&cm)?;
                acc += s.accuracy / k;
                mf1 += s.macro_f1 / k;
                uar += s.uar / k;
                for (agg, m) in per_class.iter_mut().zip(&s.per_class) {
                    agg.precision += m.precision / k;
                    agg.recall += m.recall / k;
                    agg.f1 += m.f1 / k;
                }
                for (row_mean, row) in cm_mean.iter_mut().zip(&cm) {
                    for (v_mean, &v) in row_mean.iter_mut().zip(row) {
                        *v_mean += v as f64 / k;
                    }
                }
                last_preds = preds;
            }
            Ok((
                MetricsReport {
                    n_subjects: records.len() as u64,
                    accuracy: acc,
                    macro_f1: mf1,
                    uar,
                    per_class,
                    class_names: class_names.to_vec(),
                    confusion: cm_mean,
                    mode,
                    seeds: seeds.to_vec(),
                    config_digest: config_digest.to_string(),
                },
                last_preds,
            ))
        }
    }
}
