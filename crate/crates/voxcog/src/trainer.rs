//! Two-stage training: dialect pretraining, then downstream fine-tuning
//! under stratified subject-level cross-validation with a learning-rate
//! grid. Model selection maximizes subject-level validation macro-F1 with
//! (lower-lr, earlier-epoch) tie-breaks.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::audio::{Segment, SegmentationParams};
use crate::augment::{AugmentEngine, AugmentSpec};
use crate::data::{clean_features, subject_segments};
use crate::error::{Error, Result};
use crate::evaluator::{
    aggregate_subject, argmax_lowest, confusion_matrix, metrics, MetricsSummary,
    PredictionRecord,
};
use crate::features::{log_mel, FeatureConfig, FeatureMatrix};
use crate::manifest::{class_names, dialect_names, label_index, SubjectRecord};
use crate::model::{transfer_init, Model, ModelConfig, Stage};
use crate::nn::{softmax_probs, AdamState};
use crate::seed::{derive_seed, rng_from};

/// Pretraining always runs at the grid midpoint; only fine-tuning is
/// grid-searched.
pub const PRETRAIN_LR: f64 = 0.0005;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_lr_grid")]
    pub lr_grid: Vec<f64>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub augment: AugmentSpec,
}

fn default_max_epochs() -> usize {
    10
}
fn default_lr_grid() -> Vec<f64> {
    vec![0.0001, 0.0002, 0.0005, 0.001, 0.002]
}
fn default_batch_size() -> usize {
    16
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: default_max_epochs(),
            lr_grid: default_lr_grid(),
            batch_size: default_batch_size(),
            seed: 0,
            augment: AugmentSpec::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.lr_grid.is_empty() {
            return Err(Error::Config("lr_grid must be nonempty".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        self.augment.validate()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FoldSplit {
    pub fold_id: usize,
    pub train_subjects: Vec<String>,
    pub val_subjects: Vec<String>,
}

/// Seeded stratified split: within each class (classes and subjects visited
/// in sorted order), subjects are shuffled and dealt round-robin to folds.
pub fn stratified_kfold(
    subjects: &[SubjectRecord],
    k: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {} (need at least 2 folds)", k)));
    }
    let mut by_class: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for s in subjects {
        by_class.entry(&s.label).or_default().push(&s.subject_id);
    }
    let mut val_sets: Vec<Vec<String>> = vec![Vec::new(); k];
    for (class_idx, (class, ids)) in by_class.iter_mut().enumerate() {
        if ids.len() < k {
            return Err(Error::InvalidParameter(format!(
                "class {} has {} subjects, fewer than k = {}",
                class,
                ids.len(),
                k
            )));
        }
        ids.sort_unstable();
        let mut rng = rng_from(derive_seed(seed, "stratify", class_idx as u64));
        ids.shuffle(&mut rng);
        for (i, id) in ids.iter().enumerate() {
            val_sets[i % k].push(id.to_string());
        }
    }
    let folds = val_sets
        .into_iter()
        .enumerate()
        .map(|(fold_id, val)| {
            let val_set: BTreeSet<&str> = val.iter().map(String::as_str).collect();
            let train = subjects
                .iter()
                .map(|s| s.subject_id.clone())
                .filter(|id| !val_set.contains(id.as_str()))
                .collect();
            FoldSplit { fold_id, train_subjects: train, val_subjects: val }
        })
        .collect();
    Ok(folds)
}

fn assert_no_leakage(train: &[String], val: &[String]) -> Result<()> {
    let t: BTreeSet<&str> = train.iter().map(String::as_str).collect();
    if let Some(leak) = val.iter().find(|v| t.contains(v.as_str())) {
        return Err(Error::Evaluation(format!(
            "subject {} appears in both train and validation sets",
            leak
        )));
    }
    Ok(())
}

/// One epoch over `order`-indexed segments: per-segment augmentation,
/// log-mel, batched cross-entropy steps. Returns the mean loss.
#[allow(clippy::too_many_arguments)]
fn run_epoch(
    model: &mut Model<f32>,
    adam: &mut AdamState<f32>,
    segments: &[Segment],
    indices: &[usize],
    engine: &AugmentEngine,
    run_seed: u64,
    epoch: usize,
    batch_size: usize,
    lr: f64,
    feat_cfg: &FeatureConfig,
) -> Result<f64> {
    let mut order = indices.to_vec();
    order.shuffle(&mut rng_from(derive_seed(run_seed, "order", epoch as u64)));
    let mut loss_sum = 0.0f64;
    for batch in order.chunks(batch_size) {
        model.zero_grads();
        let scale = 1.0 / batch.len() as f32;
        for &i in batch {
            let seg = engine.apply(&segments[i], run_seed, epoch);
            let feat = log_mel(&seg.samples, feat_cfg)?;
            loss_sum += model.train_example(&feat, seg.label, scale)? as f64;
        }
        adam.step(&mut model.params_mut(), lr);
    }
    Ok(loss_sum / (order.len().max(1) as f64) * batch_size as f64)
}

fn segment_accuracy(model: &Model<f32>, feats: &[(FeatureMatrix, usize)]) -> Result<f64> {
    let mut correct = 0usize;
    for (feat, label) in feats {
        let probs = softmax_probs(&model.forward(feat)?);
        if argmax_lowest(&probs) == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / feats.len().max(1) as f64)
}

/// Per-subject clean validation features, grouped for subject-level scoring.
pub struct SubjectFeatures {
    pub subject_id: String,
    pub label: usize,
    pub feats: Vec<FeatureMatrix>,
}

fn subject_predictions(
    model: &Model<f32>,
    subjects: &[SubjectFeatures],
) -> Result<Vec<PredictionRecord>> {
    subjects
        .iter()
        .map(|s| {
            if s.feats.is_empty() {
                return Err(Error::Evaluation(format!(
                    "subject {} has no usable segments",
                    s.subject_id
                )));
            }
            let per_seg: Result<Vec<Vec<f64>>> = s
                .feats
                .iter()
                .map(|f| Ok(softmax_probs(&model.forward(f)?)))
                .collect();
            let probs = aggregate_subject(&per_seg?)?;
            Ok(PredictionRecord {
                subject_id: s.subject_id.clone(),
                predicted: argmax_lowest(&probs),
                probs,
                true_label: s.label,
            })
        })
        .collect()
}

fn subject_macro_f1(
    model: &Model<f32>,
    subjects: &[SubjectFeatures],
    n_classes: usize,
) -> Result<f64> {
    let preds = subject_predictions(model, subjects)?;
    let p: Vec<usize> = preds.iter().map(|r| r.predicted).collect();
    let l: Vec<usize> = preds.iter().map(|r| r.true_label).collect();
    Ok(metrics(&confusion_matrix(&p, &l, n_classes)?)?.macro_f1)
}

/// Outcome of dialect pretraining: the best-epoch model and its held-out
/// segment accuracy.
pub struct PretrainOutcome {
    pub model: Model<f32>,
    pub classes: Vec<String>,
    pub best_epoch: usize,
    pub best_holdout_accuracy: f64,
}

/// Train the full model on segment-level dialect classification at the
/// fixed pretraining rate, snapshotting the epoch with the best held-out
/// segment accuracy on a 10% seeded subject holdout.
pub fn pretrain_dialect(
    records: &[SubjectRecord],
    base: &Path,
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
    feat_cfg: &FeatureConfig,
    seg_params: &SegmentationParams,
) -> Result<PretrainOutcome> {
    cfg.validate()?;
    let classes = dialect_names(records)?;
    if classes.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "pretraining needs at least 2 dialect classes, got {}",
            classes.len()
        )));
    }

    // 10% stratified subject holdout, at least one subject per dialect
    let mut by_class: BTreeMap<&str, Vec<&SubjectRecord>> = BTreeMap::new();
    for r in records {
        by_class.entry(r.dialect.as_deref().unwrap()).or_default().push(r);
    }
    let mut holdout_ids: BTreeSet<String> = BTreeSet::new();
    for (class_idx, (_, recs)) in by_class.iter_mut().enumerate() {
        recs.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
        let mut ids: Vec<&str> = recs.iter().map(|r| r.subject_id.as_str()).collect();
        ids.shuffle(&mut rng_from(derive_seed(cfg.seed, "holdout", class_idx as u64)));
        let n_hold = (ids.len() / 10).max(1);
        holdout_ids.extend(ids[..n_hold].iter().map(|s| s.to_string()));
    }

    let mut train_segments = Vec::new();
    let mut holdout_feats = Vec::new();
    for r in records {
        let label = label_index(&classes, r.dialect.as_deref().unwrap())?;
        let segs = subject_segments(r, label, base, seg_params)?;
        if holdout_ids.contains(&r.subject_id) {
            for s in &segs {
                holdout_feats.push((clean_features(s, feat_cfg)?, label));
            }
        } else {
            train_segments.extend(segs);
        }
    }
    if train_segments.is_empty() || holdout_feats.is_empty() {
        return Err(Error::InvalidParameter(
            "pretraining manifest yields an empty train or holdout set".into(),
        ));
    }

    let mut pre_cfg = *model_cfg;
    pre_cfg.n_classes = classes.len();
    let mut model = Model::<f32>::build(&pre_cfg, derive_seed(cfg.seed, "model", 0))?;
    model.apply_freeze_policy(Stage::Pretrain);
    let mut adam = AdamState::default();
    let engine = AugmentEngine::new(cfg.augment.clone())?;
    let indices: Vec<usize> = (0..train_segments.len()).collect();

    let mut best: Option<(f64, usize, Model<f32>)> = None;
    for epoch in 0..cfg.max_epochs {
        run_epoch(
            &mut model,
            &mut adam,
            &train_segments,
            &indices,
            &engine,
            cfg.seed,
            epoch,
            cfg.batch_size,
            PRETRAIN_LR,
            feat_cfg,
        )?;
        let acc = segment_accuracy(&model, &holdout_feats)?;
        if best.as_ref().map_or(true, |(b, _, _)| acc > *b) {
            best = Some((acc, epoch, model.clone()));
        }
    }
    let (best_holdout_accuracy, best_epoch, model) = best.unwrap();
    Ok(PretrainOutcome { model, classes, best_epoch, best_holdout_accuracy })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SelectionEntry {
    pub lr: f64,
    pub epoch: usize,
    pub metric: f64,
}

/// The full (lr, epoch, metric) grid plus the winning coordinates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SelectionReport {
    pub entries: Vec<SelectionEntry>,
    pub best_lr: f64,
    pub best_epoch: usize,
    pub best_metric: f64,
}

/// Fine-tune on one fold. `init = Some(pretrained)` is the transfer arm
/// (frozen base, trainable LoRA/pointwise-conv/head); `init = None` builds
/// a fresh fully-trainable model (the baseline arm).
#[allow(clippy::too_many_arguments)]
pub fn finetune(
    init: Option<&mut Model<f32>>,
    segments: &[Segment],
    fold: &FoldSplit,
    val_subjects: &[SubjectFeatures],
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
    feat_cfg: &FeatureConfig,
    n_classes: usize,
    run_seed: u64,
) -> Result<(Model<f32>, SelectionReport)> {
    cfg.validate()?;
    if fold.train_subjects.is_empty() || fold.val_subjects.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "fold {} has an empty train or validation subject set",
            fold.fold_id
        )));
    }
    let train_set: BTreeSet<&str> = fold.train_subjects.iter().map(String::as_str).collect();
    let indices: Vec<usize> = segments
        .iter()
        .enumerate()
        .filter(|(_, s)| train_set.contains(s.subject_id.as_str()))
        .map(|(i, _)| i)
        .collect();
    if indices.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "fold {}: no training segments",
            fold.fold_id
        )));
    }

    let engine = AugmentEngine::new(cfg.augment.clone())?;
    let mut entries = Vec::new();
    let mut best: Option<(f64, usize, usize, Model<f32>)> = None; // metric, lr_idx, epoch

    let mut init = init;
    for (lr_idx, &lr) in cfg.lr_grid.iter().enumerate() {
        let mut model = match init.as_deref_mut() {
            Some(src) => {
                transfer_init(src, Stage::Pretrain, n_classes, derive_seed(run_seed, "head", 0))?
            }
            None => {
                let mut fresh_cfg = *model_cfg;
                fresh_cfg.n_classes = n_classes;
                let mut m = Model::<f32>::build(&fresh_cfg, derive_seed(run_seed, "init", 0))?;
                m.apply_freeze_policy(Stage::Pretrain); // everything trainable
                m
            }
        };
        let mut adam = AdamState::default();
        for epoch in 0..cfg.max_epochs {
            assert_no_leakage(&fold.train_subjects, &fold.val_subjects)?;
            run_epoch(
                &mut model,
                &mut adam,
                segments,
                &indices,
                &engine,
                derive_seed(run_seed, "lr", lr_idx as u64),
                epoch,
                cfg.batch_size,
                lr,
                feat_cfg,
            )?;
            let metric = subject_macro_f1(&model, val_subjects, n_classes)?;
            entries.push(SelectionEntry { lr, epoch, metric });
            let better = match &best {
                None => true,
                // ties break to lower lr, then earlier epoch: since the
                // scan order is (lr asc, epoch asc), only a strict
                // improvement replaces the incumbent
                Some((b, _, _, _)) => metric > *b,
            };
            if better {
                best = Some((metric, lr_idx, epoch, model.clone()));
            }
        }
    }
    let (best_metric, best_lr_idx, best_epoch, model) = best.unwrap();
    Ok((
        model,
        SelectionReport { entries, best_lr: cfg.lr_grid[best_lr_idx], best_epoch, best_metric },
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FoldReport {
    pub fold_id: usize,
    pub selection: SelectionReport,
    pub val_metrics: MetricsSummary,
    pub predictions: Vec<PredictionRecord>,
}

pub struct CrossvalOutcome {
    pub classes: Vec<String>,
    pub folds: Vec<FoldSplit>,
    pub models: Vec<Model<f32>>,
    pub reports: Vec<FoldReport>,
}

impl CrossvalOutcome {
    /// Arithmetic mean of each per-fold validation metric.
    pub fn mean_val_macro_f1(&self) -> f64 {
        self.reports.iter().map(|r| r.val_metrics.macro_f1).sum::<f64>()
            / self.reports.len().max(1) as f64
    }
}

/// Stratified k-fold cross-validation: fine-tune per fold with a
/// fold-derived seed and score each fold's validation subjects.
#[allow(clippy::too_many_arguments)]
pub fn run_crossval(
    records: &[SubjectRecord],
    base: &Path,
    k: usize,
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
    feat_cfg: &FeatureConfig,
    seg_params: &SegmentationParams,
    mut init: Option<&mut Model<f32>>,
) -> Result<CrossvalOutcome> {
    cfg.validate()?;
    let classes = class_names(records);
    if classes.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "cross-validation needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    let folds = stratified_kfold(records, k, cfg.seed)?;

    // segment everything once; folds index into the shared pool
    let mut segments: Vec<Segment> = Vec::new();
    let mut subject_label: BTreeMap<String, usize> = BTreeMap::new();
    for r in records {
        let label = label_index(&classes, &r.label)?;
        subject_label.insert(r.subject_id.clone(), label);
        segments.extend(subject_segments(r, label, base, seg_params)?);
    }

    let mut models = Vec::with_capacity(k);
    let mut reports = Vec::with_capacity(k);
    for fold in &folds {
        assert_no_leakage(&fold.train_subjects, &fold.val_subjects)?;
        let fold_seed = derive_seed(cfg.seed, "fold", fold.fold_id as u64);

        // clean validation features, computed once per fold
        let mut val_subjects = Vec::new();
        for id in &fold.val_subjects {
            let label = subject_label[id];
            let feats: Result<Vec<FeatureMatrix>> = segments
                .iter()
                .filter(|s| &s.subject_id == id)
                .map(|s| clean_features(s, feat_cfg))
                .collect();
            val_subjects.push(SubjectFeatures { subject_id: id.clone(), label, feats: feats? });
        }

        let (model, selection) = finetune(
            init.as_deref_mut(),
            &segments,
            fold,
            &val_subjects,
            cfg,
            model_cfg,
            feat_cfg,
            classes.len(),
            fold_seed,
        )?;
        let predictions = subject_predictions(&model, &val_subjects)?;
        let p: Vec<usize> = predictions.iter().map(|r| r.predicted).collect();
        let l: Vec<usize> = predictions.iter().map(|r| r.true_label).collect();
        let val_metrics = metrics(&confusion_matrix(&p, &l, classes.len())?)?;
        reports.push(FoldReport {
            fold_id: fold.fold_id,
            selection,
            val_metrics,
            predictions,
        });
        models.push(model);
    }
    Ok(CrossvalOutcome { classes, folds, models, reports })
}
