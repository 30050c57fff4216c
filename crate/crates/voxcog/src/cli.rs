//! Command implementations behind the `voxcog` binary.
//!
//! Exit-code contract: 0 success, 1 runtime failure, 2 configuration or
//! validation failure. Commands never mutate their inputs; outputs go only
//! under `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta, Provenance};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, EvalMode, MetricsReport};
use crate::manifest::load_manifest;
use crate::model::{Model, Stage};
use crate::synth::generate_corpus;
use crate::trainer::{pretrain_dialect, run_crossval, FoldReport};

fn manifest_base(manifest_path: &Path) -> PathBuf {
    manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf()
}

pub fn cmd_synth(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let (pre_path, down_path) = generate_corpus(&cfg.corpus, out_dir)?;
    let pre = load_manifest(&pre_path)?;
    let down = load_manifest(&down_path)?;
    let utterances = (pre.len() + down.len()) * cfg.corpus.utterances_per_subject;
    println!(
        "corpus: {} pretrain subjects, {} downstream subjects, {} utterances",
        pre.len(),
        down.len(),
        utterances
    );
    println!("pretrain manifest:   {}", pre_path.display());
    println!("downstream manifest: {}", down_path.display());
    println!("config digest: {}", cfg.digest());
    Ok(())
}

pub fn cmd_pretrain(cfg: &RunConfig, manifest_path: &Path, out_ckpt: &Path) -> Result<()> {
    let records = load_manifest(manifest_path)?;
    let base = manifest_base(manifest_path);
    let outcome = pretrain_dialect(
        &records,
        &base,
        &cfg.train,
        &cfg.model,
        &cfg.features,
        &cfg.segmentation,
    )?;
    let mut model = outcome.model;
    let meta = CheckpointMeta {
        model: model.cfg,
        features: cfg.features,
        class_names: outcome.classes,
        provenance: Provenance {
            seed: cfg.train.seed,
            stage: Stage::Pretrain,
            epoch: outcome.best_epoch,
        },
        config_digest: cfg.digest(),
    };
    save_checkpoint(&mut model, &meta, out_ckpt)?;
    println!(
        "pretrained {} dialect classes; best epoch {} (held-out segment accuracy {:.4})",
        meta.class_names.len(),
        outcome.best_epoch,
        outcome.best_holdout_accuracy
    );
    println!("checkpoint: {}", out_ckpt.display());
    println!("config digest: {}", meta.config_digest);
    Ok(())
}

/// The JSON artifact written by `crossval`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossvalArtifact {
    pub config_digest: String,
    pub seed: u64,
    pub k: usize,
    pub classes: Vec<String>,
    pub init: Option<String>,
    pub mean_macro_f1: f64,
    pub mean_accuracy: f64,
    pub mean_uar: f64,
    pub folds: Vec<FoldReport>,
}

pub fn cmd_crossval(
    cfg: &RunConfig,
    manifest_path: &Path,
    init_ckpt: Option<&Path>,
    out_dir: &Path,
) -> Result<CrossvalArtifact> {
    let records = load_manifest(manifest_path)?;
    let base = manifest_base(manifest_path);

    let mut init_model: Option<Model<f32>> = None;
    if let Some(ckpt_path) = init_ckpt {
        let (model, meta) = load_checkpoint(ckpt_path)?;
        if meta.provenance.stage != Stage::Pretrain {
            return Err(Error::Checkpoint(format!(
                "{} is a {:?}-stage checkpoint; transfer needs a pretrain checkpoint",
                ckpt_path.display(),
                meta.provenance.stage
            )));
        }
        meta.check_feature_compat(&cfg.features)?;
        let mut expected = cfg.model;
        expected.n_classes = meta.model.n_classes;
        if meta.model != expected {
            return Err(Error::Config(format!(
                "checkpoint architecture {:?} disagrees with the run config {:?}",
                meta.model, expected
            )));
        }
        init_model = Some(model);
    }

    let outcome = run_crossval(
        &records,
        &base,
        cfg.k,
        &cfg.train,
        &cfg.model,
        &cfg.features,
        &cfg.segmentation,
        init_model.as_mut(),
    )?;

    fs::create_dir_all(out_dir)?;
    for (fold, model) in outcome.models.into_iter().enumerate() {
        let mut model = model;
        let meta = CheckpointMeta {
            model: model.cfg,
            features: cfg.features,
            class_names: outcome.classes.clone(),
            provenance: Provenance {
                seed: cfg.train.seed,
                stage: Stage::Finetune,
                epoch: outcome.reports[fold].selection.best_epoch,
            },
            config_digest: cfg.digest(),
        };
        save_checkpoint(&mut model, &meta, out_dir.join(format!("fold_{}.vxcg", fold)))?;
    }

    let n = outcome.reports.len() as f64;
    let artifact = CrossvalArtifact {
        config_digest: cfg.digest(),
        seed: cfg.train.seed,
        k: cfg.k,
        classes: outcome.classes,
        init: init_ckpt.map(|p| p.display().to_string()),
        mean_macro_f1: outcome.reports.iter().map(|r| r.val_metrics.macro_f1).sum::<f64>() / n,
        mean_accuracy: outcome.reports.iter().map(|r| r.val_metrics.accuracy).sum::<f64>() / n,
        mean_uar: outcome.reports.iter().map(|r| r.val_metrics.uar).sum::<f64>() / n,
        folds: outcome.reports,
    };
    fs::write(
        out_dir.join("crossval.json"),
        serde_json::to_vec_pretty(&artifact)?,
    )?;
    println!(
        "crossval ({} folds, {} arm): mean val macro-F1 {:.4}, accuracy {:.4}",
        artifact.k,
        if init_ckpt.is_some() { "transfer" } else { "baseline" },
        artifact.mean_macro_f1,
        artifact.mean_accuracy
    );
    println!("outputs: {}", out_dir.display());
    Ok(artifact)
}

pub fn cmd_evaluate(
    cfg: &RunConfig,
    models_dir: &Path,
    manifest_path: &Path,
    mode: EvalMode,
    out_file: &Path,
) -> Result<MetricsReport> {
    let mut ckpts: Vec<PathBuf> = fs::read_dir(models_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "vxcg"))
        .collect();
    ckpts.sort();
    if ckpts.is_empty() {
        return Err(Error::Evaluation(format!(
            "no .vxcg checkpoints under {}",
            models_dir.display()
        )));
    }
    let mut models = Vec::new();
    let mut class_names: Option<Vec<String>> = None;
    let mut seeds = Vec::new();
    for p in &ckpts {
        let (model, meta) = load_checkpoint(p)?;
        meta.check_feature_compat(&cfg.features)?;
        match &class_names {
            None => class_names = Some(meta.class_names.clone()),
            Some(names) if *names != meta.class_names => {
                return Err(Error::Evaluation(format!(
                    "{} has class names {:?}, other folds have {:?}",
                    p.display(),
                    meta.class_names,
                    names
                )));
            }
            _ => {}
        }
        if !seeds.contains(&meta.provenance.seed) {
            seeds.push(meta.provenance.seed);
        }
        models.push(model);
    }
    let class_names = class_names.unwrap();

    let records = load_manifest(manifest_path)?;
    let base = manifest_base(manifest_path);
    let (report, _) = evaluate(
        &models,
        &records,
        &base,
        &class_names,
        &cfg.features,
        &cfg.segmentation,
        mode,
        &seeds,
        &cfg.digest(),
    )?;
    fs::write(out_file, serde_json::to_vec_pretty(&report)?)?;
    println!(
        "{:?} over {} models, {} subjects: accuracy {:.4}, macro-F1 {:.4}, UAR {:.4}",
        mode,
        models.len(),
        report.n_subjects,
        report.accuracy,
        report.macro_f1,
        report.uar
    );
    println!("report: {}", out_file.display());
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRow {
    pub run: String,
    pub seed: u64,
    pub baseline_macro_f1: f64,
    pub baseline_accuracy: f64,
    pub transfer_macro_f1: f64,
    pub transfer_accuracy: f64,
}

/// Baseline-vs-transfer comparison across runs: one row per run directory
/// plus per-arm means. Text and JSON views are built from the same rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<RunRow>,
    pub mean_baseline_macro_f1: f64,
    pub mean_baseline_accuracy: f64,
    pub mean_transfer_macro_f1: f64,
    pub mean_transfer_accuracy: f64,
}

fn read_artifact(path: &Path) -> Result<CrossvalArtifact> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Evaluation(format!("{}: {}", path.display(), e)))
}

/// Each run directory must contain `baseline/crossval.json` and
/// `transfer/crossval.json` written by `crossval`.
pub fn cmd_report(runs: &[PathBuf], out_file: Option<&Path>) -> Result<ComparisonReport> {
    if runs.is_empty() {
        return Err(Error::InvalidParameter("no run directories given".into()));
    }
    let mut rows = Vec::new();
    for run in runs {
        let baseline = read_artifact(&run.join("baseline").join("crossval.json"))?;
        let transfer = read_artifact(&run.join("transfer").join("crossval.json"))?;
        rows.push(RunRow {
            run: run.display().to_string(),
            seed: baseline.seed,
            baseline_macro_f1: baseline.mean_macro_f1,
            baseline_accuracy: baseline.mean_accuracy,
            transfer_macro_f1: transfer.mean_macro_f1,
            transfer_accuracy: transfer.mean_accuracy,
        });
    }
    let n = rows.len() as f64;
    let report = ComparisonReport {
        mean_baseline_macro_f1: rows.iter().map(|r| r.baseline_macro_f1).sum::<f64>() / n,
        mean_baseline_accuracy: rows.iter().map(|r| r.baseline_accuracy).sum::<f64>() / n,
        mean_transfer_macro_f1: rows.iter().map(|r| r.transfer_macro_f1).sum::<f64>() / n,
        mean_transfer_accuracy: rows.iter().map(|r| r.transfer_accuracy).sum::<f64>() / n,
        rows,
    };

    println!(
        "{:<24} {:>6} {:>14} {:>14} {:>14} {:>14}",
        "run", "seed", "base macro-F1", "base acc", "xfer macro-F1", "xfer acc"
    );
    for r in &report.rows {
        println!(
            "{:<24} {:>6} {:>14.4} {:>14.4} {:>14.4} {:>14.4}",
            r.run, r.seed, r.baseline_macro_f1, r.baseline_accuracy, r.transfer_macro_f1,
            r.transfer_accuracy
        );
    }
    println!(
        "{:<24} {:>6} {:>14.4} {:>14.4} {:>14.4} {:>14.4}",
        "mean",
        "-",
        report.mean_baseline_macro_f1,
        report.mean_baseline_accuracy,
        report.mean_transfer_macro_f1,
        report.mean_transfer_accuracy
    );
    if let Some(out) = out_file {
        fs::write(out, serde_json::to_vec_pretty(&report)?)?;
        println!("report: {}", out.display());
    }
    Ok(report)
}
