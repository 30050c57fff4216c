//! Python bindings: checkpoint loading and subject-level prediction,
//! feature extraction, segmentation, metrics, and corpus generation.

use std::path::{Path, PathBuf};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use voxcog::audio::{load_recording, segment_recording, SegmentationParams};
use voxcog::checkpoint::{load_checkpoint, CheckpointMeta};
use voxcog::evaluator::{aggregate_subject, argmax_lowest, confusion_matrix, metrics};
use voxcog::features::{log_mel as log_mel_rs, FeatureConfig};
use voxcog::model::Model;
use voxcog::nn::softmax_probs;
use voxcog::synth::{generate_corpus as generate_corpus_rs, CorpusSpec};

fn err(e: voxcog::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A loaded checkpoint that scores WAVE files at the subject level.
#[pyclass]
struct Classifier {
    model: Model<f32>,
    meta: CheckpointMeta,
}

#[pymethods]
impl Classifier {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (model, meta) = load_checkpoint(&path).map_err(err)?;
        Ok(Classifier { model, meta })
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.meta.class_names.clone()
    }

    #[getter]
    fn stage(&self) -> String {
        format!("{:?}", self.meta.provenance.stage).to_lowercase()
    }

    /// Segment a recording, score every segment, and aggregate to one
    /// probability vector. Returns (predicted_class_name, probabilities).
    fn predict_wav(&self, path: PathBuf) -> PyResult<(String, Vec<f64>)> {
        let wave = load_recording(&path).map_err(err)?;
        let params = SegmentationParams::default();
        let segs = segment_recording(&wave, "subject", "recording", 0, &params).map_err(err)?;
        if segs.is_empty() {
            return Err(PyValueError::new_err(format!(
                "{} yields no usable segments",
                path.display()
            )));
        }
        let feat_cfg = FeatureConfig { n_mels: self.model.cfg.n_mels, ..FeatureConfig::default() };
        let mut per_seg = Vec::with_capacity(segs.len());
        for seg in &segs {
            let feat = log_mel_rs(&seg.samples, &feat_cfg).map_err(err)?;
            per_seg.push(softmax_probs(&self.model.forward(&feat).map_err(err)?));
        }
        let probs = aggregate_subject(&per_seg).map_err(err)?;
        let name = self.meta.class_names[argmax_lowest(&probs)].clone();
        Ok((name, probs))
    }
}

/// Log-mel features of a mono 16 kHz sample buffer, [n_mels][n_frames].
#[pyfunction]
#[pyo3(signature = (samples, n_mels = 80))]
fn log_mel(samples: Vec<f32>, n_mels: usize) -> PyResult<Vec<Vec<f32>>> {
    let cfg = FeatureConfig { n_mels, ..FeatureConfig::default() };
    let feat = log_mel_rs(&samples, &cfg).map_err(err)?;
    Ok(feat.rows().into_iter().map(|r| r.to_vec()).collect())
}

/// Sliding-window segment boundaries for a recording, as
/// (start_s, n_samples) pairs.
#[pyfunction]
fn segment_wav(path: PathBuf) -> PyResult<Vec<(f64, usize)>> {
    let wave = load_recording(&path).map_err(err)?;
    let segs = segment_recording(&wave, "s", "r", 0, &SegmentationParams::default())
        .map_err(err)?;
    Ok(segs.into_iter().map(|s| (s.start_s, s.samples.len())).collect())
}

/// Accuracy, macro-F1, and UAR from predicted and true class indices.
#[pyfunction]
fn compute_metrics(
    preds: Vec<usize>,
    labels: Vec<usize>,
    n_classes: usize,
) -> PyResult<(f64, f64, f64)> {
    let cm = confusion_matrix(&preds, &labels, n_classes).map_err(err)?;
    let s = metrics(&cm).map_err(err)?;
    Ok((s.accuracy, s.macro_f1, s.uar))
}

/// Generate a (optionally shrunken) synthetic corpus; returns the
/// (pretrain, downstream) manifest paths.
#[pyfunction]
#[pyo3(signature = (out_dir, seed = 0, pretrain_subjects_per_dialect = 12,
                    downstream_subjects_per_cell = 8, duration_min_s = 30.0,
                    duration_max_s = 60.0))]
fn generate_corpus(
    out_dir: PathBuf,
    seed: u64,
    pretrain_subjects_per_dialect: usize,
    downstream_subjects_per_cell: usize,
    duration_min_s: f64,
    duration_max_s: f64,
) -> PyResult<(String, String)> {
    let spec = CorpusSpec {
        seed,
        pretrain_subjects_per_dialect,
        downstream_subjects_per_cell,
        duration_min_s,
        duration_max_s,
        ..CorpusSpec::default()
    };
    let (pre, down) = generate_corpus_rs(&spec, Path::new(&out_dir)).map_err(err)?;
    Ok((pre.display().to_string(), down.display().to_string()))
}

#[pymodule]
fn voxcog_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Classifier>()?;
    m.add_function(wrap_pyfunction!(log_mel, m)?)?;
    m.add_function(wrap_pyfunction!(segment_wav, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(generate_corpus, m)?)?;
    Ok(())
}
