//! Log-mel spectrogram frontend.
//!
//! 25 ms Hann window, 10 ms hop, no centering, 512-point FFT, 80 triangular
//! mel filters over 0-8 kHz, natural log with a 1e-6 floor, then per-segment
//! mean/variance normalization with a degenerate-variance guard.

use ndarray::Array2;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spectral frontend geometry. Recorded in checkpoints so a model is never
/// fed features with a different shape than it was trained on.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FeatureConfig {
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: u32,
    #[serde(default = "default_n_mels")]
    pub n_mels: usize,
    #[serde(default = "default_win_length")]
    pub win_length: usize,
    #[serde(default = "default_hop_length")]
    pub hop_length: usize,
    #[serde(default = "default_n_fft")]
    pub n_fft: usize,
    #[serde(default)]
    pub fmin_hz: f64,
    #[serde(default = "default_fmax")]
    pub fmax_hz: f64,
}

fn default_sample_rate() -> u32 {
    16_000
}
fn default_n_mels() -> usize {
    80
}
fn default_win_length() -> usize {
    400
}
fn default_hop_length() -> usize {
    160
}
fn default_n_fft() -> usize {
    512
}
fn default_fmax() -> f64 {
    8_000.0
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            sample_rate_hz: 16_000,
            n_mels: 80,
            win_length: 400,
            hop_length: 160,
            n_fft: 512,
            fmin_hz: 0.0,
            fmax_hz: 8_000.0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_mels == 0 || self.win_length == 0 || self.hop_length == 0 {
            return Err(Error::Config("feature geometry fields must be positive".into()));
        }
        if self.n_fft < self.win_length {
            return Err(Error::Config("n_fft must be >= win_length".into()));
        }
        if !(self.fmin_hz < self.fmax_hz && self.fmax_hz <= self.sample_rate_hz as f64 / 2.0) {
            return Err(Error::Config("need fmin < fmax <= Nyquist".into()));
        }
        Ok(())
    }

    pub fn n_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.win_length {
            0
        } else {
            1 + (n_samples - self.win_length) / self.hop_length
        }
    }
}

/// Per-segment normalized log-mel features, shape `[n_mels, n_frames]`.
pub type FeatureMatrix = Array2<f32>;

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Center frequencies (Hz) of the triangular mel filters.
pub fn mel_center_frequencies(cfg: &FeatureConfig) -> Vec<f64> {
    let lo = hz_to_mel(cfg.fmin_hz);
    let hi = hz_to_mel(cfg.fmax_hz);
    (1..=cfg.n_mels)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect()
}

/// Triangular mel filterbank, shape `[n_mels, n_fft/2 + 1]`.
pub fn mel_filterbank(cfg: &FeatureConfig) -> Array2<f32> {
    let n_bins = cfg.n_fft / 2 + 1;
    let lo = hz_to_mel(cfg.fmin_hz);
    let hi = hz_to_mel(cfg.fmax_hz);
    let points: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();
    let bin_hz = cfg.sample_rate_hz as f64 / cfg.n_fft as f64;
    let mut fb = Array2::<f32>::zeros((cfg.n_mels, n_bins));
    for m in 0..cfg.n_mels {
        let (left, center, right) = (points[m], points[m + 1], points[m + 2]);
        for b in 0..n_bins {
            let f = b as f64 * bin_hz;
            let w = if f >= left && f <= center && center > left {
                (f - left) / (center - left)
            } else if f > center && f <= right && right > center {
                (right - f) / (right - center)
            } else {
                0.0
            };
            fb[[m, b]] = w as f32;
        }
    }
    fb
}

/// Compute per-segment normalized log-mel features for a fixed-length
/// segment sampled at the pipeline rate.
pub fn log_mel(samples: &[f32], cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let n_frames = cfg.n_frames(samples.len());
    if n_frames == 0 {
        return Err(Error::InvalidParameter(format!(
            "segment of {} samples is shorter than one analysis window ({})",
            samples.len(),
            cfg.win_length
        )));
    }
    let n_bins = cfg.n_fft / 2 + 1;

    // Periodic Hann window.
    let window: Vec<f32> = (0..cfg.win_length)
        .map(|i| {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / cfg.win_length as f64).cos()
        })
        .map(|w| w as f32)
        .collect();

    let mut planner = rustfft::FftPlanner::<f32>::new();
    let fft = planner.plan_fft_forward(cfg.n_fft);
    let mut power = Array2::<f32>::zeros((n_bins, n_frames));
    let mut buf = vec![Complex::new(0.0f32, 0.0); cfg.n_fft];
    let mut scratch = vec![Complex::new(0.0f32, 0.0); fft.get_inplace_scratch_len()];
    for t in 0..n_frames {
        let start = t * cfg.hop_length;
        for i in 0..cfg.n_fft {
            let v = if i < cfg.win_length { samples[start + i] * window[i] } else { 0.0 };
            buf[i] = Complex::new(v, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for b in 0..n_bins {
            power[[b, t]] = buf[b].norm_sqr();
        }
    }

    let fb = mel_filterbank(cfg);
    let mut mel = fb.dot(&power);
    mel.mapv_inplace(|e| (e + 1e-6).ln());

    // Per-segment mean/variance normalization; skip the division when the
    // segment is (numerically) constant.
    let n = mel.len() as f64;
    let mean = mel.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = mel.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-8 {
        mel.mapv_inplace(|v| v - mean as f32);
    } else {
        mel.mapv_inplace(|v| ((v as f64 - mean) / std) as f32);
    }
    Ok(mel)
}
