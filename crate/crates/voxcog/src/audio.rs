//! Audio loading, resampling, and sliding-window segmentation.
//!
//! Recordings enter the pipeline as mono 16 kHz waveforms with samples in
//! [-1, 1]. Segmentation cuts a recording into fixed 15 s windows with a
//! 5 s step, zero-padding short recordings and adding one end-aligned
//! window when the regular grid does not reach the recording end.

use std::path::Path;

use crate::error::{Error, Result};

/// Sample rate every recording is converted to before featurization.
pub const PIPELINE_RATE_HZ: u32 = 16_000;

/// Mono audio signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate_hz: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("waveform contains non-finite samples".into()));
        }
        Ok(Waveform { samples, sample_rate_hz })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Mean squared amplitude.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|&s| s as f64 * s as f64).sum::<f64>() / self.samples.len() as f64
    }
}

/// One fixed-length window cut from a recording, carrying its provenance
/// and the label of the source subject.
#[derive(Debug, Clone)]
pub struct Segment {
    pub subject_id: String,
    pub recording_id: String,
    pub start_s: f64,
    pub samples: Vec<f32>,
    pub label: usize,
    pub segment_index: usize,
}

/// Sliding-window parameters. Defaults: 15 s window, 5 s step, 3 s minimum.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct SegmentationParams {
    #[serde(default = "default_window_s")]
    pub window_s: f64,
    #[serde(default = "default_step_s")]
    pub step_s: f64,
    #[serde(default = "default_min_s")]
    pub min_s: f64,
}

fn default_window_s() -> f64 {
    15.0
}
fn default_step_s() -> f64 {
    5.0
}
fn default_min_s() -> f64 {
    3.0
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams { window_s: 15.0, step_s: 5.0, min_s: 3.0 }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_s > self.step_s && self.step_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "segmentation requires window_s > step_s > 0, got window={} step={}",
                self.window_s, self.step_s
            )));
        }
        if self.min_s > self.window_s {
            return Err(Error::InvalidParameter(format!(
                "segmentation requires min_s <= window_s, got min={} window={}",
                self.min_s, self.window_s
            )));
        }
        Ok(())
    }

    pub fn window_samples(&self, rate: u32) -> usize {
        (self.window_s * rate as f64).round() as usize
    }
}

/// Load a RIFF/WAVE file (PCM16 or float32, up to 2 channels), mix to mono,
/// and resample to the pipeline rate.
pub fn load_recording<P: AsRef<Path>>(path: P) -> Result<Waveform> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: format!("{} channels (at most 2 supported)", spec.channels),
        });
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Float, 32) => {
            reader.samples::<f32>().collect::<std::result::Result<_, _>>()?
        }
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{:?} {} bits (need PCM16 or float32)", fmt, bits),
            })
        }
    };
    if interleaved.is_empty() {
        return Err(Error::EmptyAudio(path.to_path_buf()));
    }
    let mono: Vec<f32> = if spec.channels == 2 {
        interleaved.chunks_exact(2).map(|c| (c[0] + c[1]) / 2.0).collect()
    } else {
        interleaved
    };
    let w = Waveform::new(mono, spec.sample_rate)?;
    resample(&w, PIPELINE_RATE_HZ)
}

/// Write a waveform as mono PCM16.
pub fn write_wav<P: AsRef<Path>>(path: P, w: &Waveform) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: w.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in &w.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer.write_sample(v)?;
    }
    writer.finalize()?;
    Ok(())
}

/// Linear-interpolation resampling. Output length is
/// `round(len * target_hz / source_hz)`.
pub fn resample(w: &Waveform, target_hz: u32) -> Result<Waveform> {
    if target_hz == 0 {
        return Err(Error::InvalidParameter("target sample rate must be positive".into()));
    }
    if target_hz == w.sample_rate_hz {
        return Ok(w.clone());
    }
    let n = w.samples.len();
    let out_len = (n as f64 * target_hz as f64 / w.sample_rate_hz as f64).round() as usize;
    let mut out = Vec::with_capacity(out_len);
    let ratio = w.sample_rate_hz as f64 / target_hz as f64;
    for i in 0..out_len {
        let pos = i as f64 * ratio;
        let i0 = (pos.floor() as usize).min(n.saturating_sub(1));
        let i1 = (i0 + 1).min(n - 1);
        let frac = (pos - i0 as f64) as f32;
        let s0 = w.samples[i0];
        let s1 = w.samples[i1];
        out.push(s0 + frac * (s1 - s0));
    }
    Ok(Waveform { samples: out, sample_rate_hz: target_hz })
}

/// Cut a recording into fixed windows.
///
/// Below `min_s` the result is empty. Between `min_s` and `window_s` a
/// single zero-padded segment covers the whole recording. Otherwise windows
/// start at multiples of `step_s` while they fit, plus one end-aligned
/// window when the regular grid leaves a tail uncovered.
pub fn segment_recording(
    w: &Waveform,
    subject_id: &str,
    recording_id: &str,
    label: usize,
    params: &SegmentationParams,
) -> Result<Vec<Segment>> {
    params.validate()?;
    let rate = w.sample_rate_hz;
    let n = w.samples.len();
    let win = params.window_samples(rate);
    let step = (params.step_s * rate as f64).round() as usize;
    let min = (params.min_s * rate as f64).round() as usize;

    let mut starts: Vec<usize> = Vec::new();
    if n < min {
        return Ok(Vec::new());
    } else if n < win {
        starts.push(0);
    } else {
        let mut s = 0usize;
        while s + win <= n {
            starts.push(s);
            s += step;
        }
        let last = *starts.last().expect("n >= win guarantees one window");
        if last + win < n {
            starts.push(n - win);
        }
    }

    let segments = starts
        .into_iter()
        .enumerate()
        .map(|(idx, start)| {
            let end = (start + win).min(n);
            let mut samples = w.samples[start..end].to_vec();
            samples.resize(win, 0.0);
            Segment {
                subject_id: subject_id.to_string(),
                recording_id: recording_id.to_string(),
                start_s: start as f64 / rate as f64,
                samples,
                label,
                segment_index: idx,
            }
        })
        .collect();
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, rate: u32, dur_s: f64) -> Waveform {
        let n = (rate as f64 * dur_s).round() as usize;
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin() as f32 * 0.5)
            .collect();
        Waveform::new(samples, rate).unwrap()
    }

    /// Frequency of the largest FFT magnitude peak, in Hz.
    fn fft_peak_hz(w: &Waveform) -> f64 {
        use rustfft::num_complex::Complex;
        let n = w.samples.len();
        let mut planner = rustfft::FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let mut buf: Vec<Complex<f64>> =
            w.samples.iter().map(|&s| Complex::new(s as f64, 0.0)).collect();
        fft.process(&mut buf);
        let half = n / 2;
        let peak = (0..=half)
            .max_by(|&a, &b| buf[a].norm().partial_cmp(&buf[b].norm()).unwrap())
            .unwrap();
        peak as f64 * w.sample_rate_hz as f64 / n as f64
    }

    #[test]
    fn resample_identity_same_rate() {
        let w = sine(440.0, 16_000, 1.0);
        let r = resample(&w, 16_000).unwrap();
        assert_eq!(w, r);
    }

    #[test]
    fn resample_doubles_length() {
        let w = sine(440.0, 8_000, 1.0);
        assert_eq!(w.samples.len(), 8_000);
        let r = resample(&w, 16_000).unwrap();
        assert_eq!(r.samples.len(), 16_000);
        assert_eq!(r.sample_rate_hz, 16_000);
    }

    #[test]
    fn resample_constant_stays_constant() {
        let w = Waveform::new(vec![0.5; 3_000], 8_000).unwrap();
        for target in [12_000u32, 16_000, 44_100, 7_000] {
            let r = resample(&w, target).unwrap();
            assert!(r.samples.iter().all(|&s| s == 0.5), "target {}", target);
        }
    }

    #[test]
    fn resample_preserves_tone_frequency() {
        let w = sine(440.0, 8_000, 1.0);
        let r = resample(&w, 16_000).unwrap();
        let peak = fft_peak_hz(&r);
        assert!((peak - 440.0).abs() <= 1.0, "peak {}", peak);
    }

    #[test]
    fn resample_round_trip_recovers_length() {
        for n in [1_000usize, 12_345, 160_000] {
            let w = Waveform::new(vec![0.1; n], 16_000).unwrap();
            let up = resample(&w, 32_000).unwrap();
            let down = resample(&up, 16_000).unwrap();
            assert_eq!(down.samples.len(), n);
        }
    }

    #[test]
    fn resample_rejects_zero_rate() {
        let w = sine(440.0, 8_000, 1.0);
        assert!(matches!(resample(&w, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn segment_exact_tiling() {
        let w = Waveform::new(vec![0.1; 60 * 16_000], 16_000).unwrap();
        let segs =
            segment_recording(&w, "s", "r", 0, &SegmentationParams::default()).unwrap();
        assert_eq!(segs.len(), 10);
        for (i, seg) in segs.iter().enumerate() {
            assert_eq!(seg.start_s, 5.0 * i as f64);
            assert_eq!(seg.samples.len(), 15 * 16_000);
            assert_eq!(seg.segment_index, i);
        }
    }

    #[test]
    fn segment_end_aligned_tail() {
        let w = Waveform::new(vec![0.1; 62 * 16_000], 16_000).unwrap();
        let segs =
            segment_recording(&w, "s", "r", 1, &SegmentationParams::default()).unwrap();
        assert_eq!(segs.len(), 11);
        assert_eq!(segs[10].start_s, 47.0);
        assert!(segs.iter().all(|s| s.label == 1));
    }

    #[test]
    fn segment_short_and_too_short() {
        let w = Waveform::new(vec![0.3; 12 * 16_000], 16_000).unwrap();
        let segs =
            segment_recording(&w, "s", "r", 0, &SegmentationParams::default()).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].samples.len(), 15 * 16_000);
        // original audio first, zero padding after
        assert_eq!(&segs[0].samples[..12 * 16_000], &w.samples[..]);
        assert!(segs[0].samples[12 * 16_000..].iter().all(|&s| s == 0.0));

        let short = Waveform::new(vec![0.3; 2 * 16_000], 16_000).unwrap();
        let segs =
            segment_recording(&short, "s", "r", 0, &SegmentationParams::default()).unwrap();
        assert!(segs.is_empty());
    }

    #[test]
    fn segment_rejects_bad_params() {
        let w = sine(440.0, 16_000, 20.0);
        let bad = SegmentationParams { window_s: 5.0, step_s: 15.0, min_s: 3.0 };
        assert!(segment_recording(&w, "s", "r", 0, &bad).is_err());
    }

    #[test]
    fn load_rejects_missing_file() {
        assert!(matches!(
            load_recording("/nonexistent/file.wav"),
            Err(Error::FileNotFound(_))
        ));
    }

    #[test]
    fn wav_round_trip_pcm16() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let w = sine(440.0, 16_000, 1.0);
        write_wav(&path, &w).unwrap();
        let r = load_recording(&path).unwrap();
        assert_eq!(r.samples.len(), 16_000);
        assert_eq!(r.sample_rate_hz, 16_000);
        let max_err = w
            .samples
            .iter()
            .zip(&r.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_err < 1e-3, "max quantization error {}", max_err);
    }

    #[test]
    fn opposite_stereo_channels_cancel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut writer = hound::WavWriter::create(&path, spec).unwrap();
        for i in 0..16_000i32 {
            let v = ((i % 100) - 50) as i16 * 100;
            writer.write_sample(v).unwrap();
            writer.write_sample(-v).unwrap();
        }
        writer.finalize().unwrap();
        let w = load_recording(&path).unwrap();
        assert!(w.samples.iter().all(|&s| s == 0.0));
    }
}
