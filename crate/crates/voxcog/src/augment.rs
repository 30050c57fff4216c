//! Training-time waveform augmentations: Gaussian noise, background noise,
//! time stretching, and polarity inversion.
//!
//! All transforms are deterministic functions of their seed, and
//! `apply_augmentations` derives one seed per (segment, epoch) so parallel
//! and sequential training produce byte-identical batches.

use std::path::PathBuf;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::audio::{load_recording, Segment, Waveform};
use crate::error::{Error, Result};
use crate::seed::{rng_from, segment_seed};

/// Augmentation policy: per-transform application probability and
/// parameter ranges.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AugmentSpec {
    pub p_gaussian: f64,
    pub gaussian_snr_db: (f64, f64),
    pub p_background: f64,
    pub background_snr_db: (f64, f64),
    pub background_pool: Vec<PathBuf>,
    pub p_stretch: f64,
    pub stretch_rate: (f64, f64),
    pub p_invert: f64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec {
            p_gaussian: 0.5,
            gaussian_snr_db: (5.0, 30.0),
            p_background: 0.5,
            background_snr_db: (3.0, 15.0),
            background_pool: Vec::new(),
            p_stretch: 0.5,
            stretch_rate: (0.9, 1.1),
            p_invert: 0.5,
        }
    }
}

impl AugmentSpec {
    /// No augmentation at all; used for validation/test features.
    pub fn disabled() -> Self {
        AugmentSpec {
            p_gaussian: 0.0,
            p_background: 0.0,
            p_stretch: 0.0,
            p_invert: 0.0,
            ..AugmentSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_gaussian", self.p_gaussian),
            ("p_background", self.p_background),
            ("p_stretch", self.p_stretch),
            ("p_invert", self.p_invert),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{} must be in [0, 1], got {}", name, p)));
            }
        }
        for (name, (lo, hi)) in [
            ("gaussian_snr_db", self.gaussian_snr_db),
            ("background_snr_db", self.background_snr_db),
            ("stretch_rate", self.stretch_rate),
        ] {
            if lo > hi {
                return Err(Error::Config(format!("{} range low {} > high {}", name, lo, hi)));
            }
        }
        if self.stretch_rate.0 <= 0.0 {
            return Err(Error::Config("stretch_rate range must exclude 0".into()));
        }
        Ok(())
    }
}

/// Add white Gaussian noise at the requested SNR, measured against the
/// realized noise power. Output is clipped to [-1, 1].
pub fn add_gaussian_noise(w: &Waveform, snr_db: f64, seed: u64) -> Waveform {
    let p_signal = w.power();
    if p_signal == 0.0 {
        return w.clone();
    }
    let mut rng = rng_from(seed);
    let noise: Vec<f64> = (0..w.samples.len()).map(|_| rng.sample(StandardNormal)).collect();
    mix_scaled(w, &noise, snr_db)
}

/// Mix a background noise waveform at the requested SNR. Noise shorter than
/// the signal is tiled; longer noise contributes a seeded random slice.
pub fn mix_background(w: &Waveform, noise: &Waveform, snr_db: f64, seed: u64) -> Waveform {
    let p_signal = w.power();
    if p_signal == 0.0 || noise.samples.is_empty() {
        return w.clone();
    }
    let n = w.samples.len();
    let slice: Vec<f64> = if noise.samples.len() >= n {
        let mut rng = rng_from(seed);
        let offset = rng.random_range(0..=noise.samples.len() - n);
        noise.samples[offset..offset + n].iter().map(|&s| s as f64).collect()
    } else {
        (0..n).map(|i| noise.samples[i % noise.samples.len()] as f64).collect()
    };
    mix_scaled(w, &slice, snr_db)
}

/// Scale `noise` so that 10*log10(P_signal / P_noise_scaled) = snr_db,
/// add, clip.
fn mix_scaled(w: &Waveform, noise: &[f64], snr_db: f64) -> Waveform {
    let p_signal = w.power();
    let p_noise = noise.iter().map(|&s| s * s).sum::<f64>() / noise.len() as f64;
    if p_noise == 0.0 {
        return w.clone();
    }
    let scale = (p_signal / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt();
    let samples = w
        .samples
        .iter()
        .zip(noise)
        .map(|(&s, &nv)| ((s as f64 + scale * nv) as f32).clamp(-1.0, 1.0))
        .collect();
    Waveform { samples, sample_rate_hz: w.sample_rate_hz }
}

/// Speed change by linear-interpolation resampling in time; the sample-rate
/// field is left unchanged. Output length is `round(len / rate)`.
pub fn time_stretch(w: &Waveform, rate: f64) -> Result<Waveform> {
    if !(0.5..=2.0).contains(&rate) {
        return Err(Error::InvalidParameter(format!(
            "stretch rate {} outside [0.5, 2.0]",
            rate
        )));
    }
    let n = w.samples.len();
    let out_len = (n as f64 / rate).round() as usize;
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let pos = i as f64 * rate;
        let i0 = (pos.floor() as usize).min(n.saturating_sub(1));
        let i1 = (i0 + 1).min(n - 1);
        let frac = (pos - i0 as f64) as f32;
        let s0 = w.samples[i0];
        let s1 = w.samples[i1];
        out.push(s0 + frac * (s1 - s0));
    }
    Ok(Waveform { samples: out, sample_rate_hz: w.sample_rate_hz })
}

/// Negate every sample.
pub fn invert_polarity(w: &Waveform) -> Waveform {
    Waveform {
        samples: w.samples.iter().map(|&s| -s).collect(),
        sample_rate_hz: w.sample_rate_hz,
    }
}

/// Validated augmentation policy with its background pool loaded.
pub struct AugmentEngine {
    spec: AugmentSpec,
    pool: Vec<Waveform>,
}

impl AugmentEngine {
    pub fn new(spec: AugmentSpec) -> Result<Self> {
        spec.validate()?;
        let pool: Vec<Waveform> = spec
            .background_pool
            .iter()
            .map(load_recording)
            .collect::<Result<_>>()?;
        if pool.is_empty() && spec.p_background > 0.0 {
            eprintln!(
                "warning: background pool is empty, background-noise augmentation disabled"
            );
        }
        Ok(AugmentEngine { spec, pool })
    }

    pub fn spec(&self) -> &AugmentSpec {
        &self.spec
    }

    /// Apply the four transforms in fixed order (gaussian, background,
    /// stretch, invert), each gated by its probability, with all randomness
    /// derived from the (global_seed, subject, recording, segment, epoch)
    /// tuple. The result is re-padded/truncated to the input length.
    pub fn apply(&self, seg: &Segment, global_seed: u64, epoch: usize) -> Segment {
        let fixed_len = seg.samples.len();
        let seed =
            segment_seed(global_seed, &seg.subject_id, &seg.recording_id, seg.segment_index, epoch);
        let mut rng = rng_from(seed);
        let mut w = Waveform {
            samples: seg.samples.clone(),
            sample_rate_hz: crate::audio::PIPELINE_RATE_HZ,
        };

        if rng.random::<f64>() < self.spec.p_gaussian {
            let snr = rng.random_range(self.spec.gaussian_snr_db.0..=self.spec.gaussian_snr_db.1);
            let noise_seed = rng.next_u64();
            w = add_gaussian_noise(&w, snr, noise_seed);
        }
        if rng.random::<f64>() < self.spec.p_background && !self.pool.is_empty() {
            let idx = rng.random_range(0..self.pool.len());
            let snr =
                rng.random_range(self.spec.background_snr_db.0..=self.spec.background_snr_db.1);
            let offset_seed = rng.next_u64();
            w = mix_background(&w, &self.pool[idx], snr, offset_seed);
        }
        if rng.random::<f64>() < self.spec.p_stretch {
            let rate = rng.random_range(self.spec.stretch_rate.0..=self.spec.stretch_rate.1);
            w = time_stretch(&w, rate).expect("validated stretch range");
        }
        if rng.random::<f64>() < self.spec.p_invert {
            w = invert_polarity(&w);
        }

        let mut samples = w.samples;
        samples.resize(fixed_len, 0.0);
        Segment { samples, ..seg.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, n: usize) -> Waveform {
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / 16_000.0).sin() as f32 * 0.5)
            .collect();
        Waveform { samples, sample_rate_hz: 16_000 }
    }

    fn unit_power(n: usize) -> Waveform {
        // alternating +-1 has exactly unit power
        let samples = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        Waveform { samples, sample_rate_hz: 16_000 }
    }

    fn measured_snr_db(clean: &Waveform, noisy: &Waveform) -> f64 {
        let p_sig = clean.power();
        let p_noise = clean
            .samples
            .iter()
            .zip(&noisy.samples)
            .map(|(&a, &b)| (b as f64 - a as f64).powi(2))
            .sum::<f64>()
            / clean.samples.len() as f64;
        10.0 * (p_sig / p_noise).log10()
    }

    fn seg_from(samples: Vec<f32>) -> Segment {
        Segment {
            subject_id: "s".into(),
            recording_id: "r".into(),
            start_s: 0.0,
            samples,
            label: 0,
            segment_index: 0,
        }
    }

    #[test]
    fn gaussian_zero_db_realizes_unit_noise_power() {
        // scale the mix down so nothing clips, then check the realized
        // noise power against the pre-clip definition
        let w = unit_power(16_000);
        let noisy = add_gaussian_noise(&w, 0.0, 42);
        // no |sample| can exceed 1 after clipping, so check via SNR on an
        // unclipped variant instead
        let quiet = Waveform {
            samples: w.samples.iter().map(|&s| s * 0.1).collect(),
            sample_rate_hz: 16_000,
        };
        let quiet_noisy = add_gaussian_noise(&quiet, 0.0, 42);
        let p_noise = quiet
            .samples
            .iter()
            .zip(&quiet_noisy.samples)
            .map(|(&a, &b)| (b as f64 - a as f64).powi(2))
            .sum::<f64>()
            / quiet.samples.len() as f64;
        assert!((p_noise / quiet.power() - 1.0).abs() < 1e-5, "ratio {}", p_noise / quiet.power());
        assert!(noisy.samples.iter().all(|s| (-1.0..=1.0).contains(s)));
    }

    #[test]
    fn gaussian_zero_power_guard() {
        let w = Waveform { samples: vec![0.0; 1000], sample_rate_hz: 16_000 };
        let out = add_gaussian_noise(&w, 10.0, 1);
        assert_eq!(out.samples, w.samples);
    }

    #[test]
    fn gaussian_snr_within_half_db() {
        let w = tone(440.0, 32_000);
        for (seed, snr) in [(1u64, 20.0), (2, 10.0), (3, 25.0)] {
            let noisy = add_gaussian_noise(&w, snr, seed);
            let measured = measured_snr_db(&w, &noisy);
            assert!((measured - snr).abs() <= 0.5, "snr {} measured {}", snr, measured);
        }
    }

    #[test]
    fn background_equal_length_zero_db_is_plain_sum() {
        let w = unit_power(1_000);
        let mut noise = unit_power(1_000);
        // shift phase so the sum stays in [-1,1]*... actually use smaller amp
        noise.samples.iter_mut().for_each(|s| *s = -*s * 1.0);
        let quiet = Waveform {
            samples: w.samples.iter().map(|&s| s * 0.4).collect(),
            sample_rate_hz: 16_000,
        };
        let qnoise = Waveform {
            samples: noise.samples.iter().map(|&s| s * 0.4).collect(),
            sample_rate_hz: 16_000,
        };
        let out = mix_background(&quiet, &qnoise, 0.0, 9);
        for (o, (a, b)) in out.samples.iter().zip(quiet.samples.iter().zip(&qnoise.samples)) {
            assert!((o - (a + b)).abs() <= 1e-6);
        }
    }

    #[test]
    fn background_tiles_short_noise() {
        let w = tone(300.0, 16_000 * 15);
        let noise = tone(50.0, 16_000);
        let out = mix_background(&w, &noise, 10.0, 5);
        assert_eq!(out.samples.len(), w.samples.len());
        let measured = measured_snr_db(&w, &out);
        assert!((measured - 10.0).abs() <= 0.5, "measured {}", measured);
    }

    #[test]
    fn stretch_identity_and_length() {
        let w = tone(440.0, 160_000);
        let same = time_stretch(&w, 1.0).unwrap();
        assert_eq!(same.samples, w.samples);
        let faster = time_stretch(&w, 1.25).unwrap();
        assert_eq!(faster.samples.len(), 128_000);
        assert_eq!(faster.sample_rate_hz, w.sample_rate_hz);
        assert!(time_stretch(&w, 2.5).is_err());
    }

    #[test]
    fn stretch_scales_tone_frequency() {
        use rustfft::num_complex::Complex;
        let w = tone(440.0, 160_000);
        let out = time_stretch(&w, 1.1).unwrap();
        let n = out.samples.len();
        let mut planner = rustfft::FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let mut buf: Vec<Complex<f64>> =
            out.samples.iter().map(|&s| Complex::new(s as f64, 0.0)).collect();
        fft.process(&mut buf);
        let peak = (0..n / 2)
            .max_by(|&a, &b| buf[a].norm().partial_cmp(&buf[b].norm()).unwrap())
            .unwrap() as f64
            * 16_000.0
            / n as f64;
        assert!((peak - 484.0).abs() <= 2.0, "peak {}", peak);
    }

    #[test]
    fn polarity_is_involution() {
        let w = tone(440.0, 1_000);
        let once = invert_polarity(&w);
        assert_eq!(once.samples[10], -w.samples[10]);
        let twice = invert_polarity(&once);
        assert_eq!(twice.samples, w.samples);
        let zeros = Waveform { samples: vec![0.0; 10], sample_rate_hz: 16_000 };
        assert!(invert_polarity(&zeros).samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn apply_noop_spec_is_identity() {
        let engine = AugmentEngine::new(AugmentSpec::disabled()).unwrap();
        let seg = seg_from(tone(440.0, 240_000).samples);
        let out = engine.apply(&seg, 7, 0);
        assert_eq!(out.samples, seg.samples);
    }

    #[test]
    fn apply_is_deterministic() {
        let engine = AugmentEngine::new(AugmentSpec::default()).unwrap();
        let seg = seg_from(tone(440.0, 240_000).samples);
        let a = engine.apply(&seg, 7, 3);
        let b = engine.apply(&seg, 7, 3);
        assert_eq!(a.samples, b.samples);
        let c = engine.apply(&seg, 7, 4);
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.samples.len(), seg.samples.len());
    }

    #[test]
    fn apply_single_transform_matches_direct_call() {
        let spec = AugmentSpec {
            p_gaussian: 0.0,
            p_background: 0.0,
            p_stretch: 0.0,
            p_invert: 1.0,
            ..AugmentSpec::default()
        };
        let engine = AugmentEngine::new(spec).unwrap();
        let seg = seg_from(tone(440.0, 240_000).samples);
        let out = engine.apply(&seg, 7, 0);
        let expected = invert_polarity(&Waveform {
            samples: seg.samples.clone(),
            sample_rate_hz: 16_000,
        });
        assert_eq!(out.samples, expected.samples);
    }

    #[test]
    fn spec_validation() {
        let mut spec = AugmentSpec::default();
        spec.p_gaussian = 1.5;
        assert!(spec.validate().is_err());
        let mut spec = AugmentSpec::default();
        spec.stretch_rate = (1.1, 0.9);
        assert!(spec.validate().is_err());
    }
}
