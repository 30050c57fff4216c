//! Parametric speech-like corpus generator.
//!
//! Dialect (formant/prosody profile) and impairment (slowed, lengthened
//! speech with pauses) are independent factors, so transfer effects can be
//! probed at desk scale. No claim of phonetic realism: utterances are
//! glottal pulse trains through two formant resonators under per-syllable
//! amplitude envelopes.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{write_wav, Waveform};
use crate::error::{Error, Result};
use crate::manifest::{save_manifest, SubjectRecord};
use crate::seed::{fnv1a64, rng_from};

/// One speaker's voice parameters. Dialect-level values are a fixed
/// function of `dialect_id`; subjects add ±5% multiplicative jitter.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DialectProfile {
    pub dialect_id: usize,
    pub f0_base_hz: f64,
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub syllable_rate: f64,
    pub vowel_duration_base_s: f64,
}

/// How impairment distorts production: slower rate, longer vowels, pauses.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ImpairmentEffect {
    pub rate_multiplier: f64,
    pub vowel_lengthening: f64,
    pub pause_probability: f64,
    pub pause_min_s: f64,
    pub pause_max_s: f64,
}

impl Default for ImpairmentEffect {
    fn default() -> Self {
        ImpairmentEffect {
            rate_multiplier: 0.7,
            vowel_lengthening: 1.4,
            pause_probability: 0.15,
            pause_min_s: 0.3,
            pause_max_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CorpusSpec {
    #[serde(default = "default_n_dialects")]
    pub n_dialects: usize,
    #[serde(default = "default_pretrain_subjects")]
    pub pretrain_subjects_per_dialect: usize,
    #[serde(default = "default_downstream_subjects")]
    pub downstream_subjects_per_cell: usize,
    #[serde(default = "default_utterances")]
    pub utterances_per_subject: usize,
    #[serde(default = "default_duration_min")]
    pub duration_min_s: f64,
    #[serde(default = "default_duration_max")]
    pub duration_max_s: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: u32,
    #[serde(default)]
    pub seed: u64,
}

fn default_n_dialects() -> usize {
    4
}
fn default_pretrain_subjects() -> usize {
    12
}
fn default_downstream_subjects() -> usize {
    8
}
fn default_utterances() -> usize {
    2
}
fn default_duration_min() -> f64 {
    30.0
}
fn default_duration_max() -> f64 {
    60.0
}
fn default_sample_rate() -> u32 {
    16_000
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_dialects: default_n_dialects(),
            pretrain_subjects_per_dialect: default_pretrain_subjects(),
            downstream_subjects_per_cell: default_downstream_subjects(),
            utterances_per_subject: default_utterances(),
            duration_min_s: default_duration_min(),
            duration_max_s: default_duration_max(),
            sample_rate_hz: default_sample_rate(),
            seed: 0,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_dialects == 0
            || self.pretrain_subjects_per_dialect == 0
            || self.downstream_subjects_per_cell == 0
            || self.utterances_per_subject == 0
        {
            return Err(Error::InvalidParameter("corpus counts must be positive".into()));
        }
        if !(self.duration_min_s >= 3.0 && self.duration_max_s >= self.duration_min_s) {
            return Err(Error::InvalidParameter(
                "utterance durations must satisfy 3 <= min <= max".into(),
            ));
        }
        if self.sample_rate_hz == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        Ok(())
    }
}

const DIALECT_PARENT_SEED: u64 = 0x76_6f_78_63; // stable across corpora

/// Dialect-level parameters: fixed per `dialect_id`, independent of any
/// corpus seed. The formant-offset sign pattern comes from the id's low
/// bits, so distinct dialects always separate by at least 100 Hz in some
/// formant; magnitudes are drawn from 50-200 Hz.
fn dialect_base(dialect_id: usize) -> DialectProfile {
    let mut rng = rng_from(fnv1a64(&[
        &DIALECT_PARENT_SEED.to_le_bytes(),
        b"dialect",
        &(dialect_id as u64).to_le_bytes(),
    ]));
    let f0_base_hz = rng.random_range(90.0..220.0);
    let off1 = rng.random_range(50.0..200.0);
    let off2 = rng.random_range(50.0..200.0);
    let s1 = if dialect_id & 1 == 0 { 1.0 } else { -1.0 };
    let s2 = if dialect_id & 2 == 0 { 1.0 } else { -1.0 };
    // Rates are spread evenly across 3.5-5.0 syllables/s so articulation
    // rate alone cannot separate impaired speech from a slower dialect:
    // an impaired fast-dialect speaker (5.0 x 0.7 = 3.5) overlaps a healthy
    // slow-dialect one. Dialect identity disambiguates.
    let syllable_rate = 3.5 + 1.5 * ((dialect_id % 4) as f64) / 3.0;
    DialectProfile {
        dialect_id,
        f0_base_hz,
        f1_hz: 500.0 + s1 * off1,
        f2_hz: 1500.0 + s2 * off2,
        syllable_rate,
        vowel_duration_base_s: 0.6 / syllable_rate,
    }
}

/// Subject-level profile: the dialect's formant/rate parameters with ±5%
/// jitter. Pitch is a speaker trait, not a dialect trait: f0 is drawn per
/// profile from the full 90-220 Hz range, so it carries no dialect
/// information.
pub fn make_profile(dialect_id: usize, subject_seed: u64) -> DialectProfile {
    let base = dialect_base(dialect_id);
    let mut rng = rng_from(fnv1a64(&[b"profile", &subject_seed.to_le_bytes()]));
    let f0_base_hz = rng.random_range(90.0..220.0);
    let mut jitter = || rng.random_range(0.95..1.05);
    DialectProfile {
        dialect_id,
        f0_base_hz,
        f1_hz: base.f1_hz * jitter(),
        f2_hz: base.f2_hz * jitter(),
        syllable_rate: base.syllable_rate * jitter(),
        vowel_duration_base_s: base.vowel_duration_base_s * jitter(),
    }
}

/// Two-pole resonator applied in place.
fn resonate(x: &mut [f32], center_hz: f64, bandwidth_hz: f64, rate: f64) {
    let r = (-std::f64::consts::PI * bandwidth_hz / rate).exp();
    let theta = 2.0 * std::f64::consts::PI * center_hz / rate;
    let a1 = 2.0 * r * theta.cos();
    let a2 = -r * r;
    let (mut y1, mut y2) = (0.0f64, 0.0f64);
    for v in x.iter_mut() {
        let y = *v as f64 + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *v = y as f32;
    }
}

/// Synthesize one utterance: jittered glottal pulse train with slow f0
/// declination, formant resonators at (F1, F2), raised-cosine syllable
/// envelopes, peak-normalized to 0.9.
pub fn synth_utterance(
    profile: &DialectProfile,
    impaired: bool,
    duration_s: f64,
    sample_rate_hz: u32,
    seed: u64,
) -> Result<Waveform> {
    if duration_s < 3.0 {
        return Err(Error::InvalidParameter(format!(
            "utterance duration {:.2} s is below the 3 s minimum",
            duration_s
        )));
    }
    let rate = sample_rate_hz as f64;
    let n = (duration_s * rate).round() as usize;
    let effect = ImpairmentEffect::default();
    let mut rng = rng_from(seed);

    // glottal source: pulse train with declination and 2% period jitter,
    // plus a little aspiration noise so the spectrum has a continuum
    let mut excitation = vec![0.0f32; n];
    let mut t = 0.0f64;
    while t < duration_s {
        let f0 = profile.f0_base_hz * (1.0 - 0.1 * t / duration_s);
        let idx = (t * rate) as usize;
        if idx < n {
            excitation[idx] = 1.0;
        }
        t += (1.0 / f0) * (1.0 + 0.02 * rng.random_range(-1.0..1.0));
    }
    for v in excitation.iter_mut() {
        *v += 0.02 * rng.random_range(-1.0f32..1.0);
    }

    resonate(&mut excitation, profile.f1_hz, 80.0, rate);
    resonate(&mut excitation, profile.f2_hz, 120.0, rate);

    // syllable envelopes
    let syllable_rate = if impaired {
        profile.syllable_rate * effect.rate_multiplier
    } else {
        profile.syllable_rate
    };
    let period_s = 1.0 / syllable_rate;
    let vowel_s = {
        let v = if impaired {
            profile.vowel_duration_base_s * effect.vowel_lengthening
        } else {
            profile.vowel_duration_base_s
        };
        v.min(0.9 * period_s)
    };
    let mut envelope = vec![0.0f32; n];
    let mut cursor = 0.0f64;
    while cursor < duration_s {
        let start = (cursor * rate) as usize;
        let len = (vowel_s * rate) as usize;
        for i in 0..len {
            let j = start + i;
            if j >= n {
                break;
            }
            let phase = i as f64 / len as f64;
            envelope[j] =
                (0.5 * (1.0 - (2.0 * std::f64::consts::PI * phase).cos())) as f32;
        }
        cursor += period_s;
        if impaired && rng.random_range(0.0..1.0) < effect.pause_probability {
            cursor += rng.random_range(effect.pause_min_s..effect.pause_max_s);
        }
    }

    let mut samples: Vec<f32> = excitation
        .iter()
        .zip(&envelope)
        .map(|(&x, &e)| x * e)
        .collect();
    let peak = samples.iter().fold(0.0f32, |a, &b| a.max(b.abs()));
    if peak > 0.0 {
        let g = 0.9 / peak;
        for s in samples.iter_mut() {
            *s *= g;
        }
    }
    Waveform::new(samples, sample_rate_hz)
}

/// Estimated syllable rate from the RMS envelope: 1 / median inter-peak
/// interval. The median makes the estimate robust to inserted pauses.
pub fn measure_syllable_rate(w: &Waveform) -> Result<f64> {
    let rate = w.sample_rate_hz as f64;
    let win = (0.025 * rate) as usize;
    let hop = (0.010 * rate) as usize;
    if w.samples.len() < win {
        return Err(Error::InvalidParameter("waveform too short to measure".into()));
    }
    let n_frames = (w.samples.len() - win) / hop + 1;
    let mut env: Vec<f64> = (0..n_frames)
        .map(|f| {
            let s = &w.samples[f * hop..f * hop + win];
            (s.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>() / win as f64).sqrt()
        })
        .collect();
    // light smoothing
    let raw = env.clone();
    for i in 0..env.len() {
        let lo = i.saturating_sub(2);
        let hi = (i + 3).min(raw.len());
        env[i] = raw[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
    }
    let max = env.iter().cloned().fold(0.0f64, f64::max);
    let thresh = 0.3 * max;
    let mut peaks = Vec::new();
    for i in 1..env.len().saturating_sub(1) {
        if env[i] > thresh && env[i] >= env[i - 1] && env[i] > env[i + 1] {
            if let Some(&last) = peaks.last() {
                if i - last < (0.08 / 0.010) as usize {
                    continue;
                }
            }
            peaks.push(i);
        }
    }
    if peaks.len() < 3 {
        return Err(Error::Evaluation("too few envelope peaks to estimate a rate".into()));
    }
    let mut intervals: Vec<f64> = peaks.windows(2).map(|p| (p[1] - p[0]) as f64 * 0.010).collect();
    intervals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = intervals[intervals.len() / 2];
    Ok(1.0 / median)
}

/// Ground truth recorded alongside the corpus for oracle checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectGroundTruth {
    pub subject_id: String,
    pub dialect: String,
    pub impaired: bool,
    pub profile: DialectProfile,
}

pub fn dialect_name(dialect_id: usize) -> String {
    format!("dialect_{}", dialect_id)
}

fn subject_seed(spec: &CorpusSpec, subject_id: &str) -> u64 {
    fnv1a64(&[&spec.seed.to_le_bytes(), b"subject", subject_id.as_bytes()])
}

/// Seed that fully determines one utterance (duration and synthesis noise).
pub fn utterance_seed(spec: &CorpusSpec, subject_id: &str, utterance_index: usize) -> u64 {
    fnv1a64(&[
        &spec.seed.to_le_bytes(),
        b"utterance",
        subject_id.as_bytes(),
        &(utterance_index as u64).to_le_bytes(),
    ])
}

/// Regenerate one utterance bit-exactly from its coordinates.
pub fn generate_utterance(
    spec: &CorpusSpec,
    dialect_id: usize,
    subject_id: &str,
    impaired: bool,
    utterance_index: usize,
) -> Result<Waveform> {
    let profile = make_profile(dialect_id, subject_seed(spec, subject_id));
    let seed = utterance_seed(spec, subject_id, utterance_index);
    let duration = rng_from(seed).random_range(spec.duration_min_s..spec.duration_max_s);
    synth_utterance(&profile, impaired, duration, spec.sample_rate_hz, seed)
}

#[derive(Debug, Clone)]
struct PlannedSubject {
    subject_id: String,
    dialect_id: usize,
    impaired: bool,
    pretrain: bool,
}

fn plan_subjects(spec: &CorpusSpec) -> Vec<PlannedSubject> {
    let mut plan = Vec::new();
    for d in 0..spec.n_dialects {
        for i in 0..spec.pretrain_subjects_per_dialect {
            plan.push(PlannedSubject {
                subject_id: format!("pre_d{}_s{:02}", d, i),
                dialect_id: d,
                impaired: false,
                pretrain: true,
            });
        }
    }
    for d in 0..spec.n_dialects {
        for (impaired, tag) in [(false, "hc"), (true, "imp")] {
            for i in 0..spec.downstream_subjects_per_cell {
                plan.push(PlannedSubject {
                    subject_id: format!("dx_d{}_{}_s{:02}", d, tag, i),
                    dialect_id: d,
                    impaired,
                    pretrain: false,
                });
            }
        }
    }
    plan
}

/// Write the corpus: WAVE files, pretrain + downstream manifests, and a
/// ground-truth sidecar. Returns the two manifest paths. Fully determined
/// by `spec.seed`.
pub fn generate_corpus<P: AsRef<Path>>(spec: &CorpusSpec, out_dir: P) -> Result<(PathBuf, PathBuf)> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    let wav_dir = out_dir.join("wav");
    fs::create_dir_all(&wav_dir)?;

    let plan = plan_subjects(spec);

    // synthesis fans out; per-utterance seeds keep the result identical to
    // a sequential run
    let jobs: Vec<(usize, usize)> = plan
        .iter()
        .enumerate()
        .flat_map(|(si, _)| (0..spec.utterances_per_subject).map(move |u| (si, u)))
        .collect();
    let waves: Vec<(String, Waveform)> = jobs
        .par_iter()
        .map(|&(si, u)| {
            let s = &plan[si];
            let w = generate_utterance(spec, s.dialect_id, &s.subject_id, s.impaired, u)?;
            Ok((format!("{}_u{}.wav", s.subject_id, u), w))
        })
        .collect::<Result<Vec<_>>>()?;
    for (name, w) in &waves {
        write_wav(wav_dir.join(name), w)?;
    }

    let mut pretrain = Vec::new();
    let mut downstream = Vec::new();
    let mut truth = Vec::new();
    for s in &plan {
        let recordings: Vec<PathBuf> = (0..spec.utterances_per_subject)
            .map(|u| PathBuf::from(format!("wav/{}_u{}.wav", s.subject_id, u)))
            .collect();
        let dialect = dialect_name(s.dialect_id);
        let label = if s.pretrain {
            dialect.clone()
        } else if s.impaired {
            "IMP".to_string()
        } else {
            "HC".to_string()
        };
        let rec = SubjectRecord {
            subject_id: s.subject_id.clone(),
            label,
            recordings,
            dialect: Some(dialect.clone()),
            split: None,
        };
        if s.pretrain {
            pretrain.push(rec);
        } else {
            downstream.push(rec);
        }
        truth.push(SubjectGroundTruth {
            subject_id: s.subject_id.clone(),
            dialect,
            impaired: s.impaired,
            profile: make_profile(s.dialect_id, subject_seed(spec, &s.subject_id)),
        });
    }

    let pretrain_path = out_dir.join("pretrain.jsonl");
    let downstream_path = out_dir.join("downstream.jsonl");
    save_manifest(&pretrain, &pretrain_path)?;
    save_manifest(&downstream, &downstream_path)?;
    fs::write(out_dir.join("profiles.json"), serde_json::to_vec_pretty(&truth)?)?;
    Ok((pretrain_path, downstream_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_deterministic_and_jittered() {
        let a = make_profile(1, 42);
        let b = make_profile(1, 42);
        assert_eq!(a, b);
        let c = make_profile(1, 43);
        assert_ne!(a, c);
        // formant jitter stays within 5% of the dialect base; f0 is a free
        // per-subject draw inside the speaker range
        let base = dialect_base(1);
        assert!((c.f1_hz / base.f1_hz - 1.0).abs() <= 0.05);
        assert!((90.0..220.0).contains(&c.f0_base_hz));
        // same dialect, same offset sign pattern
        assert_eq!(a.f1_hz.signum(), c.f1_hz.signum());
    }

    #[test]
    fn dialects_separate_in_formant_space() {
        for i in 0..4 {
            for j in (i + 1)..4 {
                let a = dialect_base(i);
                let b = dialect_base(j);
                let d1 = (a.f1_hz - b.f1_hz).abs();
                let d2 = (a.f2_hz - b.f2_hz).abs();
                assert!(d1.max(d2) >= 50.0, "dialects {} and {} too close", i, j);
            }
        }
    }

    #[test]
    fn profile_invariants_hold() {
        for d in 0..4 {
            for s in 0..20 {
                let p = make_profile(d, s);
                assert!(p.f1_hz < p.f2_hz && p.f2_hz < 8000.0);
                assert!(p.syllable_rate > 0.0);
                assert!((90.0 * 0.95..220.0 * 1.05).contains(&p.f0_base_hz));
            }
        }
    }

    #[test]
    fn measured_rate_matches_profile() {
        let p = make_profile(0, 7);
        let w = synth_utterance(&p, false, 30.0, 16_000, 99).unwrap();
        let measured = measure_syllable_rate(&w).unwrap();
        assert!(
            (measured / p.syllable_rate - 1.0).abs() <= 0.10,
            "measured {} vs profile {}",
            measured,
            p.syllable_rate
        );
    }

    #[test]
    fn impairment_slows_the_measured_rate() {
        for (d, s) in [(0usize, 1u64), (1, 2), (2, 3), (3, 4)] {
            let p = make_profile(d, s);
            let clean = synth_utterance(&p, false, 40.0, 16_000, 5).unwrap();
            let imp = synth_utterance(&p, true, 40.0, 16_000, 5).unwrap();
            let ratio =
                measure_syllable_rate(&imp).unwrap() / measure_syllable_rate(&clean).unwrap();
            assert!(
                (0.6..=0.8).contains(&ratio),
                "dialect {} seed {}: ratio {}",
                d,
                s,
                ratio
            );
        }
    }

    #[test]
    fn vowel_spectrum_peaks_near_a_formant() {
        use rustfft::{num_complex::Complex, FftPlanner};
        let p = make_profile(2, 11);
        let w = synth_utterance(&p, false, 30.0, 16_000, 3).unwrap();

        // averaged periodogram, then smoothing wider than any harmonic
        // spacing so the envelope peak sits on the resonance
        let n_fft = 4096;
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n_fft);
        let mut power = vec![0.0f64; n_fft / 2 + 1];
        let mut frames = 0;
        let mut start = 0;
        while start + n_fft <= w.samples.len() {
            let mut buf: Vec<Complex<f64>> = w.samples[start..start + n_fft]
                .iter()
                .map(|&v| Complex::new(v as f64, 0.0))
                .collect();
            fft.process(&mut buf);
            for (i, p) in power.iter_mut().enumerate() {
                *p += buf[i].norm_sqr();
            }
            frames += 1;
            start += n_fft / 2;
        }
        assert!(frames > 10);
        let bin_hz = 16_000.0 / n_fft as f64;
        let half_width = (1.2 * p.f0_base_hz / bin_hz) as usize;
        let smoothed: Vec<f64> = (0..power.len())
            .map(|i| {
                let lo = i.saturating_sub(half_width);
                let hi = (i + half_width + 1).min(power.len());
                power[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect();
        let lo_bin = (100.0 / bin_hz) as usize;
        let peak_bin = (lo_bin..smoothed.len())
            .max_by(|&a, &b| smoothed[a].partial_cmp(&smoothed[b]).unwrap())
            .unwrap();
        let peak_hz = peak_bin as f64 * bin_hz;
        let dist = (peak_hz - p.f1_hz).abs().min((peak_hz - p.f2_hz).abs());
        assert!(
            dist <= 40.0,
            "peak {} Hz vs F1 {} / F2 {}",
            peak_hz,
            p.f1_hz,
            p.f2_hz
        );
    }

    #[test]
    fn short_utterance_rejected() {
        let p = make_profile(0, 1);
        assert!(synth_utterance(&p, false, 2.0, 16_000, 1).is_err());
    }

    #[test]
    fn utterance_regeneration_is_bit_exact() {
        let spec = CorpusSpec { duration_min_s: 5.0, duration_max_s: 8.0, ..CorpusSpec::default() };
        let a = generate_utterance(&spec, 1, "pre_d1_s00", false, 0).unwrap();
        let b = generate_utterance(&spec, 1, "pre_d1_s00", false, 0).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = generate_utterance(&spec, 1, "pre_d1_s00", false, 1).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn corpus_layout_counts_and_disjoint_pools() {
        let spec = CorpusSpec {
            n_dialects: 2,
            pretrain_subjects_per_dialect: 2,
            downstream_subjects_per_cell: 2,
            utterances_per_subject: 1,
            duration_min_s: 4.0,
            duration_max_s: 6.0,
            ..CorpusSpec::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let (pre_path, down_path) = generate_corpus(&spec, dir.path()).unwrap();
        let pre = crate::manifest::load_manifest(&pre_path).unwrap();
        let down = crate::manifest::load_manifest(&down_path).unwrap();
        assert_eq!(pre.len(), 4);
        assert_eq!(down.len(), 8);
        let pre_ids: std::collections::BTreeSet<_> =
            pre.iter().map(|r| r.subject_id.clone()).collect();
        let down_ids: std::collections::BTreeSet<_> =
            down.iter().map(|r| r.subject_id.clone()).collect();
        assert!(pre_ids.is_disjoint(&down_ids));
        // pretrain labels are dialect names; downstream labels HC/IMP
        assert!(pre.iter().all(|r| r.label.starts_with("dialect_")));
        assert!(down.iter().all(|r| r.label == "HC" || r.label == "IMP"));
        // balanced cells: each dialect appears equally in both classes
        for d in 0..2 {
            let name = dialect_name(d);
            let hc = down
                .iter()
                .filter(|r| r.dialect.as_deref() == Some(name.as_str()) && r.label == "HC")
                .count();
            let imp = down
                .iter()
                .filter(|r| r.dialect.as_deref() == Some(name.as_str()) && r.label == "IMP")
                .count();
            assert_eq!((hc, imp), (2, 2));
        }
        // every referenced file exists
        for r in pre.iter().chain(down.iter()) {
            for rec in &r.recordings {
                assert!(dir.path().join(rec).exists());
            }
        }
        assert!(dir.path().join("profiles.json").exists());
    }

    #[test]
    fn regeneration_is_byte_identical() {
        let spec = CorpusSpec {
            n_dialects: 2,
            pretrain_subjects_per_dialect: 1,
            downstream_subjects_per_cell: 1,
            utterances_per_subject: 1,
            duration_min_s: 4.0,
            duration_max_s: 5.0,
            seed: 9,
            ..CorpusSpec::default()
        };
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        generate_corpus(&spec, d1.path()).unwrap();
        generate_corpus(&spec, d2.path()).unwrap();
        for entry in fs::read_dir(d1.path().join("wav")).unwrap() {
            let name = entry.unwrap().file_name();
            let a = fs::read(d1.path().join("wav").join(&name)).unwrap();
            let b = fs::read(d2.path().join("wav").join(&name)).unwrap();
            assert_eq!(a, b, "{:?} differs between runs", name);
        }
        assert_eq!(
            fs::read(d1.path().join("pretrain.jsonl")).unwrap(),
            fs::read(d2.path().join("pretrain.jsonl")).unwrap()
        );
        assert_eq!(
            fs::read(d1.path().join("downstream.jsonl")).unwrap(),
            fs::read(d2.path().join("downstream.jsonl")).unwrap()
        );
    }
}
