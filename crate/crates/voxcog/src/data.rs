//! Manifest-to-segments plumbing shared by training and evaluation.

use std::path::{Path, PathBuf};

use crate::audio::{load_recording, segment_recording, Segment, SegmentationParams};
use crate::error::Result;
use crate::features::{log_mel, FeatureConfig, FeatureMatrix};
use crate::manifest::{label_index, SubjectRecord};

/// Resolve a manifest-relative recording path against the manifest's
/// directory; absolute paths pass through.
pub fn resolve_recording(base: &Path, rec: &Path) -> PathBuf {
    if rec.is_absolute() {
        rec.to_path_buf()
    } else {
        base.join(rec)
    }
}

/// Load and segment every recording of one subject. `label` is the class
/// index the segments inherit.
pub fn subject_segments(
    record: &SubjectRecord,
    label: usize,
    base: &Path,
    params: &SegmentationParams,
) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    for path in &record.recordings {
        let full = resolve_recording(base, path);
        let wave = load_recording(&full)?;
        let recording_id = full
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| full.display().to_string());
        segments.extend(segment_recording(
            &wave,
            &record.subject_id,
            &recording_id,
            label,
            params,
        )?);
    }
    Ok(segments)
}

/// Segment a whole manifest. The label of each segment is the index of the
/// subject's class name (or dialect name, if `use_dialect`) in `classes`.
pub fn manifest_segments(
    records: &[SubjectRecord],
    classes: &[String],
    use_dialect: bool,
    base: &Path,
    params: &SegmentationParams,
) -> Result<Vec<Segment>> {
    let mut all = Vec::new();
    for rec in records {
        let name = if use_dialect {
            rec.dialect.as_deref().ok_or_else(|| {
                crate::error::Error::Manifest(format!(
                    "subject {} has no dialect label",
                    rec.subject_id
                ))
            })?
        } else {
            rec.label.as_str()
        };
        let label = label_index(classes, name)?;
        all.extend(subject_segments(rec, label, base, params)?);
    }
    Ok(all)
}

/// Log-mel features of a clean (unaugmented) segment.
pub fn clean_features(seg: &Segment, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    log_mel(&seg.samples, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{write_wav, Waveform, PIPELINE_RATE_HZ};

    #[test]
    fn segments_inherit_subject_and_label() {
        let dir = tempfile::tempdir().unwrap();
        let samples: Vec<f32> = (0..PIPELINE_RATE_HZ as usize * 20)
            .map(|i| 0.1 * (i as f32 * 0.01).sin())
            .collect();
        write_wav(
            dir.path().join("r1.wav"),
            &Waveform::new(samples, PIPELINE_RATE_HZ).unwrap(),
        )
        .unwrap();
        let rec = SubjectRecord {
            subject_id: "s1".into(),
            label: "IMP".into(),
            recordings: vec![PathBuf::from("r1.wav")],
            dialect: None,
            split: None,
        };
        let classes = vec!["HC".to_string(), "IMP".to_string()];
        let segs = manifest_segments(
            &[rec],
            &classes,
            false,
            dir.path(),
            &SegmentationParams::default(),
        )
        .unwrap();
        assert!(!segs.is_empty());
        assert!(segs.iter().all(|s| s.subject_id == "s1" && s.label == 1));
    }

    #[test]
    fn absolute_paths_pass_through() {
        let abs = Path::new("/tmp/x.wav");
        assert_eq!(resolve_recording(Path::new("/data"), abs), abs);
        assert_eq!(
            resolve_recording(Path::new("/data"), Path::new("x.wav")),
            Path::new("/data/x.wav")
        );
    }
}
