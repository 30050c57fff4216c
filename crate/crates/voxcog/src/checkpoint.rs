//! Bit-exact model serialization: the VXCG container.
//!
//! Layout: magic `VXCG`, u32 format version, JSON metadata block, tensor
//! directory (name, shape, byte offset into the blob section), then
//! contiguous little-endian f32 blobs. Round-trips are byte-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::model::{Model, ModelConfig, Stage};

pub const MAGIC: &[u8; 4] = b"VXCG";
pub const FORMAT_VERSION: u32 = 1;

/// Where a checkpoint came from: seed, training stage, and the epoch whose
/// snapshot was kept.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub stage: Stage,
    pub epoch: usize,
}

/// Everything needed to rebuild and safely reuse a serialized model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckpointMeta {
    pub model: ModelConfig,
    pub features: FeatureConfig,
    pub class_names: Vec<String>,
    pub provenance: Provenance,
    #[serde(default)]
    pub config_digest: String,
}

impl CheckpointMeta {
    /// Reject a checkpoint whose feature geometry disagrees with the run
    /// configuration.
    pub fn check_feature_compat(&self, expected: &FeatureConfig) -> Result<()> {
        if self.features != *expected {
            return Err(Error::Checkpoint(format!(
                "feature-geometry mismatch: checkpoint has {:?}, run expects {:?}",
                self.features, expected
            )));
        }
        Ok(())
    }
}

pub fn save_checkpoint<P: AsRef<Path>>(
    model: &mut Model<f32>,
    meta: &CheckpointMeta,
    path: P,
) -> Result<()> {
    let tensors = model.export_tensors();
    let meta_json = serde_json::to_vec(meta)?;

    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(MAGIC)?;
    file.write_all(&FORMAT_VERSION.to_le_bytes())?;
    file.write_all(&(meta_json.len() as u32).to_le_bytes())?;
    file.write_all(&meta_json)?;

    file.write_all(&(tensors.len() as u32).to_le_bytes())?;
    let mut offset = 0u64;
    for (name, shape, values) in &tensors {
        file.write_all(&(name.len() as u32).to_le_bytes())?;
        file.write_all(name.as_bytes())?;
        file.write_all(&(shape.len() as u32).to_le_bytes())?;
        for &d in shape {
            file.write_all(&(d as u64).to_le_bytes())?;
        }
        file.write_all(&offset.to_le_bytes())?;
        offset += values.len() as u64 * 4;
    }
    file.write_all(&offset.to_le_bytes())?; // blob section length
    for (_, _, values) in &tensors {
        for v in values {
            file.write_all(&v.to_le_bytes())?;
        }
    }
    file.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Checkpoint(format!("truncated file while reading {}", what)))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read, what: &str) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Checkpoint(format!("truncated file while reading {}", what)))?;
    Ok(u64::from_le_bytes(buf))
}

pub fn load_checkpoint<P: AsRef<Path>>(path: P) -> Result<(Model<f32>, CheckpointMeta)> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let mut file = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("truncated file while reading magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}, not a VXCG checkpoint",
            magic
        )));
    }
    let version = read_u32(&mut file, "format version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {} unsupported (expected {})",
            version, FORMAT_VERSION
        )));
    }
    let meta_len = read_u32(&mut file, "metadata length")? as usize;
    let mut meta_buf = vec![0u8; meta_len];
    file.read_exact(&mut meta_buf)
        .map_err(|_| Error::Checkpoint("truncated file while reading metadata".into()))?;
    let meta: CheckpointMeta = serde_json::from_slice(&meta_buf)
        .map_err(|e| Error::Checkpoint(format!("invalid metadata JSON: {}", e)))?;

    let n_tensors = read_u32(&mut file, "tensor count")? as usize;
    let mut directory: Vec<(String, Vec<usize>, u64)> = Vec::with_capacity(n_tensors);
    for i in 0..n_tensors {
        let name_len = read_u32(&mut file, "tensor name length")? as usize;
        let mut name_buf = vec![0u8; name_len];
        file.read_exact(&mut name_buf)
            .map_err(|_| Error::Checkpoint(format!("truncated directory entry {}", i)))?;
        let name = String::from_utf8(name_buf)
            .map_err(|_| Error::Checkpoint(format!("non-UTF8 tensor name at entry {}", i)))?;
        let ndim = read_u32(&mut file, "tensor rank")? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u64(&mut file, "tensor dimension")? as usize);
        }
        let offset = read_u64(&mut file, "tensor offset")?;
        directory.push((name, shape, offset));
    }
    let blob_len = read_u64(&mut file, "blob length")?;

    // offsets must be non-overlapping and in-bounds
    let mut expected = 0u64;
    for (name, shape, offset) in &directory {
        let size = shape.iter().product::<usize>() as u64 * 4;
        if *offset != expected {
            return Err(Error::Checkpoint(format!(
                "tensor {} at offset {} overlaps or leaves a gap (expected {})",
                name, offset, expected
            )));
        }
        expected = offset + size;
        if expected > blob_len {
            return Err(Error::Checkpoint(format!(
                "tensor {} extends past the blob section ({} > {})",
                name, expected, blob_len
            )));
        }
    }

    let mut model = Model::<f32>::build(&meta.model, 0)?;
    if meta.class_names.len() != meta.model.n_classes {
        return Err(Error::Checkpoint(format!(
            "{} class names for {} classes",
            meta.class_names.len(),
            meta.model.n_classes
        )));
    }

    let mut tensors: Vec<(String, Vec<usize>, Vec<f32>)> = Vec::with_capacity(n_tensors);
    for (name, shape, _) in &directory {
        let count: usize = shape.iter().product();
        let mut buf = vec![0u8; count * 4];
        file.read_exact(&mut buf)
            .map_err(|_| Error::Checkpoint(format!("truncated blob for tensor {}", name)))?;
        let values: Vec<f32> = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        tensors.push((name.clone(), shape.clone(), values));
    }

    for (name, mut param) in model.params_mut() {
        let (_, shape, values) = tensors
            .iter()
            .find(|(n, _, _)| *n == name)
            .ok_or_else(|| Error::Checkpoint(format!("checkpoint lacks tensor {}", name)))?;
        if *shape != param.shape() {
            return Err(Error::Checkpoint(format!(
                "tensor {} shape {:?} disagrees with config shape {:?}",
                name,
                shape,
                param.shape()
            )));
        }
        param.value_slice().copy_from_slice(values);
    }
    Ok((model, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gaussian_matrix;
    use crate::seed::rng_from;

    fn meta(cfg: &ModelConfig) -> CheckpointMeta {
        CheckpointMeta {
            model: *cfg,
            features: FeatureConfig::default(),
            class_names: (0..cfg.n_classes).map(|i| format!("c{}", i)).collect(),
            provenance: Provenance { seed: 7, stage: Stage::Pretrain, epoch: 3 },
            config_digest: "test".into(),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = ModelConfig { n_mels: 12, ..ModelConfig::with_classes(3) };
        let mut model = Model::<f32>::build(&cfg, 42).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vxcg");
        save_checkpoint(&mut model, &meta(&cfg), &path).unwrap();
        let (mut loaded, loaded_meta) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded_meta, meta(&cfg));
        assert_eq!(model.export_tensors(), loaded.export_tensors());

        // forward is bitwise identical on random inputs
        let mut rng = rng_from(1);
        for _ in 0..20 {
            let feat = gaussian_matrix::<f32>(&mut rng, 12, 30, 1.0);
            let a = model.forward(&feat).unwrap();
            let b = loaded.forward(&feat).unwrap();
            assert_eq!(a, b);
        }

        // save the loaded model again: byte-identical file
        let path2 = dir.path().join("m2.vxcg");
        save_checkpoint(&mut loaded, &loaded_meta, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn truncated_file_names_the_tensor() {
        let cfg = ModelConfig { n_mels: 12, ..ModelConfig::with_classes(2) };
        let mut model = Model::<f32>::build(&cfg, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vxcg");
        save_checkpoint(&mut model, &meta(&cfg), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let truncated = &bytes[..bytes.len() - 1];
        let tpath = dir.path().join("t.vxcg");
        std::fs::write(&tpath, truncated).unwrap();
        match load_checkpoint(&tpath) {
            Err(Error::Checkpoint(msg)) => {
                assert!(msg.contains("truncated blob for tensor"), "msg: {}", msg);
                assert!(msg.contains("head.fc2.b"), "msg: {}", msg);
            }
            other => panic!("expected checkpoint error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.vxcg");
        std::fs::write(&path, b"NOPE....").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));

        let mut bytes = b"VXCG".to_vec();
        bytes.extend_from_slice(&99u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        match load_checkpoint(&path) {
            Err(Error::Checkpoint(msg)) => assert!(msg.contains("version"), "msg: {}", msg),
            other => panic!("expected version error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn feature_geometry_mismatch_is_detected() {
        let cfg = ModelConfig { n_mels: 40, ..ModelConfig::with_classes(2) };
        let mut m = meta(&cfg);
        m.features.n_mels = 40;
        let expected = FeatureConfig::default(); // 80 mels
        assert!(m.check_feature_compat(&expected).is_err());
        assert!(m.check_feature_compat(&m.features.clone()).is_ok());
    }

    #[test]
    fn missing_file_is_structured() {
        assert!(matches!(
            load_checkpoint("/nonexistent/x.vxcg"),
            Err(Error::FileNotFound(_))
        ));
    }
}
