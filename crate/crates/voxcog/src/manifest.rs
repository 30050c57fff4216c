//! Subject manifests: the JSON-lines dataset interface.
//!
//! One object per line, one subject per object:
//! `{"subject_id": "s1", "label": "HC", "recordings": ["a.wav"], "dialect": "d0"}`
//! The `dialect` and `split` fields are optional.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject: a label and the recordings that carry it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub label: String,
    pub recordings: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

/// Enforce the manifest invariants: unique subject ids, at least one
/// recording per subject.
pub fn validate_manifest(records: &[SubjectRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for rec in records {
        if rec.subject_id.is_empty() {
            return Err(Error::Manifest("empty subject_id".into()));
        }
        if !seen.insert(rec.subject_id.as_str()) {
            return Err(Error::Manifest(format!(
                "duplicate subject_id {}",
                rec.subject_id
            )));
        }
        if rec.recordings.is_empty() {
            return Err(Error::Manifest(format!(
                "subject {} has no recordings",
                rec.subject_id
            )));
        }
    }
    Ok(())
}

pub fn load_manifest<P: AsRef<Path>>(path: P) -> Result<Vec<SubjectRecord>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SubjectRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Manifest(format!("{}:{}: {}", path.display(), i + 1, e)))?;
        records.push(rec);
    }
    validate_manifest(&records)?;
    Ok(records)
}

pub fn save_manifest<P: AsRef<Path>>(records: &[SubjectRecord], path: P) -> Result<()> {
    validate_manifest(records)?;
    let mut file = BufWriter::new(File::create(path)?);
    for rec in records {
        serde_json::to_writer(&mut file, rec)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}

/// Class index order is the sorted order of class names.
pub fn class_names(records: &[SubjectRecord]) -> Vec<String> {
    let set: BTreeSet<&str> = records.iter().map(|r| r.label.as_str()).collect();
    set.into_iter().map(String::from).collect()
}

/// Dialect class names, sorted; errors if any record lacks one.
pub fn dialect_names(records: &[SubjectRecord]) -> Result<Vec<String>> {
    let mut set = BTreeSet::new();
    for rec in records {
        match &rec.dialect {
            Some(d) => {
                set.insert(d.as_str());
            }
            None => {
                return Err(Error::Manifest(format!(
                    "subject {} has no dialect label",
                    rec.subject_id
                )))
            }
        }
    }
    Ok(set.into_iter().map(String::from).collect())
}

pub fn label_index(classes: &[String], label: &str) -> Result<usize> {
    classes
        .iter()
        .position(|c| c == label)
        .ok_or_else(|| Error::Manifest(format!("unknown label {}", label)))
}
