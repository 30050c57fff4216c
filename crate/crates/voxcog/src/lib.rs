//! End-to-end speech-based cognitive impairment classification with
//! dialect-transfer pretraining.

pub mod audio;
pub mod augment;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
pub mod evaluator;
pub mod error;
pub mod features;
pub mod manifest;
pub mod model;
pub mod nn;
pub mod seed;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
