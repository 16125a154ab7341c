//! Config file layout. Every field has a default, unknown keys are errors.

use std::path::{Path, PathBuf};

use repday::pipeline::RunConfig;
use repday::synthgen::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    /// Input CSV; a synthetic dataset is generated from `synth` if unset.
    pub data: Option<PathBuf>,
    /// Output directory.
    pub out: PathBuf,
    /// Emit SVG charts next to the reports.
    pub plots: bool,
    pub run: RunConfig,
    pub synth: SynthConfig,
    pub sweep: SweepSection,
    pub compare: CompareSection,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            data: None,
            out: PathBuf::from("out"),
            plots: true,
            run: RunConfig::default(),
            synth: SynthConfig::default(),
            sweep: SweepSection::default(),
            compare: CompareSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub fractions: Vec<f64>,
    /// Fail the sweep if total cost rises with the grid limit.
    pub check_monotone: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            fractions: vec![1.2, 1.0, 0.8, 0.5, 0.2, 0.0],
            check_monotone: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub ks: Vec<usize>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { ks: vec![5, 9] }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}
