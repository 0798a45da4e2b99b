//! Flags over the JSON config file over built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::{BlurArg, ConventionArg, GeneratorArg, KernelMethodArg, SideArg};
use crate::CliError;

/// A scalar or a list in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }

    pub fn single(self, key: &str) -> Result<f64, CliError> {
        match self {
            OneOrMany::One(v) => Ok(v),
            OneOrMany::Many(v) if v.len() == 1 => Ok(v[0]),
            OneOrMany::Many(_) => Err(CliError::Config(format!("`{key}` takes a single value here"))),
        }
    }
}

/// Every key the config file may set. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub sigma: Option<f64>,
    #[serde(alias = "horizon")]
    pub t: Option<f64>,
    pub epsilon: Option<OneOrMany>,
    pub method: Option<KernelMethodArg>,
    pub truncation: Option<String>,
    pub filter: Option<bool>,
    pub points_per_std: Option<usize>,
    pub alpha: Option<f64>,
    pub order: Option<usize>,
    pub blur: Option<BlurArg>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub at: Option<f64>,
    pub generator: Option<GeneratorArg>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub spot: Option<f64>,
    pub strikes: Option<OneOrMany>,
    pub side: Option<SideArg>,
    pub convention: Option<ConventionArg>,
    pub maturities: Option<OneOrMany>,
    pub offsets: Option<OneOrMany>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// First of flag, config value, default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
