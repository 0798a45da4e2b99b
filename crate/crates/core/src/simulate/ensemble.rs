use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{csv_header, fmt17};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Oracle,
    Particle,
}

/// Terminal samples (and optionally whole paths) from one engine run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub samples: Vec<f64>,
    /// `paths[m][i]`: position of particle `i` after step `m`.
    pub paths: Option<Vec<Vec<f64>>>,
    pub generator: Generator,
    pub seed: u64,
    pub params: ModelParams<f64>,
    pub engine_version: String,
    /// Density estimates raised to the floor over the whole run.
    pub floored: usize,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{}",
            csv_header(
                &[
                    ("sigma", self.params.sigma),
                    ("epsilon", self.params.epsilon),
                    ("horizon", self.params.horizon),
                ],
                &[
                    ("generator", format!("{:?}", self.generator).to_lowercase()),
                    ("seed", self.seed.to_string()),
                    ("n", self.samples.len().to_string()),
                ],
            )
        )?;
        writeln!(w, "sample")?;
        for s in &self.samples {
            writeln!(w, "{}", fmt17(*s))?;
        }
        Ok(())
    }
}
