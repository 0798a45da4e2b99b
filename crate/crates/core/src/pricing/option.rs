use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionSide {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolConvention {
    /// Bachelier, vol in price units per root year.
    Normal,
    /// Black with zero rate.
    Lognormal,
}

/// European option on `S_T = S_0 + x` with zero rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub spot: f64,
    pub strike: f64,
    pub maturity: f64,
    pub side: OptionSide,
}

impl OptionSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("spot", self.spot), ("strike", self.strike), ("maturity", self.maturity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn payoff(&self, s: f64) -> f64 {
        match self.side {
            OptionSide::Call => (s - self.strike).max(0.0),
            OptionSide::Put => (self.strike - s).max(0.0),
        }
    }
}
