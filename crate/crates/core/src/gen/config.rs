use serde::{Deserialize, Serialize};

use crate::sem::DEFAULT_FUEL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    /// Longest generated collection.
    pub size_bound: usize,
    /// Largest generated |Int| (and Nat).
    pub int_magnitude: u64,
    /// Attempts per precondition-conditioned sample.
    pub rejection_budget: u32,
    pub trials: u32,
    /// Share of fresh samples, as opposed to mutants, in a mutant stream.
    pub fresh_ratio: f64,
    /// Evaluation budget per run or formula.
    pub fuel: u64,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            size_bound: 12,
            int_magnitude: 30,
            rejection_budget: 1000,
            trials: 200,
            fresh_ratio: 0.5,
            fuel: DEFAULT_FUEL,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("`{0}` must be positive")]
    NotPositive(&'static str),
    #[error("`fresh_ratio` must lie in [0, 1]")]
    Ratio,
}

#[derive(Deserialize)]
struct File {
    #[serde(default)]
    gen: GenConfig,
}

impl GenConfig {
    /// Reads the `[gen]` table of a TOML document; missing keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<GenConfig, ConfigError> {
        let file: File = toml::from_str(text)?;
        file.gen.validate()?;
        Ok(file.gen)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            ("size_bound", self.size_bound as u64),
            ("int_magnitude", self.int_magnitude),
            ("rejection_budget", u64::from(self.rejection_budget)),
            ("trials", u64::from(self.trials)),
            ("fuel", self.fuel),
        ];
        if let Some((name, _)) = checks.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError::NotPositive(name));
        }
        if !(0.0..=1.0).contains(&self.fresh_ratio) {
            return Err(ConfigError::Ratio);
        }
        Ok(())
    }
}
