use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use scribeforge::blot::BlotConfig;

/// Run configuration read from `--config`. Every field is optional and
/// defaults to the standard settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub blot: BlotConfig,
    pub stackmix: StackMixConfig,
    pub seed: u64,
    pub paths: Paths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StackMixConfig {
    pub target_height: u32,
    /// One probability per lexicon dimension. `None` uses the defaults for
    /// the standard six dimensions and uniform weights otherwise.
    pub tokenizer_probs: Option<Vec<f64>>,
    /// Probability of drawing a synthetic line when sampling on the fly.
    pub on_the_fly_proba: f64,
    /// White rows between lines in page mode.
    pub page_gap: u32,
}

impl Default for StackMixConfig {
    fn default() -> Self {
        Self {
            target_height: 128,
            tokenizer_probs: None,
            on_the_fly_proba: 0.8,
            page_gap: 16,
        }
    }
}

/// Default locations used when the matching flag is not given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub posteriors: Option<PathBuf>,
    pub boundaries: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.blot.validate()?;
        anyhow::ensure!(
            (0.0..=1.0).contains(&self.stackmix.on_the_fly_proba),
            "on_the_fly_proba must be within [0, 1]"
        );
        anyhow::ensure!(self.stackmix.target_height > 0, "target_height must be positive");
        Ok(())
    }
}
