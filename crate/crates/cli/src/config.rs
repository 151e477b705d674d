//! The versioned defaults file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use fblb::Settings;
use serde::{Deserialize, Serialize};

pub const DEFAULTS_VERSION: u32 = 1;

/// The defaults shipped with the binary.
pub const BUILTIN_DEFAULTS: &str = include_str!("../defaults.toml");

/// Fallback run parameters, used when neither a flag nor an `FBLB_*`
/// variable sets them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunDefaults {
    pub coherence: usize,
    pub blocks: usize,
    pub snr_db: f64,
    pub kinds: Vec<String>,
    pub jobs: usize,
}

impl Default for RunDefaults {
    fn default() -> Self {
        Self {
            coherence: 12,
            blocks: 14,
            snr_db: 6.0,
            kinds: vec!["rcus-sp".into(), "mc-sp".into()],
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultsFile {
    pub version: u32,
    #[serde(default)]
    pub run: RunDefaults,
    #[serde(default)]
    pub settings: Settings,
}

impl DefaultsFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: DefaultsFile = toml::from_str(text)?;
        if file.version != DEFAULTS_VERSION {
            bail!("defaults file version {} is not supported (expected {DEFAULTS_VERSION})", file.version);
        }
        file.settings.validate()?;
        Ok(file)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Self::parse(BUILTIN_DEFAULTS),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("parsing {}", p.display()))
            }
        }
    }
}
