use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use illusory_core::client::EndpointConfig;
use illusory_core::pipeline::FilterConfig;
use illusory_core::synth::SynthSpec;
use serde::{Deserialize, Serialize};

/// Name of the effective-config file written next to every output.
pub const ECHO_FILE: &str = "run_config.toml";

/// Everything a run can be configured with. Loaded from `--config`, then
/// overridden by command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub filter: FilterConfig,
    pub endpoint: EndpointConfig,
    pub synth: SynthSpec,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Writes the effective configuration into `dir`.
    pub fn echo(&self, dir: &Path) -> Result<()> {
        if self.synth.seed > i64::MAX as u64 {
            bail!(
                "seed {} does not fit in a config file (max {})",
                self.synth.seed,
                i64::MAX
            );
        }
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let text = toml::to_string(self).context("serializing effective config")?;
        let path = dir.join(ECHO_FILE);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Replaces `slot` with `value` when the flag was given.
pub fn apply<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Resolves paths given on the command line against `--root`.
#[derive(Debug, Clone)]
pub struct Paths {
    root: PathBuf,
}

impl Paths {
    pub fn new(root: Option<PathBuf>) -> Self {
        Paths {
            root: root.unwrap_or_else(|| PathBuf::from(".")),
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.root.join(path)
        }
    }
}
