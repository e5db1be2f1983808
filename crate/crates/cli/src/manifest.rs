use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use sdde_split::config::{ConfigFile, Preset};
use sdde_split::StudyConfig;

#[derive(Debug, Serialize)]
pub struct Output {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to reproduce a run: feeding `config` back through
/// `--config` regenerates byte-identical outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub preset: Option<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Flat TOML echo of the resolved configuration.
    pub config: String,
    pub elapsed_seconds: f64,
    pub outputs: Vec<Output>,
}

impl Manifest {
    pub fn new(
        command: &'static str,
        preset: Option<Preset>,
        cfg: &StudyConfig,
        threads: Option<usize>,
    ) -> anyhow::Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            preset: preset.map(|p| p.to_string()),
            seed: cfg.master_seed,
            threads,
            config: ConfigFile::from_study(cfg)?.to_toml(),
            elapsed_seconds: 0.0,
            outputs: Vec::new(),
        })
    }

    pub fn output(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading back {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.outputs.push(Output {
            path: path.to_path_buf(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
