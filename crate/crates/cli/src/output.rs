//! Run directories and manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const OUT_ENV: &str = "NSLAB_OUT";

/// Output root: `NSLAB_OUT` when set, else `fallback`.
pub fn output_root(fallback: &str) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(fallback),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects artifacts under one directory and records them by relative path.
pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config_sha256: &'a str,
    seed: u64,
    files: &'a [String],
    summary: &'a [(String, String)],
}

impl RunDir {
    pub fn create(root: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    fn record(&mut self, rel: &Path) {
        let s = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if !self.files.contains(&s) {
            self.files.push(s);
        }
    }

    pub fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<(), CliError> {
        let rel = rel.as_ref();
        let full = self.root.join(rel);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(full, bytes)?;
        self.record(rel);
        Ok(())
    }

    /// Registers files some other writer put under `prefix`.
    pub fn adopt(&mut self, prefix: &Path, rels: &[PathBuf]) {
        for r in rels {
            self.record(&prefix.join(r));
        }
    }

    pub fn finish(
        mut self,
        command: &str,
        config_text: &str,
        seed: u64,
        summary: &[(String, String)],
    ) -> Result<PathBuf, CliError> {
        let hash = sha256_hex(config_text.as_bytes());
        self.files.sort();
        let manifest = Manifest {
            tool: "nslab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256: &hash,
            seed,
            files: &self.files,
            summary,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
        fs::write(self.root.join("manifest.json"), json + "\n")?;
        Ok(self.root)
    }
}
