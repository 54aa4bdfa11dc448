//! Report cache keyed by a SHA-256 of the command and canonical config.

use std::fs;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::{render, Command, TOOL_VERSION};

pub struct Cache {
    dir: PathBuf,
}

/// Hex digest of the tool version, command and canonical config.
pub fn key(command: Command, cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(TOOL_VERSION.as_bytes());
    h.update(b"\n");
    h.update(command.name().as_bytes());
    h.update(b"\n");
    h.update(render(&cfg.to_json()).as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        fs::read_to_string(self.path(key)).ok()
    }

    /// Writes through a temporary file so readers never see partial reports.
    pub fn put(&self, key: &str, report: &str) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!("{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, report)?;
        fs::rename(tmp, self.path(key))
    }
}
