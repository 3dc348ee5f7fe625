//! Checkpoint files: the search key plus the descent frontier, written by
//! write-new-then-rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::SearchKey;
use crate::descent::Resume;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const KIND: &str = "ecdescent-checkpoint";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub kind: String,
    pub version: u32,
    pub key: SearchKey,
    pub state: Resume,
}

impl Checkpoint {
    pub fn new(key: SearchKey, state: Resume) -> Self {
        Self {
            kind: KIND.into(),
            version: CHECKPOINT_VERSION,
            key,
            state,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("{} is not a checkpoint: {e}", path.display())))?;
        if value.get("kind").and_then(|k| k.as_str()) != Some(KIND) {
            return Err(Error::Checkpoint(format!("{} is not a checkpoint file", path.display())));
        }
        let version = value.get("version").and_then(|v| v.as_u64());
        if version != Some(CHECKPOINT_VERSION as u64) {
            return Err(Error::Checkpoint(format!(
                "{} has version {}, this build reads version {CHECKPOINT_VERSION}",
                path.display(),
                version.map_or("?".to_string(), |v| v.to_string())
            )));
        }
        serde_json::from_value(value).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }

    /// Load and check that the checkpoint belongs to `key`.
    pub fn load_for(path: &Path, key: &SearchKey) -> Result<Self> {
        let cp = Self::load(path)?;
        if cp.key != *key {
            return Err(Error::Checkpoint(format!(
                "{} was written for a different configuration; refusing to resume",
                path.display()
            )));
        }
        Ok(cp)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = tmp_path(path);
        {
            let mut f = fs::File::create(&tmp)?;
            serde_json::to_writer(&mut f, self)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".new");
    path.with_file_name(name)
}

/// Rate-limited checkpoint writer.
pub struct Writer {
    path: PathBuf,
    key: SearchKey,
    every: Duration,
    last: Option<Instant>,
    error: Option<Error>,
}

impl Writer {
    pub fn new(path: PathBuf, key: SearchKey, every: Duration) -> Self {
        Self {
            path,
            key,
            every,
            last: None,
            error: None,
        }
    }

    pub fn offer(&mut self, state: &Resume) {
        if self.error.is_some() || self.last.is_some_and(|t| t.elapsed() < self.every) {
            return;
        }
        self.write(state);
    }

    pub fn write(&mut self, state: &Resume) {
        match Checkpoint::new(self.key.clone(), state.clone()).save(&self.path) {
            Ok(()) => self.last = Some(Instant::now()),
            Err(e) => {
                log::error!("checkpoint write to {} failed: {e}", self.path.display());
                self.error = Some(e);
            }
        }
    }

    pub fn finish(self) -> Result<()> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
