//! Append-only, versioned store of frozen constants.
//!
//! Each calibration appends a new entry with the next version number.
//! Existing entries are never rewritten; [`Registry::append`] refuses to
//! save a file whose prefix differs from what it loaded.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use snslab_core::lab::FrozenConstants;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub version: u32,
    /// Hash of the calibration config that produced the entry.
    pub config_hash: String,
    pub code_version: String,
    pub constants: FrozenConstants,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub entries: Vec<RegistryEntry>,
    #[serde(skip)]
    path: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("registry {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("registry {path} is corrupt: {source}")]
    Corrupt {
        path: String,
        source: serde_json::Error,
    },
    #[error("registry {0} changed on disk since it was read; refusing to overwrite")]
    Modified(String),
}

/// Identity of the setup a constant set belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct Setup {
    pub basis_fingerprint: String,
    pub nu: f64,
    pub dt: f64,
}

impl RegistryEntry {
    pub fn matches(&self, s: &Setup) -> bool {
        let c = &self.constants;
        c.basis_fingerprint == s.basis_fingerprint && c.nu == s.nu && c.dt == s.dt
    }
}

impl Registry {
    pub fn open(path: &Path) -> Result<Self, RegistryError> {
        let name = path.display().to_string();
        let mut reg: Registry = match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text).map_err(|source| RegistryError::Corrupt { path: name, source })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Registry::default(),
            Err(source) => return Err(RegistryError::Io { path: name, source }),
        };
        reg.path = path.to_owned();
        Ok(reg)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Newest entry for `setup`, or the pinned `version` if it matches.
    pub fn lookup(&self, setup: &Setup, version: Option<u32>) -> Option<&RegistryEntry> {
        self.entries
            .iter()
            .rev()
            .filter(|e| e.matches(setup))
            .find(|e| version.is_none_or(|v| e.version == v))
    }

    /// Adds `constants` as a new version and saves.
    pub fn append(
        &mut self,
        constants: FrozenConstants,
        config_hash: String,
        code_version: String,
    ) -> Result<&RegistryEntry, RegistryError> {
        let name = self.path.display().to_string();
        let on_disk = Registry::open(&self.path)?;
        if on_disk.entries != self.entries {
            return Err(RegistryError::Modified(name));
        }
        let version = self.entries.last().map_or(1, |e| e.version + 1);
        self.entries.push(RegistryEntry {
            version,
            config_hash,
            code_version,
            constants,
        });
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| RegistryError::Io { path: name.clone(), source })?;
        }
        let tmp = self.path.with_extension("json.tmp");
        let body = serde_json::to_string_pretty(self).expect("registry serializes");
        std::fs::write(&tmp, body + "\n")
            .and_then(|_| std::fs::rename(&tmp, &self.path))
            .map_err(|source| RegistryError::Io { path: name, source })?;
        Ok(self.entries.last().expect("just pushed"))
    }
}
