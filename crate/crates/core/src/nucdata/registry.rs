use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::DatasetKey;

#[derive(Debug, Error)]
#[error("absence registry {path}: {source}")]
pub struct RegistryError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// Persisted set of dataset keys known to have no data.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsenceRegistry {
    entries: BTreeSet<String>,
    path: PathBuf,
}

impl AbsenceRegistry {
    pub const FILE_NAME: &'static str = "absent_registry.txt";

    /// Loads the registry; a missing file is an empty registry. A file that is not
    /// sorted and duplicate-free is rewritten in normal form.
    pub fn load(path: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let path = path.into();
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(source) => return Err(RegistryError { path, source }),
        };
        let entries: BTreeSet<String> =
            text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
        let reg = AbsenceRegistry { entries, path };
        if !text.is_empty() && reg.render() != text {
            reg.persist()?;
        }
        Ok(reg)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn contains(&self, key: &DatasetKey) -> bool {
        self.entries.contains(&key.to_string())
    }

    pub fn contains_str(&self, key: &str) -> bool {
        self.entries.contains(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds a key and rewrites the file. Returns false when already present.
    pub fn record(&mut self, key: &DatasetKey) -> Result<bool, RegistryError> {
        self.record_str(&key.to_string())
    }

    pub fn record_str(&mut self, key: &str) -> Result<bool, RegistryError> {
        if !self.entries.insert(key.to_string()) {
            return Ok(false);
        }
        if let Err(e) = self.persist() {
            self.entries.remove(key);
            return Err(e);
        }
        Ok(true)
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(e);
            s.push('\n');
        }
        s
    }

    fn persist(&self) -> Result<(), RegistryError> {
        let err = |source| RegistryError { path: self.path.clone(), source };
        let dir = self.path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir).map_err(err)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
        tmp.write_all(self.render().as_bytes()).map_err(err)?;
        tmp.persist(&self.path).map_err(|e| err(e.error))?;
        Ok(())
    }
}
