use std::io::Write;
use std::path::{Path, PathBuf};

use super::DatasetKey;

/// Write-once dataset files under one directory.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &DatasetKey) -> PathBuf {
        self.dir.join(format!("{}.csv", key.file_stem()))
    }

    pub fn exists(&self, key: &DatasetKey) -> bool {
        self.path_for(key).is_file()
    }

    pub fn read(&self, key: &DatasetKey) -> std::io::Result<Option<String>> {
        match std::fs::read_to_string(self.path_for(key)) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write_atomic(&self, key: &DatasetKey, body: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let mut tmp =
            tempfile::Builder::new().prefix(&format!(".{}", key.file_stem())).suffix(".part").tempfile_in(&self.dir)?;
        tmp.write_all(body.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }
}
