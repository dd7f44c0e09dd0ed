//! Store for computed invariants: an in-memory map, optionally backed by a
//! directory with one JSON file per key.

use crate::rational::{format_q, parse_q, Q};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub const CACHE_ENV: &str = "TORICGW_CACHE";

#[derive(Debug, Default)]
pub struct InvariantCache {
    memory: Mutex<HashMap<String, Q>>,
    dir: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    value: String,
}

impl InvariantCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Backed by `dir`, which is created if missing.
    pub fn with_dir(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(InvariantCache {
            memory: Mutex::new(HashMap::new()),
            dir: Some(dir),
        })
    }

    /// Uses `$TORICGW_CACHE` when set, memory only otherwise.
    pub fn from_env() -> std::io::Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::with_dir(d),
            _ => Ok(Self::in_memory()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn file_for(&self, key: &str) -> Option<PathBuf> {
        let digest = hex::encode(Sha256::digest(key.as_bytes()));
        self.dir.as_ref().map(|d| d.join(format!("{digest}.json")))
    }

    pub fn get(&self, key: &str) -> Option<Q> {
        if let Some(v) = self.memory.lock().expect("cache lock").get(key) {
            return Some(v.clone());
        }
        let path = self.file_for(key)?;
        let text = std::fs::read_to_string(path).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        // a digest collision or a stale file must not be trusted
        if entry.key != key {
            return None;
        }
        let v = parse_q(&entry.value).ok()?;
        self.memory
            .lock()
            .expect("cache lock")
            .insert(key.to_string(), v.clone());
        Some(v)
    }

    /// Records a value. Disk writes go through a temporary file and a
    /// rename, so readers never see partial entries.
    pub fn put(&self, key: &str, value: &Q) -> std::io::Result<()> {
        self.memory
            .lock()
            .expect("cache lock")
            .insert(key.to_string(), value.clone());
        let Some(path) = self.file_for(key) else {
            return Ok(());
        };
        let entry = Entry {
            key: key.to_string(),
            value: format_q(value),
        };
        let dir = path.parent().expect("cache file has a parent");
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(serde_json::to_string(&entry)?.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map(|_| ()).map_err(|e| e.error)
    }

    pub fn len(&self) -> usize {
        self.memory.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
