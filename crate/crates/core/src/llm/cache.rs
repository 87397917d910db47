use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{ChatRequest, Completion};
use crate::promptgen::Message;

/// Hex SHA-256 over the canonical JSON of (messages, model, temperature).
pub fn cache_key(request: &ChatRequest) -> String {
    #[derive(Serialize)]
    struct KeyFields<'a> {
        messages: &'a [Message],
        model: &'a str,
        temperature: f64,
    }
    let json = serde_json::to_vec(&KeyFields {
        messages: &request.messages,
        model: &request.model,
        temperature: request.temperature,
    })
    .expect("key fields serialize");
    hex::encode(Sha256::digest(&json))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<Message>,
    pub text: String,
    #[serde(default)]
    pub provider_meta: BTreeMap<String, Value>,
    /// Seconds since the Unix epoch when the answer was stored.
    pub timestamp: u64,
}

impl CacheEntry {
    pub fn new(
        request: &ChatRequest,
        text: String,
        provider_meta: BTreeMap<String, Value>,
    ) -> Self {
        Self {
            model: request.model.clone(),
            temperature: request.temperature,
            messages: request.messages.clone(),
            text,
            provider_meta,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn into_completion(self, cached: bool) -> Completion {
        Completion {
            text: self.text,
            provider_meta: self.provider_meta,
            cached,
        }
    }
}

/// In-memory cache, mirrored to `<dir>/<key>.json` when a directory is set.
#[derive(Debug, Default)]
pub struct ResponseCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, CacheEntry>>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl ResponseCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self {
            dir,
            ..Default::default()
        }
    }

    pub fn path_for(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        if let Some(e) = self
            .memory
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(key)
        {
            return Some(e.clone());
        }
        let path = self.path_for(key)?;
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<CacheEntry>(&text) {
            Ok(entry) => {
                self.memory
                    .lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .insert(key.to_string(), entry.clone());
                Some(entry)
            }
            Err(e) => {
                log::warn!("ignoring unreadable cache file {}: {e}", path.display());
                None
            }
        }
    }

    pub fn put(&self, key: &str, entry: &CacheEntry) -> std::io::Result<()> {
        if let Some(path) = self.path_for(key) {
            write_atomic(&path, &serde_json::to_vec_pretty(entry)?)?;
        }
        self.memory
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key.to_string(), entry.clone());
        Ok(())
    }

    /// Per-key mutex so at most one writer fills a given key.
    pub fn lock_for(&self, key: &str) -> Arc<Mutex<()>> {
        self.locks
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry(key.to_string())
            .or_default()
            .clone()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::promptgen::Role;

    fn request(text: &str, temperature: f64) -> ChatRequest {
        ChatRequest {
            messages: vec![Message {
                role: Role::User,
                content: text.into(),
            }],
            model: "m".into(),
            temperature,
            max_output_tokens: 10,
        }
    }

    #[test]
    fn key_depends_on_fields() {
        let a = cache_key(&request("x", 0.0));
        assert_eq!(a, cache_key(&request("x", 0.0)));
        assert_eq!(a.len(), 64);
        assert_ne!(a, cache_key(&request("y", 0.0)));
        assert_ne!(a, cache_key(&request("x", 0.5)));
        let mut r = request("x", 0.0);
        r.max_output_tokens = 99;
        assert_eq!(a, cache_key(&r));
    }

    #[test]
    fn disk_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let req = request("x", 0.0);
        let key = cache_key(&req);
        let cache = ResponseCache::new(Some(dir.path().to_path_buf()));
        cache
            .put(
                &key,
                &CacheEntry::new(&req, "answer".into(), BTreeMap::new()),
            )
            .unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

        let fresh = ResponseCache::new(Some(dir.path().to_path_buf()));
        let got = fresh.get(&key).unwrap();
        assert_eq!(got.text, "answer");
        assert_eq!(got.messages, req.messages);
        assert!(got.timestamp > 0);
    }
}
