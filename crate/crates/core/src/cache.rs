//! Append-only JSON-lines cache: one `{"key": .., "result": ..}` object per
//! line. Later lines win on duplicate keys.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::hash::Hash;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Line<K, V> {
    key: K,
    result: V,
}

pub struct JsonlCache<K, V> {
    path: Option<PathBuf>,
    map: HashMap<K, V>,
    hits: usize,
    misses: usize,
}

impl<K, V> JsonlCache<K, V>
where
    K: Serialize + DeserializeOwned + Eq + Hash + Clone,
    V: Serialize + DeserializeOwned + Clone,
{
    pub fn in_memory() -> Self {
        Self {
            path: None,
            map: HashMap::new(),
            hits: 0,
            misses: 0,
        }
    }

    /// Loads `path` if it exists; new entries are appended to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: Line<K, V> = serde_json::from_str(&line).map_err(|e| {
                    Error::Io(format!("{}:{}: {e}", path.display(), n + 1))
                })?;
                map.insert(entry.key, entry.result);
            }
        }
        Ok(Self {
            path: Some(path),
            map,
            hits: 0,
            misses: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Lookups answered from the cache.
    pub fn hits(&self) -> usize {
        self.hits
    }

    /// Lookups that ran the computation.
    pub fn misses(&self) -> usize {
        self.misses
    }

    pub fn get(&self, key: &K) -> Option<&V> {
        self.map.get(key)
    }

    pub fn insert(&mut self, key: K, value: V) -> Result<()> {
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            let line = serde_json::to_string(&Line {
                key: &key,
                result: &value,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
            writeln!(f, "{line}")?;
        }
        self.map.insert(key, value);
        Ok(())
    }

    pub fn get_or_try_insert_with(
        &mut self,
        key: K,
        compute: impl FnOnce() -> Result<V>,
    ) -> Result<V> {
        if let Some(v) = self.map.get(&key) {
            self.hits += 1;
            return Ok(v.clone());
        }
        self.misses += 1;
        let v = compute()?;
        self.insert(key, v.clone())?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_file() {
        let dir = std::env::temp_dir().join(format!("nagata-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.jsonl");
        let _ = std::fs::remove_file(&path);
        let mut c: JsonlCache<u64, String> = JsonlCache::open(&path).unwrap();
        assert_eq!(c.get_or_try_insert_with(3, || Ok("three".into())).unwrap(), "three");
        assert_eq!(c.get_or_try_insert_with(3, || panic!("recomputed")).unwrap(), "three");
        assert_eq!((c.hits(), c.misses()), (1, 1));
        let mut c: JsonlCache<u64, String> = JsonlCache::open(&path).unwrap();
        assert_eq!(c.len(), 1);
        c.get_or_try_insert_with(3, || panic!("recomputed")).unwrap();
        assert_eq!(c.misses(), 0);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "{\"key\":3,\"result\":\"three\"}\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
