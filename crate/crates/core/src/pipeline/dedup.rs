use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};

struct Log {
    path: PathBuf,
    out: BufWriter<File>,
}

struct Inner {
    names: HashSet<String>,
    log: Option<Log>,
    offset: u64,
}

/// Exact set of every name ever claimed, backed by an append-only log of
/// one name per line. Insertion is atomic insert-if-absent.
pub struct DedupStore {
    inner: Mutex<Inner>,
}

impl DedupStore {
    pub fn in_memory() -> Self {
        DedupStore {
            inner: Mutex::new(Inner {
                names: HashSet::new(),
                log: None,
                offset: 0,
            }),
        }
    }

    /// Opens (or creates) the log at `path` and loads every name in it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::open_at(path.as_ref(), None)
    }

    /// Like [`DedupStore::open`], but first truncates the log to `offset`
    /// bytes, discarding names claimed after a checkpoint.
    pub fn open_truncated(path: impl AsRef<Path>, offset: u64) -> Result<Self> {
        Self::open_at(path.as_ref(), Some(offset))
    }

    fn open_at(path: &Path, truncate: Option<u64>) -> Result<Self> {
        let io = |e| Error::io(path, e);
        let file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        if let Some(len) = truncate {
            file.set_len(len).map_err(io)?;
        }
        let mut names = HashSet::new();
        let mut offset = 0u64;
        for line in BufReader::new(&file).lines() {
            let line = line.map_err(io)?;
            offset += line.len() as u64 + 1;
            if !line.is_empty() {
                names.insert(line);
            }
        }
        Ok(DedupStore {
            inner: Mutex::new(Inner {
                names,
                log: Some(Log {
                    path: path.to_owned(),
                    out: BufWriter::new(file),
                }),
                offset,
            }),
        })
    }

    /// Adds `name` if absent. Returns whether it was added.
    pub fn insert(&self, name: &str) -> Result<bool> {
        let mut inner = self.inner.lock().expect("dedup lock");
        if inner.names.contains(name) {
            return Ok(false);
        }
        if let Some(log) = inner.log.as_mut() {
            log.out
                .write_all(name.as_bytes())
                .and_then(|_| log.out.write_all(b"\n"))
                .map_err(|e| Error::io(&log.path, e))?;
        }
        inner.offset += name.len() as u64 + 1;
        inner.names.insert(name.to_owned());
        Ok(true)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.inner.lock().expect("dedup lock").names.contains(name)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("dedup lock").names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flushes the log and returns its length in bytes.
    pub fn flush(&self) -> Result<u64> {
        let mut inner = self.inner.lock().expect("dedup lock");
        if let Some(log) = inner.log.as_mut() {
            log.out.flush().map_err(|e| Error::io(&log.path, e))?;
        }
        Ok(inner.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_if_absent() {
        let s = DedupStore::in_memory();
        assert!(s.insert("abc").unwrap());
        assert!(!s.insert("abc").unwrap());
        assert!(s.contains("abc"));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn persists_and_truncates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seen.log");
        {
            let s = DedupStore::open(&path).unwrap();
            s.insert("one").unwrap();
            let mark = s.flush().unwrap();
            assert_eq!(mark, 4);
            s.insert("two").unwrap();
            s.flush().unwrap();
        }
        let s = DedupStore::open(&path).unwrap();
        assert!(s.contains("one") && s.contains("two"));
        drop(s);
        let s = DedupStore::open_truncated(&path, 4).unwrap();
        assert!(s.contains("one"));
        assert!(!s.contains("two"));
        assert!(s.insert("two").unwrap());
        s.flush().unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "one\ntwo\n");
    }

    #[test]
    fn concurrent_claims_are_exclusive() {
        let s = DedupStore::in_memory();
        let wins: usize = std::thread::scope(|sc| {
            let hs: Vec<_> = (0..8)
                .map(|_| sc.spawn(|| (0..100).filter(|i| s.insert(&format!("n{i}")).unwrap()).count()))
                .collect();
            hs.into_iter().map(|h| h.join().unwrap()).sum()
        });
        assert_eq!(wins, 100);
    }
}
