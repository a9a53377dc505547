//! On-disk cache of formal group laws, keyed by a hash of the law's header.

use std::io::Write;
use std::path::{Path, PathBuf};

use bpbv::fgl::{build_fgl, Flavor, FormalGroupLaw, CACHE_FORMAT_VERSION};
use sha2::{Digest, Sha256};

/// Identity of a law: everything that determines its coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LawKey {
    pub p: u64,
    pub n: u32,
    pub flavor: Flavor,
    pub trunc: u32,
    pub prec: u32,
}

impl LawKey {
    fn header(&self) -> String {
        format!(
            "{{\"format_version\":{},\"p\":{},\"n\":{},\"flavor\":\"{}\",\"D\":{},\"N\":{}}}",
            CACHE_FORMAT_VERSION, self.p, self.n, self.flavor, self.trunc, self.prec
        )
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.header().as_bytes()))
    }

    pub fn file_name(&self) -> String {
        format!("fgl-{}.json", &self.hash()[..16])
    }

    fn matches(&self, law: &FormalGroupLaw) -> bool {
        (law.p, law.n, law.flavor, law.trunc, law.prec) == (self.p, self.n, self.flavor, self.trunc, self.prec)
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

/// Loads a cached law. Missing files are a silent miss; unreadable,
/// corrupt, stale or mismatched files are ignored with a warning.
pub fn load(dir: &Path, key: &LawKey) -> Option<FormalGroupLaw> {
    let path = dir.join(key.file_name());
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
        Err(e) => {
            warn(format_args!("ignoring cache file {}: {e}", path.display()));
            return None;
        }
    };
    match FormalGroupLaw::from_cache_json(&text) {
        Ok(law) if key.matches(&law) => Some(law),
        Ok(_) => {
            warn(format_args!("ignoring cache file {}: header does not match its key", path.display()));
            None
        }
        Err(e) => {
            warn(format_args!("ignoring cache file {}: {e}", path.display()));
            None
        }
    }
}

/// Writes the law through a temporary file and an atomic rename.
pub fn store(dir: &Path, key: &LawKey, law: &FormalGroupLaw) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(key.file_name());
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(law.to_cache_json().as_bytes())?;
    tmp.write_all(b"\n")?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

/// Returns the law for `key`, going through the cache when a directory is given.
pub fn law(cache_dir: Option<&Path>, key: &LawKey) -> bpbv::Result<FormalGroupLaw> {
    if let Some(dir) = cache_dir {
        if let Some(law) = load(dir, key) {
            return Ok(law);
        }
    }
    let law = build_fgl(key.p, key.n, key.flavor, key.trunc, key.prec)?;
    if let Some(dir) = cache_dir {
        if let Err(e) = store(dir, key, &law) {
            warn(format_args!("could not write cache in {}: {e}", dir.display()));
        }
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> LawKey {
        LawKey { p: 2, n: 1, flavor: Flavor::Araki, trunc: 6, prec: 1 }
    }

    #[test]
    fn store_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let built = law(Some(dir.path()), &key()).unwrap();
        let loaded = load(dir.path(), &key()).unwrap();
        assert_eq!(loaded.to_cache_json(), built.to_cache_json());
    }

    #[test]
    fn keys_differ() {
        let other = LawKey { trunc: 7, ..key() };
        assert_ne!(key().hash(), other.hash());
        assert_eq!(key().hash().len(), 64);
    }

    #[test]
    fn corrupt_and_stale_files_are_misses() {
        let dir = tempfile::tempdir().unwrap();
        let path = store(dir.path(), &key(), &law(None, &key()).unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(load(dir.path(), &key()).is_none());
        let stale = text.replacen("\"format_version\":1", "\"format_version\":2", 1);
        std::fs::write(&path, stale).unwrap();
        assert!(load(dir.path(), &key()).is_none());
        // A law stored under the wrong key is rejected too.
        let other = LawKey { trunc: 7, ..key() };
        std::fs::write(dir.path().join(other.file_name()), &text).unwrap();
        assert!(load(dir.path(), &other).is_none());
    }

    #[test]
    fn unwritable_directory_still_computes() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        assert!(law(Some(&blocker.join("sub")), &key()).is_ok());
    }
}
