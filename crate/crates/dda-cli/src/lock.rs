//! Output-directory lock: one `dda` invocation per output directory at a
//! time, guarded by an exclusively created `.dda.lock` file.

use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use crate::failure::{Failure, Result};

pub struct OutDirLock {
    path: PathBuf,
}

impl OutDirLock {
    pub fn acquire(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", out_dir.display())))?;
        let path = out_dir.join(".dda.lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutDirLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Failure::usage(format!(
                "output directory is locked by another run ({} exists); \
                 remove the file if that run is gone",
                path.display()
            ))),
            Err(e) => Err(Failure::usage(format!(
                "cannot lock {}: {e}",
                path.display()
            ))),
        }
    }
}

impl Drop for OutDirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_acquire_fails_until_release() {
        let dir = tempfile::tempdir().unwrap();
        let lock = OutDirLock::acquire(dir.path()).unwrap();
        assert!(OutDirLock::acquire(dir.path()).is_err());
        drop(lock);
        OutDirLock::acquire(dir.path()).unwrap();
    }
}
