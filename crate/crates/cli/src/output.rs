use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Where a command writes: an explicit `--output`, else a default name
/// inside the output directory.
pub struct OutputTarget {
    explicit: Option<PathBuf>,
    dir: PathBuf,
}

impl OutputTarget {
    pub fn new(explicit: Option<PathBuf>, dir: PathBuf) -> Self {
        Self { explicit, dir }
    }

    pub fn file(&self, default_name: &str) -> PathBuf {
        self.explicit
            .clone()
            .unwrap_or_else(|| self.dir.join(default_name))
    }

    /// The directory for multi-file outputs, created if needed.
    pub fn dir(&self) -> Result<PathBuf> {
        let dir = self.explicit.clone().unwrap_or_else(|| self.dir.clone());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = parent.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
