//! Write-to-temp, rename-on-commit output staging.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use segkit::image::{save_image, save_mask};
use segkit::{BinaryMask, GrayImage};
use serde::Serialize;

/// Collects output files as hidden temporaries in the target directory and
/// renames them into place only on [`Staging::commit`]. Dropping an
/// uncommitted stage removes the temporaries.
pub(crate) struct Staging {
    dir: PathBuf,
    pending: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl Staging {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
            committed: false,
        }
    }

    /// Temp path that keeps `name`'s extension so the encoders pick the
    /// right format.
    fn reserve(&mut self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let tmp = self.dir.join(format!(".tmp-{}-{name}", std::process::id()));
        self.pending.push((tmp.clone(), self.dir.join(name)));
        Ok(tmp)
    }

    pub fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.reserve(name)?;
        fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn mask(&mut self, name: &str, mask: &BinaryMask) -> Result<()> {
        let tmp = self.reserve(name)?;
        Ok(save_mask(mask, &tmp)?)
    }

    pub fn image(&mut self, name: &str, img: &GrayImage) -> Result<()> {
        let tmp = self.reserve(name)?;
        Ok(save_image(img, &tmp)?)
    }

    /// Renames every staged file into place and returns the final paths.
    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let mut done = Vec::with_capacity(self.pending.len());
        for (tmp, dst) in &self.pending {
            fs::rename(tmp, dst).with_context(|| format!("moving output to {}", dst.display()))?;
            done.push(dst.clone());
        }
        self.committed = true;
        Ok(done)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _) in &self.pending {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}
